"""Correlation structure of bipartite states and of channels via their Choi
states: one-sided classicality, measure-and-prepare extraction, commuting
(fully classical) channel data, and residual decompositions.

A state is *classical on side B* when it can be written
``sum_k p_k sigma_k (x) |u_k><u_k|`` for an orthonormal basis ``{u_k}``;
equivalently, the operator family ``{<m|_A rho |n>_A}`` obtained by
sandwiching the *other* side with computational bras has a common
eigenbasis. Classicality on A is the mirror statement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import ChoiChannel
from .linalg import (
    DEFAULT_TOL,
    as_cmatrix,
    commutator_norm,
    dagger,
    frobenius,
    simultaneous_diagonalize,
)
from .markov import StochasticMatrix
from .measurement import MeasurementMap
from .states import QuantumState, maximally_mixed

__all__ = [
    "CCChannelData",
    "CcMembership",
    "ClassicalStructure",
    "MultipartiteReport",
    "ResidualDecomposition",
    "cc_type_extract",
    "classical_side_basis",
    "classify_state",
    "in_cc_set",
    "multipartite_qc_check",
    "qc_type_extract",
    "residual_decomposition",
    "schmidt_state",
    "star_mix",
]

_ZERO_PROB = 1e-12


@dataclass(frozen=True)
class ClassicalStructure:
    """Outcome of a one-sided classicality test.

    On success ``basis`` holds the pointer basis of the tested side and
    ``probabilities``/``blocks`` give the ensemble on the other side, with
    ``None`` marking zero-probability blocks. On failure ``basis`` is None
    and ``witness`` is the largest violating commutator norm.
    """

    side: str
    basis: np.ndarray | None
    probabilities: np.ndarray | None
    blocks: tuple[QuantumState | None, ...] | None
    witness: float

    def __bool__(self) -> bool:
        return self.basis is not None


def _block_family(rho: QuantumState, side: str) -> tuple[np.ndarray, int, int]:
    if rho.n_factors != 2:
        raise ValueError("classicality tests need a bipartite state")
    side = side.upper()
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    d_a, d_b = rho.dims
    r4 = rho.matrix.reshape(d_a, d_b, d_a, d_b)
    if side == "B":
        # operators on B, indexed by bras/kets on A
        family = r4.transpose(0, 2, 1, 3).reshape(d_a * d_a, d_b, d_b)
        return family, d_b, d_a
    family = r4.transpose(1, 3, 0, 2).reshape(d_b * d_b, d_a, d_a)
    return family, d_a, d_b


def classical_side_basis(
    rho: QuantumState, side: str = "B", tol: float | None = None
) -> ClassicalStructure:
    """Test whether ``rho`` is classical on one side and extract the ensemble.

    Returns the pointer basis on the tested side together with the block
    decomposition ``(p_k, sigma_k)`` on the other side, or the violating
    commutator norm when the defining operator family fails to commute.
    """
    family, d_side, d_other = _block_family(rho, side)
    result = simultaneous_diagonalize(list(family), tol=tol)
    if result.basis is None:
        return ClassicalStructure(
            side=side.upper(), basis=None, probabilities=None, blocks=None, witness=result.witness
        )
    u = result.basis
    # block k on the other side: M_k[m, n] = <u_k| D_(m,n) |u_k>
    grid = family.reshape(d_other, d_other, d_side, d_side)
    blocks_raw = np.einsum("mnbc,bk,ck->kmn", grid, np.conj(u), u)
    probs = np.real(np.einsum("kmm->k", blocks_raw))
    states: list[QuantumState | None] = []
    for p_k, m_k in zip(probs, blocks_raw):
        if p_k > _ZERO_PROB:
            states.append(QuantumState(m_k / p_k, (d_other,)))
        else:
            states.append(None)
    return ClassicalStructure(
        side=side.upper(),
        basis=u,
        probabilities=probs,
        blocks=tuple(states),
        witness=result.witness,
    )


def classify_state(rho: QuantumState, tol: float | None = None) -> str:
    """Correlation class of a bipartite state.

    Returns one of ``"CC"`` (classical on both sides), ``"QC-only"``
    (classical on B only), ``"CQ-only"`` (classical on A only), or
    ``"neither"``.
    """
    on_b = classical_side_basis(rho, "B", tol)
    on_a = classical_side_basis(rho, "A", tol)
    if on_a and on_b:
        return "CC"
    if on_b:
        return "QC-only"
    if on_a:
        return "CQ-only"
    return "neither"


def qc_type_extract(channel: ChoiChannel, tol: float | None = None) -> MeasurementMap | None:
    """Recover the measure-and-prepare form of a channel, if it has one.

    A channel is of measure-and-prepare type exactly when its Choi state is
    classical on the output side; the pointer basis becomes the prepared
    basis and the effects are ``E_k = d_in * M_k^T`` from the Choi blocks.
    Returns None when the Choi state is not classical on B.
    """
    structure = classical_side_basis(channel.choi, "B", tol)
    if not structure:
        return None
    d_in = channel.d_in
    effects = []
    for p_k, sigma in zip(structure.probabilities, structure.blocks):
        if sigma is None:
            effects.append(np.zeros((d_in, d_in), dtype=np.complex128))
        else:
            block = p_k * sigma.matrix
            effects.append(d_in * block.T)
    return MeasurementMap(tuple(effects), structure.basis)


@dataclass(frozen=True)
class CCChannelData:
    """Fully classical channel: commuting effects over a shared eigenbasis.

    ``eigenbasis`` columns diagonalize every effect; ``transition`` is the
    column-stochastic table ``P[j, i] = <v_i| E_j |v_i>`` (outcome ``j``
    given preparation ``v_i``); ``joint_probs[i, j] = P[j, i] / d`` is the
    associated joint distribution, whose rows each sum to ``1/d``.
    """

    measurement: MeasurementMap
    eigenbasis: np.ndarray
    transition: StochasticMatrix
    joint_probs: np.ndarray

    def __post_init__(self):
        d = self.measurement.d_in
        n = self.measurement.n_outcomes
        if self.eigenbasis.shape != (d, d):
            raise ValueError("eigenbasis shape does not match the input dimension")
        if self.transition.matrix.shape != (n, d):
            raise ValueError("transition shape does not match outcomes by dimension")
        if self.joint_probs.shape != (d, n):
            raise ValueError("joint probability shape must be dimension by outcomes")


def cc_type_extract(channel: ChoiChannel, tol: float | None = None) -> CCChannelData | None:
    """Recover commuting-channel data, or None when the channel is not CC.

    Requires the Choi state to be classical on both sides; equivalently the
    extracted effects must commute pairwise so a shared eigenbasis exists.
    """
    mm = qc_type_extract(channel, tol)
    if mm is None:
        return None
    joint = simultaneous_diagonalize(list(mm.povm), tol=tol)
    if joint.basis is None:
        return None
    v = joint.basis
    d = mm.d_in
    n = mm.n_outcomes
    table = np.zeros((n, d))
    for j, e in enumerate(mm.povm):
        for i in range(d):
            col = v[:, i]
            table[j, i] = float(np.real(np.vdot(col, e @ col)))
    # reconstruction check: effects must be diagonal in the shared basis
    worst = 0.0
    for j, e in enumerate(mm.povm):
        rebuilt = (v * table[j, :]) @ dagger(v)
        worst = max(worst, frobenius(rebuilt - e))
    if worst > 1e-9 * max(1.0, np.sqrt(d)):
        return None
    return CCChannelData(
        measurement=mm,
        eigenbasis=v,
        transition=StochasticMatrix(table),
        joint_probs=table.T / d,
    )


@dataclass(frozen=True)
class ResidualDecomposition:
    """Steered ensemble on A induced by measuring B.

    ``raw_blocks[k] = Tr_B[rho (1 (x) E_k)]`` are unnormalized;
    ``probabilities[k]`` are their traces and ``states[k]`` the normalized
    residuals (None where the probability vanishes). ``output_state()``
    reassembles ``(1 (x) L)(rho)`` exactly from the raw blocks.
    """

    probabilities: np.ndarray
    states: tuple[QuantumState | None, ...]
    raw_blocks: tuple[np.ndarray, ...]
    pointer_basis: np.ndarray

    def output_state(self) -> QuantumState:
        d_a = self.raw_blocks[0].shape[0]
        d_out = self.pointer_basis.shape[0]
        out = np.zeros((d_a * d_out, d_a * d_out), dtype=np.complex128)
        for block, col in zip(self.raw_blocks, self.pointer_basis.T):
            out += np.kron(block, np.outer(col, np.conj(col)))
        return QuantumState(out, (d_a, d_out))


def residual_decomposition(mm: MeasurementMap, rho_ab: QuantumState) -> ResidualDecomposition:
    """Decompose a bipartite state into residuals steered by the map's POVM."""
    if rho_ab.n_factors != 2:
        raise ValueError("expected a bipartite state")
    d_a, d_b = rho_ab.dims
    if d_b != mm.d_in:
        raise ValueError(f"factor B has dimension {d_b}, the map expects {mm.d_in}")
    r4 = rho_ab.matrix.reshape(d_a, d_b, d_a, d_b)
    raw = []
    probs = []
    states: list[QuantumState | None] = []
    for e in mm.povm:
        block = np.einsum("mbnc,cb->mn", r4, e)
        block = (block + dagger(block)) / 2.0
        p = float(np.real(np.trace(block)))
        raw.append(block)
        probs.append(p)
        states.append(QuantumState(block / p, (d_a,)) if p > _ZERO_PROB else None)
    return ResidualDecomposition(
        probabilities=np.array(probs),
        states=tuple(states),
        raw_blocks=tuple(raw),
        pointer_basis=mm.pointer_basis,
    )


@dataclass(frozen=True)
class CcMembership:
    """Whether a state's steered residuals pairwise commute, with witness."""

    member: bool
    witness: float

    def __bool__(self) -> bool:
        return self.member


def in_cc_set(mm: MeasurementMap, rho_ab: QuantumState, tol: float | None = None) -> CcMembership:
    """Membership of ``rho_ab`` in the set of states whose output under
    ``1 (x) L`` is fully classical: all normalized residuals must commute."""
    if tol is None:
        tol = DEFAULT_TOL
    decomp = residual_decomposition(mm, rho_ab)
    live = [s.matrix for s in decomp.states if s is not None]
    witness = 0.0
    for i in range(len(live)):
        for j in range(i + 1, len(live)):
            witness = max(witness, commutator_norm(live[i], live[j]))
    return CcMembership(member=witness <= tol, witness=witness)


def star_mix(rho_ab: QuantumState, lam: float) -> QuantumState:
    """Convex path ``lam * rho + (1 - lam) * 1/D`` toward the maximally mixed state."""
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError("mixing parameter must lie in [0, 1]")
    mixed = maximally_mixed(rho_ab.dims)
    return QuantumState(lam * rho_ab.matrix + (1.0 - lam) * mixed.matrix, rho_ab.dims)


def schmidt_state(coefficients, basis_a, basis_b) -> QuantumState:
    """Pure state ``sum_i c_i |a_i>|b_i>`` from matched orthonormal columns.

    Coefficients must be nonnegative reals with unit square sum; the bases
    must have one column per coefficient.
    """
    c = np.asarray(coefficients, dtype=float).reshape(-1)
    if float(np.min(c)) < -1e-12:
        raise ValueError("Schmidt coefficients must be nonnegative")
    if abs(float(np.sum(c * c)) - 1.0) > 1e-10:
        raise ValueError("Schmidt coefficients must have unit square sum")
    a = as_cmatrix(basis_a, name="basis_a")
    b = as_cmatrix(basis_b, name="basis_b")
    if a.shape[1] != len(c) or b.shape[1] != len(c):
        raise ValueError("need one basis column per coefficient")
    for m, label in ((a, "basis_a"), (b, "basis_b")):
        gram = dagger(m) @ m
        if np.linalg.norm(gram - np.eye(m.shape[1])) > 1e-10 * np.sqrt(m.shape[1]):
            raise ValueError(f"{label} columns are not orthonormal within 1e-10")
    psi = np.zeros(a.shape[0] * b.shape[0], dtype=np.complex128)
    for ci, a_col, b_col in zip(c, a.T, b.T):
        psi += ci * np.kron(a_col, b_col)
    return QuantumState.from_vector(psi, (a.shape[0], b.shape[0]))


@dataclass(frozen=True)
class MultipartiteReport:
    """Joint-versus-marginal classicality of a tripartite ``(A, B, B')`` state."""

    joint_classical: bool
    joint_basis: np.ndarray | None
    joint_witness: float
    schmidt_ranks: tuple[int, ...] | None
    joint_basis_product: bool | None
    reduction_ab: str
    reduction_abp: str


def multipartite_qc_check(rho: QuantumState, tol: float | None = None) -> MultipartiteReport:
    """Check classicality of ``rho`` on the joint ``BB'`` side and on each
    single-B reduction, reporting the Schmidt ranks of the joint pointer
    basis (a rank above one on every vector certifies a non-product basis).
    """
    if rho.n_factors != 3:
        raise ValueError("expected a tripartite state with dims (A, B, B')")
    d_a, d_b, d_bp = rho.dims
    joint_view = QuantumState(rho.matrix, (d_a, d_b * d_bp))
    joint = classical_side_basis(joint_view, "B", tol)
    ranks: tuple[int, ...] | None = None
    product: bool | None = None
    if joint:
        rank_list = []
        for col in joint.basis.T:
            svals = np.linalg.svd(col.reshape(d_b, d_bp), compute_uv=False)
            rank_list.append(int(np.sum(svals > 1e-10)))
        ranks = tuple(rank_list)
        product = all(r == 1 for r in rank_list)
    return MultipartiteReport(
        joint_classical=bool(joint),
        joint_basis=joint.basis,
        joint_witness=joint.witness,
        schmidt_ranks=ranks,
        joint_basis_product=product,
        reduction_ab=classify_state(rho.marginal((0, 1)), tol),
        reduction_abp=classify_state(rho.marginal((0, 2)), tol),
    )
