"""Multi-copy behavior of measure-and-prepare channels.

The N-copy extension of ``L(rho) = sum_i Tr(rho E_i) |e_i><e_i|`` prepares
``|e_i><e_i|^(x N)`` instead of a single pointer state. States diagonal in
a preparation basis with stationary weights of the associated transition
table survive this map in every single-copy reduction; whether they also
equal the reduction exactly (full broadcast) or only in spectrum depends
on the basis being the channel's own pointer basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import ChoiChannel, apply_one_sided
from .errors import ChannelTypeError, MemoryCapError
from .linalg import as_cmatrix, frobenius
from .markov import (
    StationaryAnalysis,
    StochasticMatrix,
    block_decompose,
    ergodic_limit,
    stationary_simplex,
    transition_matrix,
)
from .measurement import MeasurementMap
from .states import QuantumState
from .structure import classify_state, qc_type_extract

__all__ = [
    "BroadcastChannel",
    "BroadcastReport",
    "BroadcastableStates",
    "ErgodicChannelLimit",
    "LocalBroadcastReport",
    "TwoChannelReport",
    "broadcast_channel",
    "broadcastable_states",
    "correlation_family",
    "ergodic_channel_limit",
    "is_product_basis",
    "product_transition",
    "two_channel_cc_corollary_check",
    "verify_full_broadcast",
    "verify_local_broadcast",
    "verify_spectrum_broadcast",
]

DEFAULT_MEMORY_CAP = 256


def _check_cap(d_out: int, copies: int, cap: int) -> int:
    required = d_out**copies
    if required > cap:
        raise MemoryCapError(
            f"dense {copies}-copy output needs dimension {required} > cap {cap}",
            required=required,
            cap=cap,
        )
    return required


@dataclass(frozen=True)
class BroadcastChannel:
    """The N-copy extension of a measure-and-prepare map.

    ``apply`` materializes the dense N-copy output (guarded by ``cap`` on
    the output dimension ``d_out**copies``); ``reduction`` computes any
    single-copy marginal directly without the dense join.
    """

    base: MeasurementMap
    copies: int
    cap: int = DEFAULT_MEMORY_CAP

    def __post_init__(self):
        if int(self.copies) < 1:
            raise ValueError("copies must be a positive integer")
        object.__setattr__(self, "copies", int(self.copies))
        _check_cap(self.base.d_out, self.copies, self.cap)

    @property
    def output_dims(self) -> tuple[int, ...]:
        return (self.base.d_out,) * self.copies

    def _copied_kets(self) -> list[np.ndarray]:
        kets = []
        for col in self.base.pointer_basis.T:
            v = col
            for _ in range(self.copies - 1):
                v = np.kron(v, col)
            kets.append(v)
        return kets

    def apply(self, rho) -> QuantumState:
        q = self.base.probabilities(rho)
        dim = self.base.d_out**self.copies
        out = np.zeros((dim, dim), dtype=np.complex128)
        for qi, ket in zip(q, self._copied_kets()):
            out += qi * np.outer(ket, np.conj(ket))
        return QuantumState(out, self.output_dims)

    def reduction(self, rho, copy_index: int = 0) -> QuantumState:
        """Single-copy marginal of the N-copy output (identical for every copy)."""
        if not 0 <= int(copy_index) < self.copies:
            raise ValueError(f"copy index {copy_index} out of range")
        q = self.base.probabilities(rho)
        d = self.base.d_out
        out = np.zeros((d, d), dtype=np.complex128)
        for qi, col in zip(q, self.base.pointer_basis.T):
            out += qi * np.outer(col, np.conj(col))
        return QuantumState(out, (d,))

    def choi(self) -> ChoiChannel:
        d_in = self.base.d_in
        dim = d_in * self.base.d_out**self.copies
        w = np.zeros((dim, dim), dtype=np.complex128)
        for e, ket in zip(self.base.povm, self._copied_kets()):
            w += np.kron(e.T, np.outer(ket, np.conj(ket)))
        return ChoiChannel(QuantumState(w / d_in, (d_in, self.base.d_out**self.copies)))


def broadcast_channel(mm: MeasurementMap, copies: int, cap: int = DEFAULT_MEMORY_CAP) -> BroadcastChannel:
    """Construct the N-copy extension, enforcing the dense-size cap."""
    return BroadcastChannel(base=mm, copies=copies, cap=cap)


@dataclass(frozen=True)
class BroadcastableStates:
    """Stationary preparation-diagonal states of a square map in one basis.

    One state per recurrent block of the transition table; every convex
    combination (``mix``) is again stationary, so the family is a simplex
    of dimension ``degeneracy - 1``.
    """

    analysis: StationaryAnalysis
    basis: np.ndarray
    states: tuple[QuantumState, ...]

    @property
    def degeneracy(self) -> int:
        return self.analysis.degeneracy

    def mix(self, weights) -> QuantumState:
        v = stationary_simplex(self.analysis, weights)
        return _diagonal_state(v, self.basis)


def _diagonal_state(weights: np.ndarray, basis: np.ndarray) -> QuantumState:
    d = basis.shape[0]
    out = np.zeros((d, d), dtype=np.complex128)
    for w, col in zip(weights, basis.T):
        out += w * np.outer(col, np.conj(col))
    return QuantumState(out, (d,))


def broadcastable_states(mm: MeasurementMap, basis=None) -> BroadcastableStates:
    """Stationary states of a square map, diagonal in the given basis.

    ``basis`` defaults to the channel's pointer basis. The transition table
    ``P[i, j] = <phi_j| E_i |phi_j>`` must be square (one outcome per basis
    vector); each recurrent block contributes the state
    ``sum_j v_j |phi_j><phi_j|`` built from its stationary vector.
    """
    if not mm.is_square:
        raise ValueError("broadcastable states require d_out == d_in")
    if basis is None:
        basis = mm.pointer_basis
    basis = as_cmatrix(basis, name="basis")
    if basis.shape[0] != mm.d_in:
        raise ValueError("basis does not act on the channel input space")
    table = transition_matrix(mm.povm, basis)
    if not table.is_square:
        raise ValueError("transition table is not square; outcome count must match basis size")
    analysis = block_decompose(table)
    states = tuple(_diagonal_state(v, basis) for v in analysis.perron_vectors)
    return BroadcastableStates(analysis=analysis, basis=basis, states=states)


@dataclass(frozen=True)
class BroadcastReport:
    """Per-copy reduction distances for one input state."""

    mode: str
    copies: int
    state: QuantumState
    reduction: QuantumState
    distances: tuple[float, ...]
    fixed_point_residual: float
    tolerance: float
    passed: bool


def _spectral_distance(a: QuantumState, b: QuantumState) -> float:
    sa = a.spectrum()
    sb = b.spectrum()
    n = max(len(sa), len(sb))
    pa = np.zeros(n)
    pb = np.zeros(n)
    pa[: len(sa)] = sa
    pb[: len(sb)] = sb
    return 0.5 * float(np.abs(pa - pb).sum())


def _verify_broadcast(
    mm: MeasurementMap, copies: int, state: QuantumState, mode: str, tol: float, cap: int
) -> BroadcastReport:
    if not mm.is_square:
        raise ValueError("broadcast verification requires d_out == d_in")
    if state.dim != mm.d_in:
        raise ValueError("state does not live on the channel input space")
    bc = broadcast_channel(mm, copies, cap)
    reduction = bc.reduction(state)
    residual = frobenius(mm.apply(state).matrix - state.matrix)
    if mode == "spectrum":
        dist = _spectral_distance(reduction, state)
        passed = dist <= tol
    else:
        dist = frobenius(reduction.matrix - state.matrix)
        passed = dist <= tol and residual <= tol
    return BroadcastReport(
        mode=mode,
        copies=copies,
        state=state,
        reduction=reduction,
        distances=(dist,) * copies,
        fixed_point_residual=residual,
        tolerance=tol,
        passed=bool(passed),
    )


def verify_spectrum_broadcast(
    mm: MeasurementMap,
    copies: int,
    state: QuantumState,
    tol: float = 1e-9,
    cap: int = DEFAULT_MEMORY_CAP,
) -> BroadcastReport:
    """Check that every single-copy reduction matches the input's spectrum."""
    return _verify_broadcast(mm, copies, state, "spectrum", tol, cap)


def verify_full_broadcast(
    mm: MeasurementMap,
    copies: int,
    state: QuantumState,
    tol: float = 1e-9,
    cap: int = DEFAULT_MEMORY_CAP,
) -> BroadcastReport:
    """Check that every single-copy reduction equals the input state, which
    then must also be a fixed point of the one-copy map."""
    return _verify_broadcast(mm, copies, state, "full", tol, cap)


@dataclass(frozen=True)
class ErgodicChannelLimit:
    """Constant channel reached by iterating a primitive square map."""

    channel: ChoiChannel
    fixed_state: QuantumState
    transition_limit: np.ndarray
    r_converged: int


def ergodic_channel_limit(mm: MeasurementMap, threshold: float = 1e-10) -> ErgodicChannelLimit:
    """Limit of channel powers when the pointer transition is primitive.

    The limit sends every input to the unique stationary pointer-diagonal
    state; its Choi state is ``(1/d) (x) rho_*``. Raises NotPrimitiveError
    (reason ``"periodic"`` or ``"reducible"``) when no limit exists.
    """
    if not mm.is_square:
        raise ValueError("ergodic limits require d_out == d_in")
    lim = ergodic_limit(mm.pointer_transition(), threshold=threshold)
    fixed = _diagonal_state(lim.perron, mm.pointer_basis)
    d = mm.d_in
    w = np.kron(np.eye(d) / d, fixed.matrix)
    channel = ChoiChannel(QuantumState(w, (d, d)))
    return ErgodicChannelLimit(
        channel=channel,
        fixed_state=fixed,
        transition_limit=lim.matrix,
        r_converged=lim.r_converged,
    )


def correlation_family(
    states_a: Sequence[QuantumState], states_b: Sequence[QuantumState], pi
) -> QuantumState:
    """Mixture ``sum_mn pi[m, n] a_m (x) b_n`` over two stationary families.

    ``pi`` must be a joint probability table with one row per A-state and
    one column per B-state.
    """
    p = np.asarray(pi, dtype=float)
    if p.ndim != 2 or p.shape != (len(states_a), len(states_b)):
        raise ValueError("pi shape must be (len(states_a), len(states_b))")
    if float(np.min(p)) < -1e-12 or abs(float(p.sum()) - 1.0) > 1e-10:
        raise ValueError("pi must be a joint probability table")
    d_a = states_a[0].dim
    d_b = states_b[0].dim
    out = np.zeros((d_a * d_b, d_a * d_b), dtype=np.complex128)
    for m, a in enumerate(states_a):
        for n, b in enumerate(states_b):
            if p[m, n] != 0.0:
                out += p[m, n] * np.kron(a.matrix, b.matrix)
    return QuantumState(out, (d_a, d_b))


@dataclass(frozen=True)
class LocalBroadcastReport:
    """Paired-reduction distances for the two-sided N-copy extension."""

    mode: str
    copies: int
    state: QuantumState
    paired_reduction: QuantumState
    joint_distribution: np.ndarray
    distances: tuple[float, ...]
    fixed_point_residual: float
    tolerance: float
    passed: bool


def _joint_distribution(
    mm_a: MeasurementMap, mm_b: MeasurementMap, rho_ab: QuantumState
) -> np.ndarray:
    d_a, d_b = rho_ab.dims
    r4 = rho_ab.matrix.reshape(d_a, d_b, d_a, d_b)
    ea = np.stack(mm_a.povm)
    eb = np.stack(mm_b.povm)
    q = np.einsum("abcd,ica,jdb->ij", r4, ea, eb)
    return np.real(q)


def verify_local_broadcast(
    mm_a: MeasurementMap,
    mm_b: MeasurementMap,
    copies: int,
    rho_ab: QuantumState,
    mode: str = "full",
    tol: float = 1e-9,
    cap: int = DEFAULT_MEMORY_CAP,
) -> LocalBroadcastReport:
    """Check paired reductions of ``(L_A (x) L_B)^(N copies each)`` against the input.

    Every paired single-copy reduction ``(A_r, B_r)`` of the two-sided
    N-copy output equals ``sum_ij q_ij |e_i f_j><e_i f_j|`` with
    ``q_ij = Tr[rho (E_i (x) F_j)]``; full mode compares it to the input in
    Frobenius distance, spectrum mode compares eigenvalue lists.
    """
    if mode not in ("full", "spectrum"):
        raise ValueError(f"mode must be 'full' or 'spectrum', got {mode!r}")
    if not (mm_a.is_square and mm_b.is_square):
        raise ValueError("local broadcast verification requires square maps")
    if rho_ab.n_factors != 2 or rho_ab.dims != (mm_a.d_in, mm_b.d_in):
        raise ValueError("state dims do not match the channel pair")
    if int(copies) < 1:
        raise ValueError("copies must be a positive integer")
    _check_cap(mm_a.d_out, copies, cap)
    _check_cap(mm_b.d_out, copies, cap)
    q = _joint_distribution(mm_a, mm_b, rho_ab)
    d_a, d_b = mm_a.d_out, mm_b.d_out
    paired = np.zeros((d_a * d_b, d_a * d_b), dtype=np.complex128)
    for i, col_a in enumerate(mm_a.pointer_basis.T):
        proj_a = np.outer(col_a, np.conj(col_a))
        for j, col_b in enumerate(mm_b.pointer_basis.T):
            proj_b = np.outer(col_b, np.conj(col_b))
            paired += q[i, j] * np.kron(proj_a, proj_b)
    paired_state = QuantumState(paired, (d_a, d_b))
    residual = frobenius(paired - rho_ab.matrix)
    if mode == "spectrum":
        dist = _spectral_distance(paired_state, rho_ab)
        passed = dist <= tol
    else:
        dist = residual
        passed = dist <= tol
    return LocalBroadcastReport(
        mode=mode,
        copies=int(copies),
        state=rho_ab,
        paired_reduction=paired_state,
        joint_distribution=q,
        distances=(dist,) * int(copies),
        fixed_point_residual=residual,
        tolerance=tol,
        passed=bool(passed),
    )


def is_product_basis(basis, dims: tuple[int, int], tol: float = 1e-10) -> bool:
    """True when every column factorizes across ``dims`` (Schmidt rank one)."""
    b = as_cmatrix(basis, name="basis")
    d_a, d_b = dims
    if b.shape[0] != d_a * d_b:
        raise ValueError("basis does not act on the product space")
    for col in b.T:
        svals = np.linalg.svd(col.reshape(d_a, d_b), compute_uv=False)
        if int(np.sum(svals > tol)) != 1:
            return False
    return True


def product_transition(mm_a: MeasurementMap, mm_b: MeasurementMap, basis_ab) -> StochasticMatrix:
    """Transition table of ``L_A (x) L_B`` in a basis of the joint input space.

    Rows are outcome pairs ``(i, j)`` flattened row-major; for a product
    basis ``U_A (x) U_B`` the table factorizes as the Kronecker product of
    the one-sided tables.
    """
    effects = []
    for e_a in mm_a.povm:
        for e_b in mm_b.povm:
            effects.append(np.kron(e_a, e_b))
    return transition_matrix(effects, basis_ab)


@dataclass(frozen=True)
class TwoChannelReport:
    """Outcome of the always-classical check for a product of two maps."""

    samples: int
    max_deviation: float
    all_cc: bool
    tolerance: float
    passed: bool


def two_channel_cc_corollary_check(
    ch_a: ChoiChannel,
    ch_b: ChoiChannel,
    samples: int = 50,
    seed: int = 0,
    tol: float = 1e-9,
) -> TwoChannelReport:
    """Verify that two one-sided measure-and-prepare maps always produce a
    fully classical joint output.

    For random bipartite inputs the direct two-sided application must match
    ``sum_ij Tr[rho (E_i (x) F_j)] |e_i f_j><e_i f_j|`` within ``tol`` and
    classify as CC. Raises ChannelTypeError when either channel is not of
    measure-and-prepare type.
    """
    from .sampling import random_state

    mm_a = qc_type_extract(ch_a)
    if mm_a is None:
        raise ChannelTypeError("channel A is not of measure-and-prepare type")
    mm_b = qc_type_extract(ch_b)
    if mm_b is None:
        raise ChannelTypeError("channel B is not of measure-and-prepare type")
    rng = np.random.default_rng(seed)
    max_dev = 0.0
    all_cc = True
    for _ in range(int(samples)):
        rho = random_state((mm_a.d_in, mm_b.d_in), rng)
        half = apply_one_sided(ch_a, rho, side="A")
        direct = apply_one_sided(ch_b, half, side="B")
        q = _joint_distribution(mm_a, mm_b, rho)
        built = np.zeros_like(direct.matrix)
        for i, col_a in enumerate(mm_a.pointer_basis.T):
            proj_a = np.outer(col_a, np.conj(col_a))
            for j, col_b in enumerate(mm_b.pointer_basis.T):
                built += q[i, j] * np.kron(proj_a, np.outer(col_b, np.conj(col_b)))
        max_dev = max(max_dev, frobenius(direct.matrix - built))
        if classify_state(direct) != "CC":
            all_cc = False
    passed = all_cc and max_dev <= tol
    return TwoChannelReport(
        samples=int(samples),
        max_deviation=max_dev,
        all_cc=all_cc,
        tolerance=tol,
        passed=bool(passed),
    )
