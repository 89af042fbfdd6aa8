"""Quantum channels in the Choi form, with Kraus extraction and application.

The Choi state of a channel ``L`` from dimension ``d_in`` to ``d_out`` is
``W = (1 (x) L)(P_+)`` where ``P_+`` is the maximally entangled state on
``d_in (x) d_in``; it is normalized to unit trace and carries the factor
structure ``(d_in, d_out)``. Channel action is recovered by

    L(A) = d_in * Tr_in[ W (A^T (x) 1) ]

with transposition taken in the computational basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .linalg import as_cmatrix, dagger, frobenius, hermitian_eig, partial_trace
from .measurement import MeasurementMap
from .states import QuantumState, maximally_entangled

__all__ = [
    "ChoiChannel",
    "KrausSet",
    "apply",
    "apply_one_sided",
    "channel_power",
    "kraus_from_choi",
]

_TP_ATOL = 1e-9


@dataclass(frozen=True)
class KrausSet:
    """Kraus operators ``K_m`` (shape ``d_out x d_in``) with completeness check."""

    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(as_cmatrix(k, name="Kraus operator") for k in self.operators)
        if not ops:
            raise ValueError("Kraus set must have at least one operator")
        shape = ops[0].shape
        for k in ops:
            if k.shape != shape:
                raise ValueError("Kraus operators must share one shape")
        d_in = shape[1]
        total = sum(dagger(k) @ k for k in ops)
        if frobenius(total - np.eye(d_in)) > _TP_ATOL * np.sqrt(d_in):
            raise ValueError("Kraus operators do not satisfy completeness within 1e-9")
        ops = tuple(k.copy() for k in ops)
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @property
    def d_in(self) -> int:
        return self.operators[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.operators[0].shape[0]


@dataclass(frozen=True)
class ChoiChannel:
    """A channel represented by its trace-one Choi state on ``(d_in, d_out)``."""

    choi: QuantumState

    def __post_init__(self):
        if not isinstance(self.choi, QuantumState):
            raise TypeError("choi must be a QuantumState")
        if self.choi.n_factors != 2:
            raise ValueError("Choi state must be bipartite with dims (d_in, d_out)")
        d_in = self.choi.dims[0]
        marginal = partial_trace(self.choi.matrix, self.choi.dims, keep=(0,))
        if frobenius(marginal - np.eye(d_in) / d_in) > _TP_ATOL:
            raise ValueError("channel is not trace preserving: Tr_out(W) != 1/d_in")

    @property
    def d_in(self) -> int:
        return self.choi.dims[0]

    @property
    def d_out(self) -> int:
        return self.choi.dims[1]

    @cached_property
    def _kraus(self) -> KrausSet:
        return kraus_from_choi(self)

    @classmethod
    def from_kraus(cls, operators: Sequence[np.ndarray] | KrausSet) -> "ChoiChannel":
        ks = operators if isinstance(operators, KrausSet) else KrausSet(tuple(operators))
        d_in = ks.d_in
        dim = d_in * ks.d_out
        w = np.zeros((dim, dim), dtype=np.complex128)
        for k in ks.operators:
            # (1 (x) K) |psi_+> has components (i, a) -> K[a, i] / sqrt(d_in)
            v = k.T.reshape(-1) / np.sqrt(d_in)
            w += np.outer(v, np.conj(v))
        return cls(QuantumState(w, (d_in, ks.d_out)))

    @classmethod
    def from_measurement_map(cls, mm: MeasurementMap) -> "ChoiChannel":
        return cls(QuantumState(mm.choi_matrix(), (mm.d_in, mm.d_out)))

    @classmethod
    def identity(cls, d: int) -> "ChoiChannel":
        return cls(maximally_entangled(d))


def apply(channel: ChoiChannel, rho) -> QuantumState:
    """Apply the channel to a state on its input space."""
    mat = rho.matrix if isinstance(rho, QuantumState) else as_cmatrix(rho)
    d_in, d_out = channel.d_in, channel.d_out
    if mat.shape != (d_in, d_in):
        raise ValueError(f"input shape {mat.shape} does not match d_in={d_in}")
    sandwich = channel.choi.matrix @ np.kron(mat.T, np.eye(d_out))
    out = d_in * partial_trace(sandwich, (d_in, d_out), keep=(1,))
    return QuantumState((out + dagger(out)) / 2.0, (d_out,))


def apply_one_sided(channel: ChoiChannel, rho_ab: QuantumState, side: str = "B") -> QuantumState:
    """Apply the channel to one factor of a bipartite state.

    ``side='B'`` computes ``(1 (x) L)(rho)``; ``side='A'`` computes
    ``(L (x) 1)(rho)``. Uses the Kraus form of the channel.
    """
    if not isinstance(rho_ab, QuantumState) or rho_ab.n_factors != 2:
        raise ValueError("expected a bipartite QuantumState")
    side = side.upper()
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    d_a, d_b = rho_ab.dims
    target = d_a if side == "A" else d_b
    if target != channel.d_in:
        raise ValueError(f"factor {side} has dimension {target}, channel expects {channel.d_in}")
    out_dims = (channel.d_out, d_b) if side == "A" else (d_a, channel.d_out)
    total = out_dims[0] * out_dims[1]
    out = np.zeros((total, total), dtype=np.complex128)
    for k in channel._kraus.operators:
        lifted = np.kron(k, np.eye(d_b)) if side == "A" else np.kron(np.eye(d_a), k)
        out += lifted @ rho_ab.matrix @ dagger(lifted)
    return QuantumState((out + dagger(out)) / 2.0, out_dims)


def kraus_from_choi(channel: ChoiChannel, cutoff: float = 1e-12) -> KrausSet:
    """Extract Kraus operators from the Choi state.

    Eigenvectors of ``d_in * W`` with eigenvalue above ``cutoff`` become
    operators via the inverse of the vectorization used in ``from_kraus``.
    """
    d_in, d_out = channel.d_in, channel.d_out
    es = hermitian_eig(channel.choi.matrix * d_in)
    ops = []
    for value, vec in zip(es.eigenvalues, es.eigenvectors.T):
        if value > cutoff:
            ops.append(np.sqrt(value) * vec.reshape(d_in, d_out).T)
    if not ops:
        raise ValueError("Choi state has no eigenvalue above the cutoff")
    return KrausSet(tuple(ops))


def channel_power(mm: MeasurementMap, r: int) -> ChoiChannel:
    """Choi state of the r-fold composition of a square measure-and-prepare map.

    Composition acts on outcome distributions through the pointer
    transition matrix: the r-th power measures the POVM
    ``F_i = sum_j (P^(r-1))[i, j] E_j`` and prepares the same pointer states.
    """
    r = int(r)
    if r < 1:
        raise ValueError("power must be a positive integer")
    if not mm.is_square:
        raise ValueError("channel powers require d_out == d_in")
    p = mm.pointer_transition()
    q = np.linalg.matrix_power(p, r - 1)
    effects = []
    for i in range(mm.n_outcomes):
        f = np.zeros((mm.d_in, mm.d_in), dtype=np.complex128)
        for j, e in enumerate(mm.povm):
            f += q[i, j] * e
        effects.append(f)
    powered = MeasurementMap(tuple(effects), mm.pointer_basis)
    return ChoiChannel.from_measurement_map(powered)
