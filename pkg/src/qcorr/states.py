"""Density operators on finite tensor-product spaces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .linalg import as_cmatrix, dagger, frobenius, partial_trace

__all__ = [
    "QuantumState",
    "maximally_entangled",
    "maximally_mixed",
]

HERMITIAN_ATOL = 1e-10
PSD_ATOL = 1e-10
TRACE_ATOL = 1e-10


@dataclass(frozen=True)
class QuantumState:
    """Trace-one positive semidefinite operator with a factor structure.

    ``dims`` records the tensor factorization ``(d_1, ..., d_k)``; the
    matrix acts on the product space in row-major order (factor 0 is the
    slowest index). Construction validates Hermiticity, unit trace, and
    positivity, then stores a Hermitized read-only copy.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims_in = self.dims if isinstance(self.dims, (tuple, list)) else (self.dims,)
        dims = tuple(int(d) for d in dims_in)
        if not dims or any(d <= 0 for d in dims):
            raise ValueError(f"factor dimensions must be positive, got {dims}")
        m = as_cmatrix(self.matrix, name="state matrix")
        total = int(np.prod(dims))
        if m.shape != (total, total):
            raise ValueError(f"state matrix shape {m.shape} does not match dims {dims}")
        if frobenius(m - dagger(m)) > HERMITIAN_ATOL * max(1.0, frobenius(m)):
            raise ValueError("state matrix is not Hermitian within 1e-10")
        m = (m + dagger(m)) / 2.0
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > TRACE_ATOL:
            raise ValueError(f"state trace {trace:.12g} differs from one")
        smallest = float(np.linalg.eigvalsh(m)[0])
        if smallest < -PSD_ATOL:
            raise ValueError(f"state has negative eigenvalue {smallest:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_factors(self) -> int:
        return len(self.dims)

    def marginal(self, keep: Iterable[int]) -> "QuantumState":
        """Reduced state on the factors listed in ``keep``."""
        keep = tuple(sorted(set(int(i) for i in keep)))
        reduced = partial_trace(self.matrix, self.dims, keep)
        return QuantumState(reduced, tuple(self.dims[i] for i in keep))

    def spectrum(self) -> np.ndarray:
        """Eigenvalues in descending order."""
        return np.linalg.eigvalsh(self.matrix)[::-1]

    @classmethod
    def from_vector(cls, vec, dims: Sequence[int] | int) -> "QuantumState":
        v = np.asarray(vec, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state vector norm {norm:.12g} differs from one")
        dims = (dims,) if isinstance(dims, (int, np.integer)) else tuple(dims)
        return cls(np.outer(v, np.conj(v)), dims)


def maximally_mixed(dims: Sequence[int] | int) -> QuantumState:
    dims = (dims,) if isinstance(dims, (int, np.integer)) else tuple(int(d) for d in dims)
    total = int(np.prod(dims))
    return QuantumState(np.eye(total) / total, dims)


def maximally_entangled(d: int) -> QuantumState:
    """Projector onto ``sum_i |ii> / sqrt(d)`` with dims ``(d, d)``."""
    d = int(d)
    if d <= 0:
        raise ValueError("dimension must be positive")
    psi = np.zeros(d * d, dtype=np.complex128)
    for i in range(d):
        psi[i * d + i] = 1.0
    psi /= np.sqrt(d)
    return QuantumState.from_vector(psi, (d, d))
