"""Measure-and-prepare channels: a POVM feeding an orthonormal pointer basis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import as_cmatrix, dagger, frobenius
from .states import QuantumState

__all__ = ["MeasurementMap"]

_PSD_ATOL = 1e-10
_HERM_ATOL = 1e-10
_COMPLETENESS_ATOL = 1e-9
_ORTHO_ATOL = 1e-10


@dataclass(frozen=True)
class MeasurementMap:
    """The channel ``rho -> sum_i Tr(rho E_i) |e_i><e_i|``.

    ``povm`` holds the effects ``E_i`` on the input space; ``pointer_basis``
    is a ``d_out x n`` matrix whose orthonormal columns receive the outcome
    probabilities. The map is completely positive and trace preserving by
    construction once the effects are positive and sum to the identity.
    """

    povm: tuple[np.ndarray, ...]
    pointer_basis: np.ndarray

    def __post_init__(self):
        effects = tuple(as_cmatrix(e, name="POVM element") for e in self.povm)
        if not effects:
            raise ValueError("POVM must have at least one element")
        d = effects[0].shape[0]
        for e in effects:
            if e.shape != (d, d):
                raise ValueError("POVM elements must be square matrices of equal dimension")
            if frobenius(e - dagger(e)) > _HERM_ATOL * max(1.0, frobenius(e)):
                raise ValueError("POVM element is not Hermitian within 1e-10")
            smallest = float(np.linalg.eigvalsh((e + dagger(e)) / 2.0)[0])
            if smallest < -_PSD_ATOL:
                raise ValueError(f"POVM element has negative eigenvalue {smallest:.3e}")
        total = sum(effects)
        if frobenius(total - np.eye(d)) > _COMPLETENESS_ATOL * np.sqrt(d):
            raise ValueError("POVM elements do not sum to the identity within 1e-9")

        pointer = as_cmatrix(self.pointer_basis, name="pointer basis")
        if pointer.shape[1] != len(effects):
            raise ValueError(
                f"pointer basis has {pointer.shape[1]} columns for {len(effects)} outcomes"
            )
        gram = dagger(pointer) @ pointer
        if frobenius(gram - np.eye(pointer.shape[1])) > _ORTHO_ATOL * np.sqrt(pointer.shape[1]):
            raise ValueError("pointer basis columns are not orthonormal within 1e-10")

        effects = tuple(e.copy() for e in effects)
        for e in effects:
            e.setflags(write=False)
        pointer = pointer.copy()
        pointer.setflags(write=False)
        object.__setattr__(self, "povm", effects)
        object.__setattr__(self, "pointer_basis", pointer)

    # -- geometry -----------------------------------------------------------

    @property
    def d_in(self) -> int:
        return self.povm[0].shape[0]

    @property
    def d_out(self) -> int:
        return self.pointer_basis.shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.povm)

    @property
    def is_square(self) -> bool:
        return self.d_in == self.d_out

    @property
    def weights(self) -> np.ndarray:
        """Choi block weights ``p_i = Tr(E_i) / d_in``."""
        return np.array([float(np.real(np.trace(e))) / self.d_in for e in self.povm])

    # -- action -------------------------------------------------------------

    def probabilities(self, rho) -> np.ndarray:
        """Outcome distribution ``Tr(rho E_i)`` for a state or raw matrix."""
        mat = rho.matrix if isinstance(rho, QuantumState) else as_cmatrix(rho)
        if mat.shape != (self.d_in, self.d_in):
            raise ValueError(f"input shape {mat.shape} does not match d_in={self.d_in}")
        return np.array([float(np.real(np.trace(mat @ e))) for e in self.povm])

    def apply(self, rho) -> QuantumState:
        q = self.probabilities(rho)
        out = np.zeros((self.d_out, self.d_out), dtype=np.complex128)
        for qi, col in zip(q, self.pointer_basis.T):
            out += qi * np.outer(col, np.conj(col))
        return QuantumState(out, (self.d_out,))

    def choi_matrix(self) -> np.ndarray:
        """Choi state ``(1/d_in) sum_i E_i^T (x) |e_i><e_i|`` as a raw matrix."""
        d_out = self.d_out
        w = np.zeros((self.d_in * d_out, self.d_in * d_out), dtype=np.complex128)
        for e, col in zip(self.povm, self.pointer_basis.T):
            w += np.kron(e.T, np.outer(col, np.conj(col)))
        return w / self.d_in

    def pointer_transition(self) -> np.ndarray:
        """Column-stochastic ``P[i, j] = <e_j| E_i |e_j>``.

        Defined when the pointer vectors live on the input space, i.e.
        ``d_out == d_in``.
        """
        if not self.is_square:
            raise ValueError("pointer transition requires d_out == d_in")
        n = self.n_outcomes
        p = np.zeros((n, n))
        for i, e in enumerate(self.povm):
            for j in range(n):
                col = self.pointer_basis[:, j]
                p[i, j] = float(np.real(np.vdot(col, e @ col)))
        return p

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_stochastic(
        cls,
        transition,
        eigenbasis: np.ndarray | None = None,
        pointer_basis: np.ndarray | None = None,
    ) -> "MeasurementMap":
        """Commuting-POVM map realizing a column-stochastic matrix.

        Row ``j`` of ``transition`` defines the effect
        ``E_j = sum_i P[j, i] |v_i><v_i|`` where ``{v_i}`` are the columns
        of ``eigenbasis`` (computational by default), so every effect is
        diagonal in that basis. With the default bases the pointer
        transition of the result is exactly ``transition``.
        """
        p = np.asarray(transition, dtype=float)
        if p.ndim != 2:
            raise ValueError("transition must be a matrix")
        n, d = p.shape
        if np.min(p) < -1e-12:
            raise ValueError("transition has negative entries")
        sums = p.sum(axis=0)
        if np.max(np.abs(sums - 1.0)) > 1e-10:
            raise ValueError("transition columns must sum to one")
        if eigenbasis is None:
            eigenbasis = np.eye(d, dtype=np.complex128)
        basis = as_cmatrix(eigenbasis, name="eigenbasis")
        if basis.shape != (d, d):
            raise ValueError(f"eigenbasis shape {basis.shape} does not match transition width {d}")
        effects = []
        for j in range(n):
            e = np.zeros((d, d), dtype=np.complex128)
            for i in range(d):
                v = basis[:, i]
                e += p[j, i] * np.outer(v, np.conj(v))
            effects.append(e)
        if pointer_basis is None:
            pointer_basis = np.eye(n, dtype=np.complex128)
        return cls(tuple(effects), pointer_basis)
