"""Dense complex linear algebra shared by every other module.

Conventions used throughout the package:

* Matrices are dense numpy arrays with complex128 entries, row-major.
* Composite systems are indexed row-major: ``A (x) B`` sends the basis
  pair ``(i, j)`` to the single index ``i * dim_B + j``, which is exactly
  what ``numpy.kron`` produces.
* Eigenbases are unitary matrices whose *columns* are the basis vectors.
* Structural zero tests use an absolute tolerance of ``1e-9`` scaled by
  the Frobenius norm of the input (never below 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DEFAULT_TOL",
    "EigenSystem",
    "SimultaneousDiagonalization",
    "as_cmatrix",
    "bases_match",
    "commutator_norm",
    "dagger",
    "frobenius",
    "has_orthonormal_columns",
    "hermitian_eig",
    "partial_trace",
    "simultaneous_diagonalize",
    "tensor",
]

DEFAULT_TOL = 1e-9


def as_cmatrix(a, *, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite two dimensional complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"{name} must be two dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def tensor(a, b, *rest) -> np.ndarray:
    """Kronecker product of two or more matrices, row-major index order."""
    out = np.kron(as_cmatrix(a, name="tensor factor"), as_cmatrix(b, name="tensor factor"))
    for r in rest:
        out = np.kron(out, as_cmatrix(r, name="tensor factor"))
    return out


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every tensor factor whose index is not listed in ``keep``.

    Parameters
    ----------
    m : array_like
        Square operator on the product space ``prod(dims)``.
    dims : sequence of int
        Dimension of each tensor factor, slowest index first.
    keep : iterable of int
        Factor indices (0-based) that survive; they keep their original
        relative order. An empty ``keep`` yields the full trace as a
        ``1 x 1`` matrix.
    """
    mat = as_cmatrix(m)
    dims = tuple(int(d) for d in dims)
    if any(d <= 0 for d in dims):
        raise ValueError(f"factor dimensions must be positive, got {dims}")
    total = int(np.prod(dims))
    if mat.shape != (total, total):
        raise ValueError(f"operator shape {mat.shape} does not match dims {dims}")
    k = len(dims)
    keep = tuple(sorted(set(int(i) for i in keep)))
    if any(i < 0 or i >= k for i in keep):
        raise ValueError(f"keep indices {keep} out of range for {k} factors")
    t = mat.reshape(dims + dims)
    row_labels = list(range(k))
    # traced factors share a label between row and column axes
    col_labels = [i + k if i in keep else i for i in range(k)]
    out_labels = [i for i in keep] + [i + k for i in keep]
    reduced = np.einsum(t, row_labels + col_labels, out_labels)
    d_keep = int(np.prod([dims[i] for i in keep])) if keep else 1
    return reduced.reshape(d_keep, d_keep)


def commutator_norm(a, b) -> float:
    """Frobenius norm of ``[a, b] = ab - ba``."""
    x = as_cmatrix(a)
    y = as_cmatrix(b)
    return frobenius(x @ y - y @ x)


def has_orthonormal_columns(u, tol: float = 1e-10) -> bool:
    m = as_cmatrix(u)
    gram = dagger(m) @ m
    return frobenius(gram - np.eye(m.shape[1])) <= tol * max(1.0, np.sqrt(m.shape[1]))


def bases_match(u, v, tol: float = 1e-8) -> bool:
    """True when the columns of ``u`` and ``v`` agree up to permutation and phase.

    Both arguments must have orthonormal columns of equal count; the test
    asks that the overlap matrix ``|u^dag v|`` be a permutation matrix.
    """
    a = as_cmatrix(u)
    b = as_cmatrix(v)
    if a.shape != b.shape:
        return False
    overlap = np.abs(dagger(a) @ b)
    big = overlap >= 1.0 - tol
    return bool(np.all(big.sum(axis=0) == 1) and np.all(big.sum(axis=1) == 1))


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues in descending order with matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _phase_fix(u: np.ndarray) -> np.ndarray:
    """Rotate each column so its first significant component is real positive."""
    out = np.array(u, dtype=np.complex128, copy=True)
    for c in range(out.shape[1]):
        col = out[:, c]
        idx = int(np.argmax(np.abs(col) > 1e-8))
        z = col[idx]
        if abs(z) > 0:
            out[:, c] = col * (np.conj(z) / abs(z))
    return out


def _eigen_clusters(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group sorted eigenvalues into clusters of width ``tol``."""
    clusters: list[list[int]] = [[0]]
    for i in range(1, len(values)):
        if abs(values[i] - values[clusters[-1][0]]) <= tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return [np.asarray(c) for c in clusters]


def _lexicographic_key(col: np.ndarray) -> tuple:
    return tuple((round(float(z.real), 9), round(float(z.imag), 9)) for z in col)


def hermitian_eig(a, tol: float = DEFAULT_TOL) -> EigenSystem:
    """Spectral decomposition of a Hermitian matrix.

    Eigenvalues are returned in descending order. Columns are canonical:
    the first significant component of every eigenvector is real positive,
    and inside a degenerate cluster columns are sorted lexicographically
    by their components.
    """
    m = as_cmatrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, frobenius(m))
    if frobenius(m - dagger(m)) > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh((m + dagger(m)) / 2.0)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = _phase_fix(v[:, order])
    cluster_tol = 1e-10 * max(1.0, float(np.max(np.abs(w))) if len(w) else 1.0)
    for cluster in _eigen_clusters(w, cluster_tol):
        if len(cluster) > 1:
            sub = sorted(cluster, key=lambda i: _lexicographic_key(v[:, i]))
            v[:, cluster] = v[:, sub]
    return EigenSystem(eigenvalues=w, eigenvectors=v)


@dataclass(frozen=True)
class SimultaneousDiagonalization:
    """Result of a joint diagonalization attempt.

    ``basis`` is a unitary whose columns diagonalize every family member,
    or None when the family fails to commute; ``witness`` is the largest
    violating pairwise commutator norm (on success, the largest commutator
    norm actually observed, a residual-level number).
    """

    basis: np.ndarray | None
    witness: float

    def __bool__(self) -> bool:  # pragma: no cover - convenience only
        return self.basis is not None


def _refine_blocks(
    gens: list[np.ndarray], isometry: np.ndarray, rng: np.random.Generator
) -> list[np.ndarray]:
    k = isometry.shape[1]
    if k == 1:
        return [isometry]
    restricted = [dagger(isometry) @ g @ isometry for g in gens]
    if all(
        frobenius(r - (np.trace(r) / k) * np.eye(k)) <= 1e-12 * max(1.0, frobenius(r))
        for r in restricted
    ):
        return [isometry]
    for _ in range(8):
        coeff = rng.standard_normal(len(gens))
        h = sum(c * r for c, r in zip(coeff, restricted))
        w, q = np.linalg.eigh(h)
        clusters = _eigen_clusters(w, 1e-9 * max(1.0, float(np.max(np.abs(w)))))
        if len(clusters) > 1:
            blocks: list[np.ndarray] = []
            for cluster in clusters:
                blocks.extend(_refine_blocks(gens, isometry @ q[:, cluster], rng))
            return blocks
    # no random combination split this subspace; hand it back and let the
    # final verification decide
    return [isometry]


def _max_offdiagonal(family: list[np.ndarray], u: np.ndarray) -> float:
    worst = 0.0
    for m in family:
        rotated = dagger(u) @ m @ u
        off = rotated - np.diag(np.diag(rotated))
        worst = max(worst, frobenius(off))
    return worst


def _canonical_joint_basis(u: np.ndarray, gens: list[np.ndarray]) -> np.ndarray:
    u = _phase_fix(u)
    keys = []
    for c in range(u.shape[1]):
        col = u[:, c]
        diag_values = tuple(
            -round(float(np.real(np.vdot(col, g @ col))), 9) for g in gens
        )
        keys.append((diag_values, _lexicographic_key(col)))
    order = sorted(range(u.shape[1]), key=lambda c: keys[c])
    return u[:, order]


def simultaneous_diagonalize(family, tol: float | None = None) -> SimultaneousDiagonalization:
    """Find a common eigenbasis for a commuting family of matrices.

    The family is closed under adjoints before testing. If any pairwise
    commutator norm exceeds ``tol`` (scaled by the family's largest
    Frobenius norm), no basis exists and the offending norm is reported as
    the witness. Otherwise a basis is built from a random Hermitian
    combination of the family, refined recursively on degenerate clusters;
    two independent random combinations must both diagonalize the family
    or the attempt is reported as failed.
    """
    mats = [as_cmatrix(m, name="family member") for m in family]
    if not mats:
        raise ValueError("family must be non-empty")
    d = mats[0].shape[0]
    for m in mats:
        if m.shape != (d, d):
            raise ValueError("family members must be square matrices of equal dimension")
    if tol is None:
        tol = DEFAULT_TOL
    scale = max(1.0, max(frobenius(m) for m in mats))

    closed = list(mats)
    for m in mats:
        if frobenius(m - dagger(m)) > 1e-13 * scale:
            closed.append(dagger(m))

    witness = 0.0
    if len(closed) > 1:
        stack = np.stack(closed)
        products = np.einsum("iab,jbc->ijac", stack, stack)
        commutators = products - products.transpose(1, 0, 2, 3)
        witness = float(np.sqrt(np.max(np.sum(np.abs(commutators) ** 2, axis=(2, 3)))))
    if witness > tol * scale:
        return SimultaneousDiagonalization(basis=None, witness=witness)

    gens: list[np.ndarray] = []
    for m in mats:
        h = (m + dagger(m)) / 2.0
        k = (m - dagger(m)) / 2.0j
        for g in (h, k):
            if frobenius(g) > 1e-13 * scale:
                gens.append(g)
    if not gens:  # family of (numerical) zeros
        return SimultaneousDiagonalization(basis=np.eye(d, dtype=np.complex128), witness=witness)

    rng = np.random.default_rng(0x51D1A6)
    basis_first: np.ndarray | None = None
    for _ in range(2):
        blocks = _refine_blocks(gens, np.eye(d, dtype=np.complex128), rng)
        u = np.concatenate(blocks, axis=1)
        if _max_offdiagonal(closed, u) > tol * scale:
            return SimultaneousDiagonalization(basis=None, witness=max(witness, _max_offdiagonal(closed, u)))
        if basis_first is None:
            basis_first = u
    return SimultaneousDiagonalization(
        basis=_canonical_joint_basis(basis_first, gens), witness=witness
    )
