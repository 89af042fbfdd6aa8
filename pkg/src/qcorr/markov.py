"""Column-stochastic matrix analysis: irreducibility, stationary structure,
ergodic limits, and Birkhoff decompositions.

Orientation: ``P[i, j]`` is the probability of moving *to* ``i`` *from*
``j``, so columns sum to one and distributions evolve as ``p -> P p``.
The support digraph has an edge ``j -> i`` whenever ``P[i, j] > 1e-12``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import NotPrimitiveError
from .linalg import as_cmatrix

__all__ = [
    "BirkhoffDecomposition",
    "CommunicatingClass",
    "ErgodicLimit",
    "StationaryAnalysis",
    "StochasticMatrix",
    "basis_change_transition",
    "birkhoff_decompose",
    "block_decompose",
    "ergodic_limit",
    "is_irreducible",
    "is_primitive",
    "perron_vector",
    "stationary_simplex",
    "transition_matrix",
]

SUPPORT_TOL = 1e-12
_COLUMN_SUM_ATOL = 1e-10
_NEGATIVE_ATOL = 1e-12


@dataclass(frozen=True)
class StochasticMatrix:
    """Validated column-stochastic matrix (rectangular allowed).

    Entries more negative than ``-1e-12`` or column sums off by more than
    ``1e-10`` are rejected; tiny negative roundoff is clipped to zero.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if np.iscomplexobj(m):
            if np.max(np.abs(m.imag)) > 1e-12:
                raise ValueError("stochastic matrix must be real")
            m = m.real
        m = np.asarray(m, dtype=float)
        if m.ndim != 2:
            raise ValueError("stochastic matrix must be two dimensional")
        if m.size == 0:
            raise ValueError("stochastic matrix must be non-empty")
        if float(np.min(m)) < -_NEGATIVE_ATOL:
            raise ValueError(f"negative entry {float(np.min(m)):.3e} in stochastic matrix")
        sums = m.sum(axis=0)
        worst = float(np.max(np.abs(sums - 1.0)))
        if worst > _COLUMN_SUM_ATOL:
            bad = int(np.argmax(np.abs(sums - 1.0)))
            raise ValueError(
                f"column {bad} sums to {sums[bad]:.12g}, not 1 within 1e-10"
            )
        m = np.clip(m, 0.0, None)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    @property
    def d(self) -> int:
        if not self.is_square:
            raise ValueError("matrix is not square")
        return self.n_rows


def _coerce(p) -> np.ndarray:
    if isinstance(p, StochasticMatrix):
        return p.matrix
    return StochasticMatrix(p).matrix


def _square(p) -> np.ndarray:
    m = _coerce(p)
    if m.shape[0] != m.shape[1]:
        raise ValueError("operation requires a square stochastic matrix")
    return m


def transition_matrix(povm: Sequence[np.ndarray], basis) -> StochasticMatrix:
    """Outcome-versus-preparation table ``P[i, j] = <phi_j| E_i |phi_j>``.

    ``basis`` must have orthonormal columns spanning preparations; the
    result is column-stochastic with one row per POVM outcome (and is
    rectangular when the outcome count differs from the column count).
    """
    b = as_cmatrix(basis, name="basis")
    gram = np.conj(b).T @ b
    if np.linalg.norm(gram - np.eye(b.shape[1])) > 1e-10 * np.sqrt(b.shape[1]):
        raise ValueError("basis columns are not orthonormal within 1e-10")
    effects = [as_cmatrix(e, name="POVM element") for e in povm]
    p = np.zeros((len(effects), b.shape[1]))
    for i, e in enumerate(effects):
        if e.shape != (b.shape[0], b.shape[0]):
            raise ValueError("POVM elements must act on the basis space")
        for j in range(b.shape[1]):
            col = b[:, j]
            p[i, j] = float(np.real(np.vdot(col, e @ col)))
    return StochasticMatrix(p)


# -- support combinatorics ----------------------------------------------------


def _support(m: np.ndarray) -> np.ndarray:
    return m > SUPPORT_TOL


def _bool_power(b: np.ndarray, k: int) -> np.ndarray:
    """Boolean semiring power by repeated squaring."""
    n = b.shape[0]
    result = np.eye(n, dtype=bool)
    base = b.copy()
    while k > 0:
        if k & 1:
            result = (result.astype(np.int64) @ base.astype(np.int64)) > 0
        base = (base.astype(np.int64) @ base.astype(np.int64)) > 0
        k >>= 1
    return result


def is_irreducible(p) -> bool:
    """True when ``(I + P)^(d-1)`` has a fully positive support pattern."""
    m = _square(p)
    d = m.shape[0]
    b = _support(m) | np.eye(d, dtype=bool)
    return bool(np.all(_bool_power(b, d - 1))) if d > 1 else True


def is_primitive(p) -> bool:
    """True when ``P^(d^2 - 2d + 2)`` is entrywise positive (support test)."""
    m = _square(p)
    d = m.shape[0]
    exponent = d * d - 2 * d + 2
    return bool(np.all(_bool_power(_support(m), exponent)))


def _strong_components(support: np.ndarray) -> list[tuple[int, ...]]:
    # support[i, j] encodes the edge j -> i, csgraph wants row -> column
    n_comp, labels = connected_components(
        csr_matrix(support.T), directed=True, connection="strong"
    )
    groups: dict[int, list[int]] = {}
    for idx, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(idx)
    classes = [tuple(sorted(g)) for g in groups.values()]
    classes.sort(key=lambda c: c[0])
    return classes


@dataclass(frozen=True)
class CommunicatingClass:
    """One communicating class of the support digraph."""

    indices: tuple[int, ...]
    matrix: np.ndarray
    recurrent: bool
    primitive: bool


@dataclass(frozen=True)
class StationaryAnalysis:
    """Block structure of a square column-stochastic matrix.

    ``classes`` lists every communicating class (ordered by smallest
    member); ``perron_vectors`` holds one unit-sum nonnegative vector per
    *recurrent* class, embedded in the full dimension; ``degeneracy`` is
    the count of recurrent classes, i.e. the dimension of the simplex of
    stationary distributions.
    """

    matrix: StochasticMatrix
    classes: tuple[CommunicatingClass, ...]
    perron_vectors: tuple[np.ndarray, ...]
    degeneracy: int

    @property
    def recurrent_classes(self) -> tuple[CommunicatingClass, ...]:
        return tuple(c for c in self.classes if c.recurrent)


def perron_vector(p, block: Sequence[int] | None = None) -> np.ndarray:
    """Stationary distribution supported on one recurrent block.

    Solved two independent ways: the null space of ``(B - I)`` via SVD and
    a lazy power iteration on ``(I + B)/2``; the methods must agree to
    ``1e-10`` in the 1-norm. The result is embedded in the full dimension,
    nonnegative, and sums to one.
    """
    m = _square(p)
    d = m.shape[0]
    if block is None:
        block = tuple(range(d))
    block = tuple(sorted(set(int(i) for i in block)))
    if not block or any(i < 0 or i >= d for i in block):
        raise ValueError(f"invalid block {block} for dimension {d}")
    outside = [i for i in range(d) if i not in block]
    if outside:
        leak = float(np.max(m[np.ix_(outside, block)])) if block else 0.0
        if leak > SUPPORT_TOL:
            raise ValueError("block is not recurrent: probability escapes it")
    sub = m[np.ix_(block, block)]
    if not is_irreducible(sub):
        raise ValueError("block is not a single communicating class")
    k = len(block)

    # route one: smallest right-singular vector of (B - I)
    _, svals, vh = np.linalg.svd(sub - np.eye(k))
    null = np.conj(vh[-1])
    if svals[-1] > 1e-8:
        raise ValueError("no stationary vector found on the requested block")
    null = np.real(null)
    total = null.sum()
    if abs(total) < 1e-12:
        raise ValueError("degenerate null vector for the requested block")
    v_null = null / total

    # route two: power iteration on the lazy chain (same fixed point,
    # aperiodic regardless of the block's period)
    lazy = (np.eye(k) + sub) / 2.0
    x = np.full(k, 1.0 / k)
    last_residual = np.inf
    for _ in range(200000):
        y = lazy @ x
        residual = float(np.abs(y - x).sum())
        x = y
        if residual <= 1e-15:
            break
        if residual <= 1e-13 and residual >= last_residual * (1.0 - 1e-9):
            break  # stagnated at roundoff level
        last_residual = residual
    v_iter = x / x.sum()

    if float(np.abs(v_null - v_iter).sum()) > 1e-10:
        raise ValueError("stationary solvers disagree beyond 1e-10")
    if float(np.min(v_null)) < -1e-10:
        raise ValueError("stationary vector has a negative component")
    out = np.zeros(d)
    out[list(block)] = np.clip(v_null, 0.0, None)
    out /= out.sum()
    return out


def block_decompose(p) -> StationaryAnalysis:
    """Communicating classes, recurrence, primitivity, and Perron vectors."""
    sm = p if isinstance(p, StochasticMatrix) else StochasticMatrix(p)
    m = _square(sm)
    support = _support(m)
    classes = []
    vectors = []
    for indices in _strong_components(support):
        idx = list(indices)
        outside = [i for i in range(m.shape[0]) if i not in set(idx)]
        recurrent = True
        if outside:
            recurrent = not bool(np.any(support[np.ix_(outside, idx)]))
        sub = m[np.ix_(idx, idx)]
        d_sub = len(idx)
        exponent = d_sub * d_sub - 2 * d_sub + 2
        primitive = bool(np.all(_bool_power(_support(sub), exponent)))
        classes.append(
            CommunicatingClass(
                indices=tuple(indices), matrix=sub, recurrent=recurrent, primitive=primitive
            )
        )
        if recurrent:
            vectors.append(perron_vector(m, indices))
    return StationaryAnalysis(
        matrix=sm,
        classes=tuple(classes),
        perron_vectors=tuple(vectors),
        degeneracy=len(vectors),
    )


def stationary_simplex(analysis: StationaryAnalysis, weights) -> np.ndarray:
    """Convex combination of the per-block stationary vectors."""
    w = np.asarray(weights, dtype=float).reshape(-1)
    if len(w) != analysis.degeneracy:
        raise ValueError(f"expected {analysis.degeneracy} weights, got {len(w)}")
    if float(np.min(w)) < -1e-12 or abs(w.sum() - 1.0) > 1e-10:
        raise ValueError("weights must be a probability vector")
    out = np.zeros(analysis.matrix.n_rows)
    for wi, vi in zip(w, analysis.perron_vectors):
        out += wi * vi
    return out


@dataclass(frozen=True)
class ErgodicLimit:
    """Rank-one limit ``P^inf`` together with the convergence power."""

    matrix: np.ndarray
    perron: np.ndarray
    r_converged: int


def ergodic_limit(p, threshold: float = 1e-10, max_power: int = 200000) -> ErgodicLimit:
    """Limit of matrix powers of a primitive column-stochastic matrix.

    Every column of the limit equals the Perron vector. ``r_converged`` is
    the first power with ``max |P^r - P^inf| <= threshold``. Non-primitive
    input raises NotPrimitiveError whose ``reason`` says whether the matrix
    is reducible or merely periodic.
    """
    m = _square(p)
    if not is_primitive(m):
        if is_irreducible(m):
            raise NotPrimitiveError(
                "matrix is irreducible but periodic; powers oscillate", reason="periodic"
            )
        raise NotPrimitiveError(
            "matrix is reducible; the stationary distribution is not unique",
            reason="reducible",
        )
    v = perron_vector(m)
    limit = np.outer(v, np.ones(m.shape[0]))
    q = m.copy()
    r = 1
    while float(np.max(np.abs(q - limit))) > threshold:
        if r >= max_power:
            raise ValueError(f"no convergence within {max_power} powers")
        q = m @ q
        r += 1
    return ErgodicLimit(matrix=limit, perron=v, r_converged=r)


# -- Birkhoff decomposition ----------------------------------------------------


@dataclass(frozen=True)
class BirkhoffDecomposition:
    """Convex decomposition of a doubly stochastic matrix into permutations.

    ``permutations[t]`` maps column ``j`` to row ``permutations[t][j]``.
    """

    weights: tuple[float, ...]
    permutations: tuple[tuple[int, ...], ...]

    @property
    def n_terms(self) -> int:
        return len(self.weights)

    def reconstruction(self) -> np.ndarray:
        d = len(self.permutations[0])
        out = np.zeros((d, d))
        for w, perm in zip(self.weights, self.permutations):
            for j, i in enumerate(perm):
                out[i, j] += w
        return out


def _perfect_matching(mask: np.ndarray) -> list[int] | None:
    """Column-to-row perfect matching on a boolean support, or None.

    Columns are processed in ascending order and augmenting paths prefer
    lower row indices, so the outcome is deterministic.
    """
    d = mask.shape[0]
    row_owner = [-1] * d  # row -> column currently matched to it

    def augment(col: int, visited: list[bool]) -> bool:
        for row in range(d):
            if mask[row, col] and not visited[row]:
                visited[row] = True
                if row_owner[row] < 0 or augment(row_owner[row], visited):
                    row_owner[row] = col
                    return True
        return False

    for col in range(d):
        if not augment(col, [False] * d):
            return None
    perm = [-1] * d
    for row, col in enumerate(row_owner):
        perm[col] = row
    return perm


def _caratheodory_prune(
    weights: list[float], perms: list[tuple[int, ...]], target: int
) -> tuple[list[float], list[tuple[int, ...]]]:
    """Shrink a convex combination of permutation matrices to ``target`` terms.

    While more terms remain than the affine dimension bound allows, find a
    null vector of the stacked (vectorized matrix, 1) system and walk to
    the boundary of the simplex, zeroing at least one weight per pass.
    """
    d = len(perms[0])
    while len(weights) > target:
        a = np.zeros((d * d + 1, len(weights)))
        for t, perm in enumerate(perms):
            for j, i in enumerate(perm):
                a[i * d + j, t] = 1.0
        a[-1, :] = 1.0
        _, svals, vh = np.linalg.svd(a)
        null = vh[-1]
        if svals[-1] > 1e-9:
            break  # terms are affinely independent; nothing to prune
        if float(np.max(null)) <= 0:
            null = -null
        steps = [
            (weights[t] / null[t], t) for t in range(len(weights)) if null[t] > 1e-12
        ]
        if not steps:
            break
        step, _ = min(steps)
        new_w = [w - step * c for w, c in zip(weights, null)]
        keep = [t for t, w in enumerate(new_w) if w > 1e-13]
        weights = [new_w[t] for t in keep]
        perms = [perms[t] for t in keep]
    return weights, perms


def birkhoff_decompose(matrix, tol: float = 1e-9) -> BirkhoffDecomposition:
    """Decompose a doubly stochastic matrix into at most ``(d-1)^2 + 1``
    permutation matrices.

    Greedy extraction peels off a perfect matching on the remaining
    support (ties broken toward low column and row indices) until the
    residual is dust; a Caratheodory pruning pass then enforces the term
    bound while leaving the reconstruction unchanged.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    d = m.shape[0]
    if float(np.min(m)) < -tol:
        raise ValueError("matrix has negative entries")
    if np.max(np.abs(m.sum(axis=0) - 1.0)) > tol or np.max(np.abs(m.sum(axis=1) - 1.0)) > tol:
        raise ValueError("matrix is not doubly stochastic within tolerance")

    residual = np.clip(m, 0.0, None)
    weights: list[float] = []
    perms: list[tuple[int, ...]] = []
    for _ in range(d * d + d):
        mask = residual > SUPPORT_TOL
        if not mask.any():
            break
        perm = _perfect_matching(mask)
        if perm is None:
            if float(residual.max()) <= 10 * tol:
                break
            raise ValueError("support lost a perfect matching; matrix is not doubly stochastic")
        w = float(min(residual[perm[j], j] for j in range(d)))
        weights.append(w)
        perms.append(tuple(perm))
        for j in range(d):
            residual[perm[j], j] -= w
    if not weights:
        raise ValueError("matrix has empty support")

    target = (d - 1) * (d - 1) + 1
    weights, perms = _caratheodory_prune(weights, perms, target)
    total = sum(weights)
    weights = [w / total for w in weights]
    return BirkhoffDecomposition(weights=tuple(weights), permutations=tuple(perms))


def basis_change_transition(source, u, basis=None, tol: float = 1e-9) -> StochasticMatrix:
    """Transition table after rotating the preparation basis by ``u``.

    Two source forms are accepted:

    * commuting-channel data (anything with ``transition``, ``eigenbasis``,
      and ``measurement`` attributes): the new table is the composition
      ``P @ B`` with ``B[k, j] = |<phi_k| u |phi_j>|^2`` doubly stochastic,
      where ``phi`` are the eigenbasis columns; ``basis`` must be omitted.
    * a measurement map plus the current preparation ``basis`` (defaulting
      to the pointer basis of a square map): the table is assembled as the
      permutation mixture plus the coherent cross-term correction, with
      mixture weights taken from ``birkhoff_decompose``.

    Either way the result is checked against direct recomputation of
    ``<u phi_j| E_i |u phi_j>`` within ``tol`` and the directly recomputed
    table is returned.
    """
    u_mat = as_cmatrix(u, name="basis change")
    d = u_mat.shape[0]
    if u_mat.shape[1] != d:
        raise ValueError("basis change must be square")
    if np.linalg.norm(np.conj(u_mat).T @ u_mat - np.eye(d)) > 1e-9 * np.sqrt(d):
        raise ValueError("basis change must be unitary")

    if hasattr(source, "transition") and hasattr(source, "eigenbasis"):
        if basis is not None:
            raise ValueError("basis is implied by the commuting channel's eigenbasis")
        phi = as_cmatrix(source.eigenbasis, name="eigenbasis")
        if phi.shape != (d, d):
            raise ValueError("basis change dimension does not match the eigenbasis")
        overlap = np.conj(phi).T @ u_mat @ phi
        doubly = np.abs(overlap) ** 2
        composed = _coerce(source.transition) @ doubly
        direct = transition_matrix(source.measurement.povm, u_mat @ phi).matrix
        if float(np.max(np.abs(composed - direct))) > tol:
            raise ValueError("composed and direct transition tables disagree")
        return StochasticMatrix(direct)

    effects = [as_cmatrix(e, name="POVM element") for e in source.povm]
    if basis is None:
        pointer = as_cmatrix(source.pointer_basis)
        if pointer.shape != (d, d) or effects[0].shape != (d, d):
            raise ValueError("a preparation basis is required for non-square maps")
        basis = pointer
    phi = as_cmatrix(basis, name="basis")
    if phi.shape != (d, d) or effects[0].shape != (d, d):
        raise ValueError("basis change dimension does not match the preparation basis")
    w = np.conj(phi).T @ u_mat @ phi  # overlaps <phi_k | u phi_j>
    doubly = np.abs(w) ** 2
    table = transition_matrix(effects, phi).matrix
    mixture = table @ birkhoff_decompose(doubly).reconstruction()
    coherent = np.zeros((len(effects), d))
    for i, e in enumerate(effects):
        rotated = np.conj(phi).T @ e @ phi
        full = np.real(np.diag(np.conj(w).T @ rotated @ w))
        diagonal_part = doubly.T @ np.real(np.diag(rotated))
        coherent[i, :] = full - diagonal_part
    assembled = mixture + coherent
    direct = transition_matrix(effects, u_mat @ phi).matrix
    if float(np.max(np.abs(assembled - direct))) > tol:
        raise ValueError("mixture-plus-coherent table disagrees with direct recomputation")
    return StochasticMatrix(direct)
