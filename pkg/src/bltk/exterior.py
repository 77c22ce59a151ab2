"""Wedge-norm calculus: orthonormal frames, dual bases, minor assignments.

Conventions. Vectors are 1-d float arrays; a family of vectors is passed as a
sequence and stacked as matrix columns. The wedge norm of q vectors in R^d is
the q-dimensional volume of the parallelepiped they span, i.e. the product of
the singular values of the column matrix. For subspaces with orthonormal
bases whose dimensions sum to d, the wedge norm is |det| of the concatenated
bases and lies in [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import factorial

import numpy as np

from .errors import DimensionMismatch, RankDeficient, Unsupported

ORTHONORMAL_TOL = 1e-10
INDEPENDENCE_TOL = 1e-12

# Exhaustive minor-assignment search: ordered block partitions of d indices.
MAX_ASSIGNMENT_DIM = 8


def _as_columns(vectors) -> np.ndarray:
    cols = [np.asarray(v, dtype=float).reshape(-1) for v in vectors]
    if not cols:
        raise DimensionMismatch("need at least one vector")
    d = cols[0].size
    if any(c.size != d for c in cols):
        raise DimensionMismatch("vectors have mixed ambient dimensions")
    return np.column_stack(cols)


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^d carried by an orthonormal basis (columns)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise DimensionMismatch("basis must be a d x k matrix")
        d, k = b.shape
        if k > d:
            raise DimensionMismatch(f"k={k} exceeds ambient dimension d={d}")
        if k > 0:
            gram = b.T @ b
            if np.max(np.abs(gram - np.eye(k))) > ORTHONORMAL_TOL:
                raise RankDeficient("basis columns are not orthonormal within 1e-10")
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def project(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection of x (or rows of x) onto the subspace."""
        b = self.basis
        return (np.asarray(x, dtype=float) @ b) @ b.T

    def complement(self) -> "Subspace":
        """Orthogonal complement, via the full SVD of the basis."""
        d, k = self.basis.shape
        if k == 0:
            return Subspace(np.eye(d))
        if k == d:
            return Subspace(np.zeros((d, 0)))
        u, _, _ = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(u[:, k:])


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """Translate of a linear subspace: base_point + span(direction)."""

    base_point: np.ndarray
    direction: Subspace

    def __post_init__(self):
        p = np.asarray(self.base_point, dtype=float).reshape(-1)
        if p.size != self.direction.ambient_dim:
            raise DimensionMismatch("base point dimension differs from subspace")
        object.__setattr__(self, "base_point", p)


def orthonormalize(vectors) -> Subspace:
    """Orthonormal basis for the span, preserving the flag of the input order.

    QR with the sign convention diag(R) > 0, so the first output vector is the
    normalized first input, the second lies in span(v1, v2), and so on.
    Raises RankDeficient when the family is numerically dependent (smallest
    singular value of the column-normalized matrix <= 1e-12).
    """
    w = _as_columns(vectors)
    norms = np.linalg.norm(w, axis=0)
    if np.any(norms <= INDEPENDENCE_TOL):
        raise RankDeficient("zero vector in family")
    scaled = w / norms
    if np.linalg.svd(scaled, compute_uv=False)[-1] <= 1e-12:
        raise RankDeficient("vector family is numerically dependent")
    q, r = np.linalg.qr(w)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return Subspace(q * signs)


def vector_wedge_norm(vectors) -> float:
    """Volume of the parallelepiped spanned by the vectors (0 if dependent)."""
    w = _as_columns(vectors)
    d, q = w.shape
    if q > d:
        raise DimensionMismatch(f"{q} vectors cannot be independent in R^{d}")
    return float(np.prod(np.linalg.svd(w, compute_uv=False)))


def subspace_wedge_norm(subspaces) -> float:
    """|V_1 ^ ... ^ V_n| for orthonormal subspaces with dims summing to d."""
    subs = list(subspaces)
    if not subs:
        raise DimensionMismatch("need at least one subspace")
    d = subs[0].ambient_dim
    if any(s.ambient_dim != d for s in subs):
        raise DimensionMismatch("subspaces have mixed ambient dimensions")
    if sum(s.dim for s in subs) != d:
        raise DimensionMismatch("subspace dimensions must sum to the ambient dimension")
    m = np.column_stack([s.basis for s in subs]) if d else np.zeros((0, 0))
    return float(np.clip(abs(np.linalg.det(m)), 0.0, 1.0))


def subspace_angle_cos(x1: Subspace, x2: Subspace) -> float:
    """Product of principal-angle cosines between two equidimensional subspaces.

    Equals |det(B1^T B2)| for orthonormal bases, and also the wedge norm
    |X1 ^ X2_perp|; the result is basis-independent and lies in [0, 1].
    """
    if x1.ambient_dim != x2.ambient_dim:
        raise DimensionMismatch("subspaces live in different ambient spaces")
    if x1.dim != x2.dim:
        raise DimensionMismatch("principal-angle cosine needs equal dimensions")
    if x1.dim == 0:
        return 1.0
    sig = np.linalg.svd(x1.basis.T @ x2.basis, compute_uv=False)
    return float(np.clip(np.prod(np.clip(sig, 0.0, 1.0)), 0.0, 1.0))


def dual_basis(vectors) -> list[np.ndarray]:
    """Dual basis u_i with <u_i, w_j> = delta_ij, columns of (W^-1)^T."""
    w = _as_columns(vectors)
    d, q = w.shape
    if q != d:
        raise DimensionMismatch("dual basis needs exactly d vectors in R^d")
    norms = np.linalg.norm(w, axis=0)
    if np.any(norms <= INDEPENDENCE_TOL):
        raise RankDeficient("zero vector in family")
    if np.linalg.svd(w / norms, compute_uv=False)[-1] <= 1e-12:
        raise RankDeficient("vector family is numerically dependent")
    u = np.linalg.inv(w).T
    return [u[:, i].copy() for i in range(d)]


@dataclass(frozen=True)
class MinorAssignment:
    """Ordered index blocks S_1..S_n and the attained product of wedge norms."""

    blocks: tuple[tuple[int, ...], ...]
    value: float
    factor_values: tuple[float, ...] = field(default=())


def assignment_count(dims, d: int | None = None) -> int:
    """Number of ordered partitions of d indices into blocks of the given sizes."""
    sizes = list(dims)
    total = sum(sizes)
    if d is not None and total != d:
        raise DimensionMismatch("block sizes must sum to d")
    count = factorial(total)
    for k in sizes:
        count //= factorial(k)
    return count


def _iter_partitions(indices: tuple[int, ...], sizes: list[int]):
    """All ordered partitions of `indices` into blocks of the given sizes."""
    if not sizes:
        yield ()
        return
    k = sizes[0]
    for block in combinations(indices, k):
        rest = tuple(i for i in indices if i not in block)
        for tail in _iter_partitions(rest, sizes[1:]):
            yield (block,) + tail


def _check_assignment_inputs(subspaces, vectors):
    subs = list(subspaces)
    w = _as_columns(vectors)
    d = w.shape[0]
    if w.shape[1] != d:
        raise DimensionMismatch("need exactly d basis vectors in R^d")
    if any(s.ambient_dim != d for s in subs):
        raise DimensionMismatch("subspaces have mixed ambient dimensions")
    if sum(s.dim for s in subs) != d:
        raise DimensionMismatch("subspace dimensions must sum to d")
    if d > MAX_ASSIGNMENT_DIM:
        raise Unsupported(f"exhaustive search supports d <= {MAX_ASSIGNMENT_DIM}")
    norms = np.linalg.norm(w, axis=0)
    if np.any(norms <= INDEPENDENCE_TOL):
        raise RankDeficient("zero vector in basis family")
    if np.linalg.svd(w / norms, compute_uv=False)[-1] <= 1e-12:
        raise RankDeficient("basis family is numerically dependent")
    return subs, w, d


def best_dual_minor_assignment(subspaces, vectors) -> MinorAssignment:
    """Maximize prod_j |(V_j)^perp ^ w_{S_j}| over ordered partitions S.

    The attained value is at least |V_1 ^...^ V_n| * |w_1 ^...^ w_d| divided
    by the multinomial coefficient d!/(k_1!...k_n!); see assignment_count.
    """
    subs, w, d = _check_assignment_inputs(subspaces, vectors)
    comp = [s.complement().basis for s in subs]
    sizes = [s.dim for s in subs]
    best = None
    for blocks in _iter_partitions(tuple(range(d)), sizes):
        vals = tuple(
            abs(np.linalg.det(np.column_stack([comp[j], w[:, list(blocks[j])]])))
            for j in range(len(subs))
        )
        value = float(np.prod(vals))
        if best is None or value > best.value:
            best = MinorAssignment(blocks=blocks, value=value, factor_values=vals)
    return best


def best_primal_minor_assignment(subspaces, vectors) -> MinorAssignment:
    """Maximize prod_j |V_j ^ w_{S_j^c}| over ordered partitions S.

    Each factor wedges V_j with the d - k_j basis vectors NOT assigned to
    block j; for an orthonormal basis w the attained value is at least
    |V_1 ^...^ V_n| divided by the same multinomial coefficient.
    """
    subs, w, d = _check_assignment_inputs(subspaces, vectors)
    sizes = [s.dim for s in subs]
    all_idx = tuple(range(d))
    best = None
    for blocks in _iter_partitions(all_idx, sizes):
        vals = []
        for j, s in enumerate(subs):
            rest = [i for i in all_idx if i not in blocks[j]]
            vals.append(abs(np.linalg.det(np.column_stack([s.basis, w[:, rest]]))))
        value = float(np.prod(vals))
        if best is None or value > best.value:
            best = MinorAssignment(blocks=blocks, value=value, factor_values=tuple(vals))
    return best


def det_identity_residual(bases, cut_sizes) -> float:
    """Residual of the block-determinant identity for m orthonormal bases.

    Given orthonormal bases v_j = (v_{j,1},...,v_{j,d}) of R^d and cuts c_j
    with sum c_j = d, the (m-1)d x (m-1)d block matrix whose r-th row block
    is [W_1, 0, ..., W_{r+1}, ..., 0] (with W_j the last d - c_j columns of
    basis j) has |det| equal to |det| of the first c_j columns of every basis
    concatenated. Returns the absolute difference of the two sides.
    """
    mats = [np.asarray(b, dtype=float) for b in bases]
    m = len(mats)
    if m == 0:
        raise DimensionMismatch("need at least one basis")
    d = mats[0].shape[0]
    cuts = [int(c) for c in cut_sizes]
    if len(cuts) != m:
        raise DimensionMismatch("one cut size per basis required")
    for b in mats:
        if b.shape != (d, d):
            raise DimensionMismatch("each basis must be a square d x d matrix")
        if np.max(np.abs(b.T @ b - np.eye(d))) > ORTHONORMAL_TOL:
            raise RankDeficient("basis is not orthonormal within 1e-10")
    if any(c < 0 or c > d for c in cuts) or sum(cuts) != d:
        raise DimensionMismatch("cut sizes must lie in [0, d] and sum to d")

    tails = [mats[j][:, cuts[j]:] for j in range(m)]
    widths = [t.shape[1] for t in tails]
    n = (m - 1) * d
    big = np.zeros((n, n))
    offsets = np.concatenate([[0], np.cumsum(widths)]).astype(int)
    for r in range(m - 1):
        rows = slice(r * d, (r + 1) * d)
        big[rows, offsets[0]:offsets[1]] = tails[0]
        j = r + 1
        big[rows, offsets[j]:offsets[j + 1]] = tails[j]
    lhs = abs(np.linalg.det(big)) if n else 1.0

    heads = np.column_stack([mats[j][:, :cuts[j]] for j in range(m)]) if d else np.zeros((0, 0))
    rhs = abs(np.linalg.det(heads))
    return float(abs(lhs - rhs))
