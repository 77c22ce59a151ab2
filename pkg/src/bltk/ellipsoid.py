"""Origin-symmetric ellipsoid calculus and inner ellipsoid approximation.

An ellipsoid is stored by its shape matrix Q (symmetric positive definite):
E = {x : x^T Q x <= 1}. Sections and projections onto a subspace V are
returned in the coordinates of V's orthonormal basis, so they are ordinary
lower-dimensional ellipsoids and the duality identities can be checked by
matrix equality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import cvxpy as cp
import numpy as np
from scipy.spatial import ConvexHull

from .errors import DimensionMismatch, IllConditioned, UnboundedBody
from .exterior import Subspace

SYMMETRY_TOL = 1e-12
EIG_FLOOR = 1e-14
COND_LIMIT = 1e12


def unit_ball_volume(d: int) -> float:
    """Lebesgue volume of the unit ball in R^d."""
    if d < 0:
        raise DimensionMismatch("dimension must be nonnegative")
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """Origin-symmetric ellipsoid {x : x^T shape x <= 1}."""

    shape: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.shape, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise DimensionMismatch("shape matrix must be square")
        scale = max(1.0, float(np.max(np.abs(q))))
        if np.max(np.abs(q - q.T)) > SYMMETRY_TOL * scale:
            raise IllConditioned("shape matrix is not symmetric within 1e-12")
        q = 0.5 * (q + q.T)
        if np.min(np.linalg.eigvalsh(q)) <= EIG_FLOOR:
            raise IllConditioned("shape matrix must be positive definite")
        object.__setattr__(self, "shape", q)

    @property
    def dim(self) -> int:
        return self.shape.shape[0]

    @property
    def semi_axes(self) -> np.ndarray:
        """Semi-axis lengths, descending."""
        return np.sort(1.0 / np.sqrt(np.linalg.eigvalsh(self.shape)))[::-1]

    def gauge(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.sqrt(x @ self.shape @ x))

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        return self.gauge(x) <= 1.0 + tol


def volume(e: Ellipsoid) -> float:
    """vol(E) = omega_d / sqrt(det Q)."""
    sign, logdet = np.linalg.slogdet(e.shape)
    if sign <= 0:
        raise IllConditioned("shape matrix must be positive definite")
    return unit_ball_volume(e.dim) * math.exp(-0.5 * logdet)


def dual_ellipsoid(e: Ellipsoid) -> Ellipsoid:
    """Polar body: semi-axes are reciprocals along the same principal axes."""
    if np.linalg.cond(e.shape) > COND_LIMIT:
        raise IllConditioned("condition number exceeds 1e12")
    lam, vec = np.linalg.eigh(e.shape)
    inv = (vec / lam) @ vec.T
    return Ellipsoid(0.5 * (inv + inv.T))


def _check_subspace(e: Ellipsoid, v: Subspace):
    if v.ambient_dim != e.dim:
        raise DimensionMismatch("subspace ambient dimension differs from ellipsoid")
    if v.dim == 0:
        raise DimensionMismatch("section/projection needs a nonzero subspace")


def section(e: Ellipsoid, v: Subspace) -> Ellipsoid:
    """E intersected with V, in the coordinates of V's basis: B^T Q B."""
    _check_subspace(e, v)
    b = v.basis
    return Ellipsoid(b.T @ e.shape @ b)


def projection(e: Ellipsoid, v: Subspace) -> Ellipsoid:
    """Orthogonal shadow of E on V, in V's coordinates: (B^T Q^-1 B)^-1."""
    _check_subspace(e, v)
    if np.linalg.cond(e.shape) > COND_LIMIT:
        raise IllConditioned("condition number exceeds 1e12")
    b = v.basis
    inner = b.T @ np.linalg.solve(e.shape, b)
    out = np.linalg.inv(0.5 * (inner + inner.T))
    return Ellipsoid(0.5 * (out + out.T))


def direction_grid(d: int, count: Optional[int] = None, seed: int = 0) -> np.ndarray:
    """Antipodally symmetric unit directions: +-e_i plus a seeded uniform fill.

    Returns a (2p, d) array whose second half is the negation of the first,
    with 2p >= max(count, 2d). Default count is 2 d^2 + 500.
    """
    if d < 1:
        raise DimensionMismatch("dimension must be positive")
    if count is None:
        count = 2 * d * d + 500
    pairs = max((int(count) + 1) // 2, d)
    rng = np.random.default_rng(seed)
    extra = pairs - d
    g = rng.standard_normal((extra, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    half = np.vstack([np.eye(d), g])
    return np.vstack([half, -half])


@dataclass(frozen=True, eq=False)
class SymmetricBodyOracle:
    """Bounded origin-symmetric convex body given by its gauge function.

    gauge(x) = inf {t > 0 : x/t in body}; it must be even, positively
    homogeneous, and bounded away from 0 on the unit sphere.
    """

    dim: int
    gauge: Callable[[np.ndarray], float]
    sample_budget: Optional[int] = None

    def budget(self) -> int:
        if self.sample_budget is not None:
            return int(self.sample_budget)
        return 2 * self.dim * self.dim + 500


@dataclass(frozen=True, eq=False)
class JohnApproximation:
    """Inner ellipsoid with a sandwich certificate on the sampled directions.

    inner is contained in the body along every sampled direction, and the
    body is contained in factor * inner along every sampled direction.
    """

    inner: Ellipsoid
    factor: float
    directions: np.ndarray
    gauges: np.ndarray


def _gauge_samples(body: SymmetricBodyOracle, seed: int = 0):
    dirs = direction_grid(body.dim, body.budget(), seed=seed)
    gauges = np.array([float(body.gauge(v)) for v in dirs])
    if np.any(~np.isfinite(gauges)) or np.any(gauges <= 1e-9):
        raise UnboundedBody("gauge vanishes (or blows up) on a sampled direction")
    half = dirs.shape[0] // 2
    if np.max(np.abs(gauges[:half] - gauges[half:])) > 1e-8 * np.max(gauges):
        raise ValueError("gauge is not even on antipodal sample pairs")
    return dirs, gauges


def john_from_samples(dirs: np.ndarray, gauges: np.ndarray) -> JohnApproximation:
    """Max-volume inscribed ellipsoid of the sampled boundary point hull."""
    d = dirs.shape[1]
    points = dirs / gauges[:, None]
    if d == 1:
        r = float(np.max(np.abs(points)))
        inner = Ellipsoid(np.array([[1.0 / (r * r)]]))
        t = np.abs(points[:, 0]) / r
        return JohnApproximation(inner, float(1.0 / np.min(t)), dirs, gauges)

    hull = ConvexHull(points)
    normals = hull.equations[:, :-1]
    offsets = -hull.equations[:, -1]
    c_var = cp.Variable((d, d), PSD=True)
    constraints = [cp.norm(c_var @ normals[i]) <= offsets[i] for i in range(len(offsets))]
    prob = cp.Problem(cp.Maximize(cp.log_det(c_var)), constraints)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.SolverError:
        prob.solve(solver=cp.SCS)
    if c_var.value is None:
        raise IllConditioned("inscribed-ellipsoid solve failed")
    c = 0.5 * (c_var.value + c_var.value.T)
    lam, vec = np.linalg.eigh(c)
    if np.min(lam) <= 1e-12:
        raise IllConditioned("inscribed ellipsoid is degenerate")
    q = (vec / (lam * lam)) @ vec.T

    # restore exact containment on the sampled directions, then certify
    t = np.sqrt(np.einsum("ij,jk,ik->i", points, q, points))
    alpha = float(np.min(t))
    if alpha < 1.0:
        q = q / (alpha * alpha)
        t = t / alpha
    inner = Ellipsoid(0.5 * (q + q.T))
    return JohnApproximation(inner, float(np.max(t)), dirs, gauges)


def john_ellipsoid(body: SymmetricBodyOracle, seed: int = 0) -> JohnApproximation:
    """Inner ellipsoid for a gauge oracle; factor <= sqrt(d) up to sample slack."""
    dirs, gauges = _gauge_samples(body, seed=seed)
    return john_from_samples(dirs, gauges)


def dual_membership(body: SymmetricBodyOracle, v: np.ndarray, seed: int = 0) -> bool:
    """Whether v lies in the dual body, tested on sampled boundary points.

    v is in the dual iff <v, x> <= 1 for every x in the body; the supremum is
    approximated over the sampled boundary points, so the answer can err only
    for v within sampling slack of the dual boundary.
    """
    dirs, gauges = _gauge_samples(body, seed=seed)
    v = np.asarray(v, dtype=float)
    if v.shape != (body.dim,):
        raise DimensionMismatch("direction has wrong dimension")
    pairing = np.abs((dirs / gauges[:, None]) @ v)
    return bool(np.max(pairing) <= 1.0 + 1e-9)
