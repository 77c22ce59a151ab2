"""Directed volumes of polynomial zero sets and visibility functionals.

The directed volume of Z(P) inside a region U along direction v is the
integral, over the hyperplane shadow v^perp, of the number of zeros on each
fiber line; fibers are laid out on a midpoint grid and the per-fiber zero
count is exact (Sturm chain). Mollification averages the same quantity over
a small geodesic ball on the coefficient sphere. The fading zone of P is the
set of directions where the directed volume stays below 1; its volume, via a
radial quadrature plus an inner-ellipsoid sandwich, yields visibility bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .calibration import WEDGE_RATIO_FLOOR
from .ellipsoid import (
    JohnApproximation,
    direction_grid,
    john_from_samples,
    unit_ball_volume,
)
from .errors import DimensionMismatch, HypothesisViolated, Unsupported
from .exterior import Subspace
from .poly import MultiPoly, Region, count_real_roots, restrict_to_lines

DEFAULT_CELLS = 64
MIN_GRID_FACTOR = 2  # a direction grid must have at least 2 d^2 members


class Measured(NamedTuple):
    value: float
    stderr: float


def _canonical_direction(v: np.ndarray) -> tuple[np.ndarray, float]:
    """Unit direction with positive leading sign, plus the original norm."""
    v = np.asarray(v, dtype=float).reshape(-1)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return v, 0.0
    u = v / norm
    nz = np.nonzero(np.abs(u) > 1e-300)[0]
    if nz.size and u[nz[0]] < 0:
        u = -u
    return u, norm


def _shadow_frame(u: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of u^perp (columns)."""
    return Subspace(u[:, None]).complement().basis


def _shadow_bounds(region: Region, frame: np.ndarray):
    if region.kind == "box":
        d = region.dim
        corners = np.array(
            [[region.lo[i] if (k >> i) & 1 == 0 else region.hi[i] for i in range(d)]
             for k in range(1 << d)]
        )
        proj = corners @ frame
        return proj.min(axis=0), proj.max(axis=0)
    c = region.center_point @ frame
    return c - region.radius, c + region.radius


def _fiber_counts(p: MultiPoly, region: Region, u: np.ndarray, bases: np.ndarray) -> np.ndarray:
    t0, t1, hit = region.line_clips(bases, u)
    counts = np.zeros(bases.shape[0], dtype=float)
    if not np.any(hit):
        return counts
    rows = restrict_to_lines(p, bases[hit], u)
    zero_rows = ~np.any(rows != 0.0, axis=1)
    if np.any(zero_rows):
        # fiber lies inside the zero set; nudge it off and recount
        jitter = 1e-9 * (np.max(np.abs(bases)) + 1.0)
        redo = bases[hit][zero_rows] + jitter
        rows[zero_rows] = restrict_to_lines(p, redo, u)
        zero_rows = ~np.any(rows != 0.0, axis=1)
    idx = np.nonzero(hit)[0]
    lo, hi = t0[hit], t1[hit]
    for k in range(rows.shape[0]):
        if zero_rows[k]:
            continue
        counts[idx[k]] = count_real_roots(rows[k], (lo[k], hi[k]))
    return counts


def _directed_volume_once(p: MultiPoly, region: Region, u: np.ndarray, cells: int) -> float:
    d = p.dim
    if d == 1:
        counts = _fiber_counts(p, region, u, np.zeros((1, 1)))
        return float(counts[0])
    frame = _shadow_frame(u)
    lo, hi = _shadow_bounds(region, frame)
    axes = [lo[i] + (hi[i] - lo[i]) * (np.arange(cells) + 0.5) / cells
            for i in range(d - 1)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d - 1)
    bases = mesh @ frame.T
    cell_area = float(np.prod((hi - lo) / cells))
    counts = _fiber_counts(p, region, u, bases)
    return float(np.sum(counts)) * cell_area


def directed_volume_refined(p: MultiPoly, region: Region, v: np.ndarray,
                            cells: Optional[int] = None) -> Measured:
    """Directed volume with one grid refinement; stderr is the step delta."""
    if region.dim != p.dim:
        raise DimensionMismatch("region and polynomial dimensions differ")
    u, norm = _canonical_direction(v)
    if norm == 0.0:
        return Measured(0.0, 0.0)
    n = DEFAULT_CELLS if cells is None else int(cells)
    coarse = _directed_volume_once(p, region, u, n)
    fine = _directed_volume_once(p, region, u, 2 * n) if p.dim > 1 else coarse
    return Measured(norm * fine, norm * abs(fine - coarse))


def directed_volume(p: MultiPoly, region: Region, v: np.ndarray,
                    cells: Optional[int] = None) -> float:
    """Directed volume of Z(p) in the region along v (homogeneous of degree 1).

    Exact zero counts per fiber; the quadrature error is O(grid step) and can
    be read off directed_volume_refined.
    """
    return directed_volume_refined(p, region, v, cells=cells).value


def mollified_directed_volume(p: MultiPoly, region: Region, v: np.ndarray, eps: float,
                              samples: int = 8, seed: int = 0,
                              cells: Optional[int] = None) -> Measured:
    """Average directed volume over a geodesic eps-ball on the coefficient sphere.

    Perturbations are drawn uniformly: a tangent direction orthogonal to the
    coefficient vector and a radius r = eps * U^(1/K) (K = sphere dimension;
    for eps <= 0.1 the flat radial density misstates the spherical one by
    less than eps^2 in relative terms).
    """
    if eps < 0:
        raise DimensionMismatch("mollification width must be nonnegative")
    if samples < 2:
        raise DimensionMismatch("need at least two mollification samples")
    u, norm = _canonical_direction(v)
    if norm == 0.0:
        return Measured(0.0, 0.0)
    n = DEFAULT_CELLS if cells is None else int(cells)
    vec, basis = p.to_dense_vector()
    k_sphere = vec.size - 1
    rng = np.random.default_rng(seed)
    vals = np.empty(samples)
    for s in range(samples):
        if k_sphere == 0:
            vals[s] = _directed_volume_once(p, region, u, n)
            continue
        z = rng.standard_normal(vec.size)
        z -= float(z @ vec) * vec
        nz = float(np.linalg.norm(z))
        while nz < 1e-12:
            z = rng.standard_normal(vec.size)
            z -= float(z @ vec) * vec
            nz = float(np.linalg.norm(z))
        z /= nz
        r = eps * float(rng.uniform()) ** (1.0 / k_sphere)
        pvec = math.cos(r) * vec + math.sin(r) * z
        q = MultiPoly.from_dense_vector(p.dim, pvec, basis)
        vals[s] = _directed_volume_once(q, region, u, n)
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(samples))
    return Measured(norm * mean, norm * stderr)


@dataclass(frozen=True, eq=False)
class FadingZoneEstimate:
    """Visibility bounds from the fading zone F = {v : max(|v|, V(v)) <= 1}."""

    vis: float
    vis_low: float
    vis_high: float
    stderr: float
    john: JohnApproximation
    directions: np.ndarray
    gauges: np.ndarray

    @property
    def factor(self) -> float:
        return self.john.factor


def _check_grid(grid: np.ndarray, d: int) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 2 or g.shape[1] != d:
        raise DimensionMismatch("direction grid must be (m, d)")
    m = g.shape[0]
    if m < MIN_GRID_FACTOR * d * d:
        raise DimensionMismatch(f"grid needs at least {MIN_GRID_FACTOR} d^2 = "
                                f"{MIN_GRID_FACTOR * d * d} directions")
    if np.max(np.abs(np.linalg.norm(g, axis=1) - 1.0)) > 1e-9:
        raise DimensionMismatch("grid directions must be unit vectors")
    half = m // 2
    if 2 * half != m or not np.allclose(g[:half], -g[half:], atol=1e-12):
        # accept any antipodally closed set, not just the stacked layout
        neg = -g
        dist = np.linalg.norm(g[:, None, :] - neg[None, :, :], axis=2)
        if np.max(np.min(dist, axis=1)) > 1e-9:
            raise DimensionMismatch("direction grid must be antipodally symmetric")
    return g


def fading_zone(p: MultiPoly, region: Region, grid: np.ndarray,
                eps: Optional[float] = None, samples: int = 6, seed: int = 0,
                cells: Optional[int] = None) -> FadingZoneEstimate:
    """Estimate visibility 1/|F| with an inner-ellipsoid sandwich interval.

    The gauge of F is g(v) = max(|v|, Vbar(v)) on each grid direction (Vbar
    the directed, optionally mollified, volume); |F| comes from the radial
    quadrature omega_d * mean(r^d) with r = 1/g, and the certified interval
    is [vis / C^d, vis * C^d] with C the sandwich factor of the inner
    ellipsoid fitted to the sampled boundary.
    """
    d = p.dim
    g = _check_grid(grid, d)
    m = g.shape[0]
    half = m // 2
    paired = 2 * half == m and np.allclose(g[:half], -g[half:], atol=1e-12)
    work = g[:half] if paired else g

    gauges_w = np.empty(work.shape[0])
    errs_w = np.zeros(work.shape[0])
    for i, u in enumerate(work):
        if eps is None:
            val = directed_volume_refined(p, region, u, cells=cells)
            vbar, err = val.value, 0.0
        else:
            vbar, err = mollified_directed_volume(p, region, u, eps,
                                                  samples=samples,
                                                  seed=seed + 7919 * i,
                                                  cells=cells)
        gauges_w[i] = max(1.0, vbar)
        errs_w[i] = err if vbar > 1.0 else 0.0

    if paired:
        gauges = np.concatenate([gauges_w, gauges_w])
        errs = np.concatenate([errs_w, errs_w])
    else:
        gauges, errs = gauges_w, errs_w

    r = 1.0 / gauges
    omega = unit_ball_volume(d)
    vol_f = omega * float(np.mean(r ** d))
    vis = 1.0 / vol_f
    # delta-method propagation of the per-direction mollification stderr
    dvol = omega * d * r ** (d - 1) / (gauges ** 2) / m
    var_f = float(np.sum((dvol * errs) ** 2))
    stderr = math.sqrt(var_f) / (vol_f ** 2)

    john = john_from_samples(g, gauges)
    c = john.factor
    return FadingZoneEstimate(
        vis=vis,
        vis_low=vis / c ** d,
        vis_high=vis * c ** d,
        stderr=stderr,
        john=john,
        directions=g,
        gauges=gauges,
    )


@dataclass(frozen=True, eq=False)
class VectorFieldSample:
    """Weighted vector samples (mu_i, f_i) representing a field on a cell."""

    weights: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        f = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if f.shape[0] != w.shape[0]:
            raise DimensionMismatch("one weight per vector required")
        if w.size == 0:
            raise DimensionMismatch("need at least one sample")
        if np.any(w < 0) or not np.all(np.isfinite(w)) or not np.all(np.isfinite(f)):
            raise DimensionMismatch("weights must be finite and nonnegative")
        if float(w @ np.linalg.norm(f, axis=1)) <= 0:
            raise DimensionMismatch("field has zero total mass")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "vectors", f)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def gauge(self, dirs: np.ndarray) -> np.ndarray:
        """V(v) = sum mu_i |<f_i, v>| for each row v."""
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        return np.abs(dirs @ self.vectors.T) @ self.weights


def general_visibility(field: VectorFieldSample, grid: Optional[np.ndarray] = None) -> float:
    """Visibility of the fading body {v : max(|v|, V(v)) <= 1}.

    Exact in d = 1; in higher dimensions the body volume is computed by the
    radial direction quadrature, so the value carries the grid resolution
    error only (the gauge itself is exact). Always >= 1/omega_d.
    """
    d = field.dim
    if d == 1:
        total = float(field.weights @ np.abs(field.vectors[:, 0]))
        return max(0.5, total / 2.0)
    if grid is None:
        grid = direction_grid(d, 2 * d * d + 500, seed=0)
    g = _check_grid(grid, d)
    gauges = np.maximum(1.0, field.gauge(g))
    r = 1.0 / gauges
    return 1.0 / (unit_ball_volume(d) * float(np.mean(r ** d)))


class WedgeCheck(NamedTuple):
    lhs: float
    vis: float
    ratio: float
    floor: float
    passed: bool


def wedge_estimate_check(field: VectorFieldSample, floor: Optional[float] = None) -> WedgeCheck:
    """Compare the full wedge sum of the field against its visibility.

    lhs = sum over ordered d-tuples of prod(mu) * |f(x_1) ^ ... ^ f(x_d)|.
    Requires V(v) >= 1 on unit directions (checked on a seeded grid), and
    reports lhs / vis against the calibrated floor for the dimension.
    """
    d = field.dim
    m = field.weights.size
    if m ** d > 2_000_000:
        raise Unsupported("too many ordered tuples for the exact wedge sum")
    check_dirs = direction_grid(d, 2 * d * d + 200, seed=0)
    if float(np.min(field.gauge(check_dirs))) < 1.0 - 1e-9:
        raise HypothesisViolated("directed mass V(v) dips below 1 on the sphere")
    idx = np.indices((m,) * d).reshape(d, -1).T
    mats = field.vectors[idx]
    dets = np.abs(np.linalg.det(mats)) if d > 1 else np.abs(mats[:, 0, 0])
    wprod = np.prod(field.weights[idx], axis=1)
    lhs = float(wprod @ dets)
    vis = general_visibility(field)
    used_floor = WEDGE_RATIO_FLOOR.get(d, 0.0) if floor is None else float(floor)
    ratio = lhs / vis
    return WedgeCheck(lhs=lhs, vis=vis, ratio=ratio, floor=used_floor,
                      passed=bool(ratio >= used_floor))


def augment_with_hyperplanes(p: MultiPoly, region: Region) -> MultiPoly:
    """Multiply by the d coordinate hyperplanes through the region center.

    The added factors contribute |v_i| * (facet area) to every directed
    volume, which restores the unit lower bound V(v) >= |v| on unit-scale
    regions whose facets have area >= 1.
    """
    if region.dim != p.dim:
        raise DimensionMismatch("region and polynomial dimensions differ")
    return p.multiply(MultiPoly.coordinate_product(p.dim, center=region.center))
