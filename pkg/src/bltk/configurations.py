"""Slab families, sampled varieties, and the endpoint inequality evaluators.

Slabs are neighborhoods of affine k-planes: within `size` of the base along
the core directions and within `radius` orthogonally. Families group slabs
whose cores cluster around a nominal subspace. The left-hand sides of the
endpoint inequalities are midpoint-rule integrals over the populated overlap
box with one refinement for an error estimate; variety functionals are
seeded Monte Carlo sums over product samplers.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .bl import OrthoProjectionDatum, bl_constant, pointwise_datum
from .ellipsoid import unit_ball_volume
from .errors import (
    DimensionMismatch,
    EmptyFamily,
    InfiniteBLConstant,
    Unsupported,
)
from .exterior import AffineSubspace, Subspace, subspace_wedge_norm
from .visibility import Measured

CHUNK = 200_000
MAX_CELLS = 8_000_000
MAX_TUPLES = 1_000_000
TRUNCATION_SCALE = 16.0


def default_reach(dim: int) -> float:
    """Sampling radius for cell functionals, capped far below 100 e^d."""
    return float(min(100.0 * math.exp(dim), 50.0))


@dataclass(frozen=True, eq=False)
class Slab:
    """Neighborhood of an affine k-plane: |core component| <= size,
    |orthogonal residual| <= radius. size may be infinite; k = 0 is a ball."""

    core: AffineSubspace
    size: float = math.inf
    radius: float = 1.0
    weight: float = 1.0

    def __post_init__(self):
        if not self.size > 0:
            raise DimensionMismatch("slab size must be positive")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise DimensionMismatch("slab radius must be finite and positive")

    @property
    def dim(self) -> int:
        return self.core.direction.ambient_dim

    @property
    def core_dim(self) -> int:
        return self.core.direction.dim

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        q = pts - self.core.base_point
        basis = self.core.direction.basis
        if self.core_dim:
            t = q @ basis
            along = np.linalg.norm(t, axis=-1)
            resid = np.linalg.norm(q - t @ basis.T, axis=-1)
        else:
            along = np.zeros(q.shape[0])
            resid = np.linalg.norm(q, axis=-1)
        return (along <= self.size) & (resid <= self.radius)

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned overestimate; infinite along unbounded core rows."""
        basis = self.core.direction.basis
        row = np.linalg.norm(basis, axis=1) if self.core_dim else np.zeros(self.dim)
        extent = np.where(row > 1e-14,
                          self.size * row if math.isfinite(self.size)
                          else np.inf,
                          0.0) + self.radius
        return self.core.base_point - extent, self.core.base_point + extent


@dataclass(frozen=True, eq=False)
class SlabFamily:
    """Slabs of a common core dimension clustered near a nominal subspace."""

    index: int
    slabs: tuple
    nominal: Subspace
    delta: float = 0.05

    def __post_init__(self):
        slabs = tuple(self.slabs)
        if not slabs:
            raise EmptyFamily(f"family {self.index} has no slabs")
        d = slabs[0].dim
        k = self.nominal.dim
        for s in slabs:
            if s.dim != d or s.core_dim != k:
                raise DimensionMismatch("family slabs must share dimensions")
        if self.nominal.ambient_dim != d:
            raise DimensionMismatch("nominal subspace lives elsewhere")
        object.__setattr__(self, "slabs", slabs)
        if k:
            worst = max(self._max_angle(s) for s in slabs)
            if worst > self.delta + 1e-12:
                warnings.warn(
                    f"family {self.index}: core direction {worst:.3f} rad from "
                    f"nominal exceeds delta={self.delta}", stacklevel=2)

    def _max_angle(self, slab: Slab) -> float:
        sig = np.linalg.svd(self.nominal.basis.T @ slab.core.direction.basis,
                            compute_uv=False)
        return float(math.acos(min(1.0, float(sig[-1]))))

    @property
    def dim(self) -> int:
        return self.slabs[0].dim

    @property
    def core_dim(self) -> int:
        return self.nominal.dim

    @property
    def mass(self) -> float:
        """A(j): the number of slabs."""
        return float(len(self.slabs))

    @property
    def weight_mass(self) -> float:
        return float(sum(abs(s.weight) for s in self.slabs))

    def counts(self, points: np.ndarray) -> np.ndarray:
        total = np.zeros(np.atleast_2d(points).shape[0])
        for s in self.slabs:
            total += s.contains(points)
        return total

    def weighted_indicators(self, points: np.ndarray) -> np.ndarray:
        cols = [s.weight * s.contains(points) for s in self.slabs]
        return np.stack(cols, axis=1)

    def union_bbox(self) -> tuple[np.ndarray, np.ndarray]:
        boxes = [s.bbox() for s in self.slabs]
        lo = np.min([b[0] for b in boxes], axis=0)
        hi = np.max([b[1] for b in boxes], axis=0)
        return lo, hi


def _overlap_domain(families: Sequence[SlabFamily]) -> Optional[tuple]:
    """Populated bounding box: intersection of family union boxes plus a
    2 * radius margin; unbounded directions are truncated with a warning."""
    lo = np.max([f.union_bbox()[0] for f in families], axis=0)
    hi = np.min([f.union_bbox()[1] for f in families], axis=0)
    if np.any(lo >= hi):
        return None
    max_radius = max(s.radius for f in families for s in f.slabs)
    finite = np.concatenate([lo[np.isfinite(lo)], hi[np.isfinite(hi)]])
    cap = max(float(np.max(np.abs(finite))) if finite.size else 0.0,
              TRUNCATION_SCALE * max_radius)
    if np.any(~np.isfinite(lo)) or np.any(~np.isfinite(hi)):
        warnings.warn("unbounded slab overlap truncated to the finite box",
                      stacklevel=3)
    lo = np.where(np.isfinite(lo), lo, -cap)
    hi = np.where(np.isfinite(hi), hi, cap)
    margin = 2.0 * max_radius
    return lo - margin, hi + margin


def _default_h(families: Sequence[SlabFamily]) -> float:
    return min(s.radius for f in families for s in f.slabs) / 8.0


def _midpoint_sum(integrand: Callable[[np.ndarray], np.ndarray],
                  lo: np.ndarray, hi: np.ndarray, h: float) -> float:
    d = lo.size
    counts = np.maximum(1, np.ceil((hi - lo) / h).astype(int))
    if int(np.prod(counts.astype(float))) > MAX_CELLS:
        raise Unsupported("quadrature grid exceeds the cell cap")
    axes = [lo[i] + (np.arange(counts[i]) + 0.5) * (hi[i] - lo[i]) / counts[i]
            for i in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    cell = float(np.prod((hi - lo) / counts))
    total = 0.0
    for start in range(0, pts.shape[0], CHUNK):
        total += float(np.sum(integrand(pts[start:start + CHUNK])))
    return total * cell


def _refined(integrand, lo, hi, h: float) -> Measured:
    coarse = _midpoint_sum(integrand, lo, hi, h)
    fine = _midpoint_sum(integrand, lo, hi, h / 2.0)
    return Measured(fine, abs(fine - coarse))


def _check_family_setup(families: Sequence[SlabFamily],
                        require_k_sum: bool) -> int:
    if not families:
        raise EmptyFamily("no families given")
    if len(families) < 2:
        raise DimensionMismatch("need at least two families")
    d = families[0].dim
    for f in families:
        if f.dim != d:
            raise DimensionMismatch("families have mixed ambient dimensions")
    if require_k_sum and sum(f.core_dim for f in families) != d:
        raise DimensionMismatch("core dimensions must sum to the dimension")
    return d


def lhs_kjplane(families: Sequence[SlabFamily],
                h: Optional[float] = None) -> Measured:
    """Midpoint integral of (prod_j sum_a chi_{T_{j,a}})^{1/(n-1)}."""
    _check_family_setup(families, require_k_sum=True)
    n = len(families)
    dom = _overlap_domain(families)
    if dom is None:
        return Measured(0.0, 0.0)
    h = _default_h(families) if h is None else float(h)
    power = 1.0 / (n - 1)

    def integrand(pts):
        prod = families[0].counts(pts)
        for f in families[1:]:
            prod = prod * f.counts(pts)
        return prod ** power

    return _refined(integrand, dom[0], dom[1], h)


class KjplaneReport(NamedTuple):
    lhs: Measured
    rhs: float
    ratio: float


def kjplane_ratio(families: Sequence[SlabFamily],
                  h: Optional[float] = None) -> KjplaneReport:
    """LHS against the slab-count comparator prod A(j)^{1/(n-1)}."""
    lhs = lhs_kjplane(families, h=h)
    n = len(families)
    rhs = float(np.prod([f.mass ** (1.0 / (n - 1)) for f in families]))
    return KjplaneReport(lhs, rhs, lhs.value / rhs)


class AffineReport(NamedTuple):
    lhs: Measured
    rhs: float
    ratio: float


def lhs_affine(families: Sequence[SlabFamily],
               h: Optional[float] = None) -> AffineReport:
    """Weighted LHS with the per-tuple wedge of the core subspaces.

    Integrand: |sum over slab tuples prod_j rho_{j,a_j} chi_{j,a_j} times
    |H_{1,a_1} ^ ... ^ H_{n,a_n}||^{1/(n-1)}; comparator prod (sum |rho|)^{1/(n-1)}.
    """
    d = _check_family_setup(families, require_k_sum=True)
    n = len(families)
    sizes = [len(f.slabs) for f in families]
    if int(np.prod([float(s) for s in sizes])) > MAX_TUPLES:
        raise Unsupported("too many slab tuples for the wedge tensor")
    tensor = np.zeros(sizes)
    for idx in np.ndindex(*sizes):
        cores = [families[j].slabs[idx[j]].core.direction
                 for j in range(n)]
        tensor[idx] = subspace_wedge_norm(cores)
    dom = _overlap_domain(families)
    if dom is None:
        return AffineReport(Measured(0.0, 0.0), _affine_rhs(families, n), 0.0)
    h = _default_h(families) if h is None else float(h)
    power = 1.0 / (n - 1)
    letters = "abcdefghij"[:n]
    spec = ",".join("z" + letters[j] for j in range(n))
    spec += "," + letters + "->z"

    def integrand(pts):
        mats = [f.weighted_indicators(pts) for f in families]
        inner = np.einsum(spec, *mats, tensor)
        return np.abs(inner) ** power

    lhs = _refined(integrand, dom[0], dom[1], h)
    rhs = _affine_rhs(families, n)
    return AffineReport(lhs, rhs, lhs.value / rhs)


def _affine_rhs(families, n: int) -> float:
    return float(np.prod([f.weight_mass ** (1.0 / (n - 1)) for f in families]))


class BLQuadReport(NamedTuple):
    lhs: Measured
    rhs: float
    ratio: float
    constant: float


def lhs_bl(families: Sequence[SlabFamily], exponents: Sequence[Fraction],
           h: Optional[float] = None) -> BLQuadReport:
    """Integral of prod_j (sum_a chi)^{p_j}, gated on a finite constant for
    the datum built from the nominal kernels; comparator prod A(j)^{p_j}."""
    _check_family_setup(families, require_k_sum=False)
    exps = tuple(Fraction(p) for p in exponents)
    if len(exps) != len(families):
        raise DimensionMismatch("one exponent per family required")
    kernels = tuple(f.nominal for f in families)
    datum = OrthoProjectionDatum(kernels=kernels, exponents=exps)
    result = bl_constant(datum.as_bl_datum())
    if not result.finite:
        raise InfiniteBLConstant(
            f"datum constant diverges ({result.reason}); the bound is empty")
    dom = _overlap_domain(families)
    rhs = float(np.prod([f.mass ** float(p) for f, p in zip(families, exps)]))
    if dom is None:
        return BLQuadReport(Measured(0.0, 0.0), rhs, 0.0, result.value)
    h = _default_h(families) if h is None else float(h)
    powers = [float(p) for p in exps]

    def integrand(pts):
        prod = families[0].counts(pts) ** powers[0]
        for f, p in zip(families[1:], powers[1:]):
            prod = prod * f.counts(pts) ** p
        return prod

    lhs = _refined(integrand, dom[0], dom[1], h)
    return BLQuadReport(lhs, rhs, lhs.value / rhs, result.value)


class SweepRow(NamedTuple):
    size: float
    lhs: float
    rhs: float
    ratio: float


class SweepReport(NamedTuple):
    rows: tuple
    slope: float
    mode: str


def fit_log_slope(sizes: Sequence[float], ratios: Sequence[float]) -> float:
    """Least-squares slope of log ratio against log size."""
    xs = np.log(np.asarray(sizes, dtype=float))
    ys = np.log(np.asarray(ratios, dtype=float))
    if xs.size < 2:
        raise DimensionMismatch("slope needs at least two sizes")
    return float(np.polyfit(xs, ys, 1)[0])


def size_sweep(generator: Callable[[float], Sequence[SlabFamily]],
               sizes: Sequence[float], mode: str = "kjplane",
               h: Optional[float] = None,
               exponents: Optional[Sequence[Fraction]] = None) -> SweepReport:
    """Evaluate the configured ratio across scales and fit the log-log slope.

    Endpoint behavior shows up as a flat trace; any systematic power of the
    size appears directly in the fitted slope.
    """
    if mode not in ("kjplane", "bl"):
        raise DimensionMismatch(f"unknown sweep mode {mode!r}")
    rows = []
    for r in sizes:
        families = list(generator(float(r)))
        if mode == "kjplane":
            rep = kjplane_ratio(families, h=h)
        else:
            if exponents is None:
                raise DimensionMismatch("bl sweep mode needs exponents")
            rep = lhs_bl(families, exponents, h=h)
        rows.append(SweepRow(float(r), rep.lhs.value, rep.rhs, rep.ratio))
    slope = fit_log_slope([r.size for r in rows], [r.ratio for r in rows])
    return SweepReport(tuple(rows), slope, mode)


# ---------------------------------------------------------------------------
# sampled varieties


@dataclass(frozen=True, eq=False)
class VarietyModel:
    """Sampler for a k-dimensional variety stratum with a degree tag.

    kinds: "planes" (union of affine k-planes, degree = count), "sphere"
    (degree 2), "graph" (chart over a parameter box, caller-supplied degree).
    """

    kind: str
    degree: int
    pieces: tuple = ()
    center: Optional[np.ndarray] = None
    radius: float = 1.0
    chart: Optional[Callable] = None
    jacobian: Optional[Callable] = None
    param_lo: Optional[np.ndarray] = None
    param_hi: Optional[np.ndarray] = None
    graph_dim: int = 0

    @classmethod
    def planes(cls, pieces: Sequence[AffineSubspace]) -> "VarietyModel":
        pieces = tuple(pieces)
        if not pieces:
            raise EmptyFamily("plane union needs at least one piece")
        k = pieces[0].direction.dim
        d = pieces[0].direction.ambient_dim
        for p in pieces:
            if p.direction.dim != k or p.direction.ambient_dim != d:
                raise DimensionMismatch("plane pieces must share dimensions")
        if k == 0 or k >= d:
            raise DimensionMismatch("plane pieces must be proper and positive")
        return cls(kind="planes", degree=len(pieces), pieces=pieces)

    @classmethod
    def sphere(cls, center, radius: float) -> "VarietyModel":
        center = np.asarray(center, dtype=float).reshape(-1)
        if not radius > 0:
            raise DimensionMismatch("sphere radius must be positive")
        return cls(kind="sphere", degree=2, center=center, radius=float(radius))

    @classmethod
    def graph(cls, chart, jacobian, param_lo, param_hi, degree: int,
              ambient_dim: int) -> "VarietyModel":
        lo = np.asarray(param_lo, dtype=float).reshape(-1)
        hi = np.asarray(param_hi, dtype=float).reshape(-1)
        if lo.size != hi.size or np.any(lo >= hi):
            raise DimensionMismatch("bad parameter box")
        return cls(kind="graph", degree=int(degree), chart=chart,
                   jacobian=jacobian, param_lo=lo, param_hi=hi,
                   graph_dim=int(ambient_dim))

    @property
    def dim(self) -> int:
        if self.kind == "planes":
            return self.pieces[0].direction.ambient_dim
        if self.kind == "sphere":
            return self.center.size
        return self.graph_dim

    @property
    def k(self) -> int:
        if self.kind == "planes":
            return self.pieces[0].direction.dim
        if self.kind == "sphere":
            return self.dim - 1
        return self.param_lo.size

    def sample(self, rng: np.random.Generator, n: int, center: np.ndarray,
               reach: float):
        """Draw n points with tangent frames and measure weights so that
        mean(w * g) estimates the surface integral over the reach ball."""
        center = np.asarray(center, dtype=float)
        if self.kind == "planes":
            return self._sample_planes(rng, n, center, reach)
        if self.kind == "sphere":
            return self._sample_sphere(rng, n, center, reach)
        return self._sample_graph(rng, n, center, reach)

    def _sample_planes(self, rng, n, center, reach):
        d, k = self.dim, self.k
        pts = np.zeros((n, d))
        tangents = np.zeros((n, d, k))
        weights = np.zeros(n)
        m = len(self.pieces)
        choice = rng.integers(0, m, size=n)
        ball_k = unit_ball_volume(k)
        for idx, piece in enumerate(self.pieces):
            mask = choice == idx
            cnt = int(np.sum(mask))
            if cnt == 0:
                continue
            basis = piece.direction.basis
            rel = center - piece.base_point
            foot = piece.base_point + basis @ (basis.T @ rel)
            gap2 = float(np.dot(center - foot, center - foot))
            tangents[mask] = basis
            if gap2 >= reach * reach:
                continue  # piece misses the ball: weight stays zero
            r_eff = math.sqrt(reach * reach - gap2)
            u = rng.standard_normal((cnt, k))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            radii = r_eff * rng.random(cnt) ** (1.0 / k)
            pts[mask] = foot + (radii[:, None] * u) @ basis.T
            weights[mask] = m * ball_k * r_eff ** k
        return pts, tangents, weights

    def _sample_sphere(self, rng, n, center, reach):
        d = self.dim
        u = rng.standard_normal((n, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        pts = self.center + self.radius * u
        # tangent frame = orthogonal complement of the radial direction
        _un, _s, vt = np.linalg.svd(u[:, None, :])
        tangents = np.transpose(vt[:, 1:, :], (0, 2, 1))
        area = d * unit_ball_volume(d) * self.radius ** (d - 1)
        inside = np.linalg.norm(pts - center, axis=1) <= reach
        return pts, tangents, area * inside.astype(float)

    def _sample_graph(self, rng, n, center, reach):
        lo, hi = self.param_lo, self.param_hi
        params = lo + (hi - lo) * rng.random((n, lo.size))
        pts = np.asarray(self.chart(params), dtype=float)
        jac = np.asarray(self.jacobian(params), dtype=float)
        gram = np.einsum("ndk,ndl->nkl", jac, jac)
        dets = np.sqrt(np.maximum(np.linalg.det(gram), 0.0))
        q, _ = np.linalg.qr(jac)
        box = float(np.prod(hi - lo))
        inside = np.linalg.norm(pts - center, axis=1) <= reach
        return pts, q, box * dets * inside.astype(float)


@dataclass(frozen=True, eq=False)
class CellFunctional:
    """Per-cell transversal interaction value with its sampling error."""

    cell: tuple
    value: float
    stderr: float

    def __post_init__(self):
        if self.value < 0:
            raise DimensionMismatch("cell functional must be nonnegative")


def _check_models(models: Sequence[VarietyModel]) -> int:
    if not models:
        raise EmptyFamily("no variety models given")
    d = models[0].dim
    for m in models:
        if m.dim != d:
            raise DimensionMismatch("models have mixed ambient dimensions")
    if sum(m.k for m in models) != d:
        raise DimensionMismatch("tangent dimensions must sum to the dimension")
    return d


def cell_functional_variety(models: Sequence[VarietyModel], center,
                            reach: Optional[float] = None,
                            n_samples: int = 4000, seed: int = 0,
                            cell: tuple = (0,),
                            bl_weight: Optional[Callable] = None) -> CellFunctional:
    """Monte Carlo G(Q): product-sampler average of the tangent wedge times
    measure weights over the reach ball around the cell center."""
    d = _check_models(models)
    center = np.asarray(center, dtype=float).reshape(-1)
    if center.size != d:
        raise DimensionMismatch("cell center has the wrong dimension")
    reach = default_reach(d) if reach is None else float(reach)
    rng = np.random.default_rng(seed)
    frames = []
    weights = np.ones(n_samples)
    for model in models:
        _pts, tangents, w = model.sample(rng, n_samples, center, reach)
        frames.append(tangents)
        weights = weights * w
    mats = np.concatenate(frames, axis=2)
    vals = weights * np.abs(np.linalg.det(mats))
    if bl_weight is not None:
        vals = vals * bl_weight(frames)
    g = float(np.mean(vals))
    err = float(np.std(vals) / math.sqrt(n_samples))
    return CellFunctional(cell=tuple(cell), value=g, stderr=err)


def unit_cell_centers(lo, hi) -> np.ndarray:
    """Centers of the unit lattice cells covering the box [lo, hi)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    axes = [np.arange(l, h) + 0.5 for l, h in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


class VarietyReport(NamedTuple):
    total: float
    stderr: float
    rhs: float
    ratio: float
    cells: tuple


def _quantized_key(frames_i) -> bytes:
    parts = []
    for t in frames_i:
        proj = t @ t.T
        parts.append(np.round(proj / 1e-3).astype(np.int64).tobytes())
    return b"".join(parts)


def _bl_weight_factory(models: Sequence[VarietyModel], tau: int):
    """Pointwise BL^{-tau} from the sampled tangent kernels, memoized on
    projector quantization; a divergent pointwise datum weighs zero."""
    memo: dict[bytes, float] = {}

    def weight(frames):
        n_samples = frames[0].shape[0]
        out = np.empty(n_samples)
        for i in range(n_samples):
            tang = [f[i] for f in frames]
            key = _quantized_key(tang)
            if key not in memo:
                try:
                    kers = [Subspace(t) for t in tang]
                    datum = pointwise_datum(kers, tau=tau)
                    res = bl_constant(datum.as_bl_datum(), tol=1e-8)
                    memo[key] = res.value ** (-tau) if res.finite else 0.0
                except DimensionMismatch:
                    memo[key] = 0.0
            out[i] = memo[key]
        return out

    return weight


def variety_inequality_check(models: Sequence[VarietyModel],
                             centers: np.ndarray,
                             reach: Optional[float] = None,
                             n_samples: int = 4000, seed: int = 0,
                             mode: str = "plain",
                             tau: int = 1,
                             exponents: Optional[Sequence[float]] = None
                             ) -> VarietyReport:
    """Sum of per-cell functionals to the theorem power against the degree
    comparator prod A(j)^{p_j}; bl_weighted mode folds BL^{-tau} into G."""
    d = _check_models(models)
    n = len(models)
    if n < 2:
        raise DimensionMismatch("need at least two models")
    if mode not in ("plain", "bl_weighted"):
        raise DimensionMismatch(f"unknown mode {mode!r}")
    if mode == "bl_weighted":
        total_rank = sum(d - m.k for m in models)
        if total_rank != tau * d:
            raise DimensionMismatch("tau does not balance the tangent ranks")
        power = 1.0 / tau
        bl_weight = _bl_weight_factory(models, tau)
    else:
        power = 1.0 / (n - 1)
        bl_weight = None
    if exponents is None:
        exps = [power] * n
    else:
        exps = [float(p) for p in exponents]
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    cells = []
    total = 0.0
    var = 0.0
    for i, center in enumerate(centers):
        cf = cell_functional_variety(models, center, reach=reach,
                                     n_samples=n_samples,
                                     seed=seed + 7919 * i, cell=(i,),
                                     bl_weight=bl_weight)
        cells.append(cf)
        total += cf.value ** power
        if cf.value > 0:
            deriv = power * cf.value ** (power - 1.0)
            var += (deriv * cf.stderr) ** 2
    rhs = float(np.prod([m.degree ** p for m, p in zip(models, exps)]))
    return VarietyReport(total=total, stderr=math.sqrt(var), rhs=rhs,
                         ratio=total / rhs, cells=tuple(cells))
