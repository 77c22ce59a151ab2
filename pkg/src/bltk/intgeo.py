"""Translation-averaged intersection identities for parametric patches.

The two sides of the identity are computed independently: the left side is a
tensor midpoint quadrature of chi_U(base-point differences) times the wedge
norm of the concatenated normal spaces; the right side Monte Carlo averages
the number of transversal intersection points of Z_1 with the translated
copies of the other patches. Intersection counting is exact per sample and
only available for specific shape classes (all-affine in any dimension,
curve x curve in the plane, curve x surface in space); everything else
raises UnsupportedShapes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .ellipsoid import unit_ball_volume
from .errors import DimensionMismatch, UnsupportedShapes
from .exterior import Subspace, orthonormalize

CHUNK = 200_000
QUAD_SAFETY = 3.0


class Measured(NamedTuple):
    value: float
    stderr: float


# ---------------------------------------------------------------------------
# patches

@dataclass(frozen=True, eq=False)
class AffinePatch:
    """u in [0,1]^q  ->  base + frame @ u (frame columns are the edges)."""

    base: np.ndarray
    frame: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.base, dtype=float).reshape(-1)
        f = np.atleast_2d(np.asarray(self.frame, dtype=float))
        if f.shape[0] != b.shape[0]:
            raise DimensionMismatch("frame rows must match the ambient dimension")
        if not 1 <= f.shape[1] <= f.shape[0]:
            raise DimensionMismatch("patch dimension must lie in [1, d]")
        if np.linalg.matrix_rank(f) < f.shape[1]:
            raise DimensionMismatch("frame columns must be independent")
        object.__setattr__(self, "base", b)
        object.__setattr__(self, "frame", f)

    @property
    def ambient_dim(self) -> int:
        return self.base.shape[0]

    @property
    def patch_dim(self) -> int:
        return self.frame.shape[1]

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.patch_dim

    @property
    def degree(self) -> int:
        return 1

    def measure(self) -> float:
        s = np.linalg.svd(self.frame, compute_uv=False)
        return float(np.prod(s))

    def bbox(self):
        q = self.patch_dim
        corners = np.array([[(k >> i) & 1 for i in range(q)] for k in range(1 << q)],
                           dtype=float)
        pts = self.base[None, :] + corners @ self.frame.T
        return pts.min(axis=0), pts.max(axis=0)

    def nodes(self, res: int):
        q = self.patch_dim
        axes = [(np.arange(res) + 0.5) / res for _ in range(q)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, q)
        pts = self.base[None, :] + mesh @ self.frame.T
        normal = orthonormalize(list(self.frame.T)).complement().basis
        n = pts.shape[0]
        frames = np.broadcast_to(normal, (n,) + normal.shape)
        w = np.full(n, self.measure() / n)
        return pts, frames, w


@dataclass(frozen=True, eq=False)
class CirclePatch:
    """Circle (or arc) of the given radius in the plane spanned by two axes."""

    center: np.ndarray
    axis_u: np.ndarray
    axis_v: np.ndarray
    radius: float
    theta0: float = 0.0
    theta1: float = 2.0 * math.pi

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        u = np.asarray(self.axis_u, dtype=float).reshape(-1)
        v = np.asarray(self.axis_v, dtype=float).reshape(-1)
        if u.shape != c.shape or v.shape != c.shape:
            raise DimensionMismatch("axes must match the center dimension")
        if self.radius <= 0:
            raise DimensionMismatch("radius must be positive")
        if not self.theta0 < self.theta1 <= self.theta0 + 2.0 * math.pi + 1e-12:
            raise DimensionMismatch("need theta0 < theta1 <= theta0 + 2 pi")
        gram = np.array([[u @ u, u @ v], [u @ v, v @ v]])
        if np.max(np.abs(gram - np.eye(2))) > 1e-10:
            raise DimensionMismatch("axes must be orthonormal")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "axis_u", u)
        object.__setattr__(self, "axis_v", v)

    @property
    def ambient_dim(self) -> int:
        return self.center.shape[0]

    @property
    def patch_dim(self) -> int:
        return 1

    @property
    def codim(self) -> int:
        return self.ambient_dim - 1

    @property
    def degree(self) -> int:
        return 2

    def measure(self) -> float:
        return self.radius * (self.theta1 - self.theta0)

    def bbox(self):
        amp = self.radius * np.sqrt(self.axis_u ** 2 + self.axis_v ** 2)
        return self.center - amp, self.center + amp

    def angles(self, res: int) -> np.ndarray:
        return self.theta0 + (self.theta1 - self.theta0) * (np.arange(res) + 0.5) / res

    def point_at(self, theta: np.ndarray) -> np.ndarray:
        theta = np.atleast_1d(theta)
        return (self.center[None, :]
                + self.radius * (np.cos(theta)[:, None] * self.axis_u[None, :]
                                 + np.sin(theta)[:, None] * self.axis_v[None, :]))

    def in_range(self, theta: np.ndarray) -> np.ndarray:
        span = self.theta1 - self.theta0
        rel = np.mod(theta - self.theta0, 2.0 * math.pi)
        return rel <= span + 1e-12

    def nodes(self, res: int):
        theta = self.angles(res)
        pts = self.point_at(theta)
        radial = (np.cos(theta)[:, None] * self.axis_u[None, :]
                  + np.sin(theta)[:, None] * self.axis_v[None, :])
        d = self.ambient_dim
        if d == 2:
            frames = radial[:, :, None]
        else:
            tangent = (-np.sin(theta)[:, None] * self.axis_u[None, :]
                       + np.cos(theta)[:, None] * self.axis_v[None, :])
            frames = np.empty((res, d, d - 1))
            for k in range(res):
                frames[k] = Subspace(tangent[k][:, None]).complement().basis
        w = np.full(res, self.measure() / res)
        return pts, frames, w


@dataclass(frozen=True, eq=False)
class SpherePatch:
    """Full round 2-sphere in R^3."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        if c.shape[0] != 3:
            raise DimensionMismatch("sphere patches live in R^3")
        if self.radius <= 0:
            raise DimensionMismatch("radius must be positive")
        object.__setattr__(self, "center", c)

    @property
    def ambient_dim(self) -> int:
        return 3

    @property
    def patch_dim(self) -> int:
        return 2

    @property
    def codim(self) -> int:
        return 1

    @property
    def degree(self) -> int:
        return 2

    def measure(self) -> float:
        return 4.0 * math.pi * self.radius ** 2

    def bbox(self):
        r = self.radius
        return self.center - r, self.center + r

    def nodes(self, res: int):
        phi = math.pi * (np.arange(res) + 0.5) / res
        theta = 2.0 * math.pi * (np.arange(res) + 0.5) / res
        ph, th = np.meshgrid(phi, theta, indexing="ij")
        ph, th = ph.ravel(), th.ravel()
        omega = np.stack([np.sin(ph) * np.cos(th),
                          np.sin(ph) * np.sin(th),
                          np.cos(ph)], axis=1)
        pts = self.center[None, :] + self.radius * omega
        frames = omega[:, :, None]
        cell = (math.pi / res) * (2.0 * math.pi / res)
        w = self.radius ** 2 * np.sin(ph) * cell
        return pts, frames, w


PATCH_TYPES = (AffinePatch, CirclePatch, SpherePatch)


@dataclass(frozen=True, eq=False)
class DegreeTaggedVariety:
    """Union of patches with an algebraic degree tag (for the product cap)."""

    patches: tuple
    degree: int
    label: str = ""

    def __post_init__(self):
        pats = tuple(self.patches)
        if not pats:
            raise DimensionMismatch("variety needs at least one patch")
        d = pats[0].ambient_dim
        c = pats[0].codim
        if any(p.ambient_dim != d or p.codim != c for p in pats):
            raise DimensionMismatch("patches must share ambient dimension and codim")
        if self.degree < 1:
            raise DimensionMismatch("degree tag must be >= 1")
        object.__setattr__(self, "patches", pats)

    @property
    def ambient_dim(self) -> int:
        return self.patches[0].ambient_dim

    @property
    def codim(self) -> int:
        return self.patches[0].codim


# ---------------------------------------------------------------------------
# translation windows

@dataclass(frozen=True, eq=False)
class TranslationWindow:
    """Constraint on the translation tuple (v_2, ..., v_m).

    kinds:
      all      -- no constraint (the integrand has compact support anyway)
      boxes    -- v_j in an axis box (entries may be infinite on the lhs side)
      balls    -- v_j in a round ball
      pairwise -- |v_j| <= bound and |v_i - v_j| <= bound for all pairs
    """

    kind: str
    boxes: Optional[tuple] = None
    balls: Optional[tuple] = None
    bound: float = 0.0

    def __post_init__(self):
        if self.kind not in ("all", "boxes", "balls", "pairwise"):
            raise DimensionMismatch(f"unknown window kind {self.kind!r}")
        if self.kind == "boxes":
            bx = tuple((np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
                       for lo, hi in self.boxes)
            for lo, hi in bx:
                if lo.shape != hi.shape or np.any(lo >= hi):
                    raise DimensionMismatch("box needs lo < hi componentwise")
            object.__setattr__(self, "boxes", bx)
        if self.kind == "balls":
            bl = tuple((np.asarray(c, dtype=float), float(r)) for c, r in self.balls)
            for _, r in bl:
                if r <= 0:
                    raise DimensionMismatch("ball radius must be positive")
            object.__setattr__(self, "balls", bl)
        if self.kind == "pairwise" and not self.bound > 0:
            raise DimensionMismatch("pairwise window needs a positive bound")

    def slots(self) -> Optional[int]:
        if self.kind == "boxes":
            return len(self.boxes)
        if self.kind == "balls":
            return len(self.balls)
        return None

    def contains(self, diffs: np.ndarray) -> np.ndarray:
        """diffs has shape (..., m-1, d); returns a boolean (...) array."""
        diffs = np.asarray(diffs, dtype=float)
        if self.kind == "all":
            return np.ones(diffs.shape[:-2], dtype=bool)
        if self.kind == "boxes":
            ok = np.ones(diffs.shape[:-2], dtype=bool)
            for j, (lo, hi) in enumerate(self.boxes):
                ok &= np.all((diffs[..., j, :] >= lo) & (diffs[..., j, :] <= hi), axis=-1)
            return ok
        if self.kind == "balls":
            ok = np.ones(diffs.shape[:-2], dtype=bool)
            for j, (c, r) in enumerate(self.balls):
                ok &= np.linalg.norm(diffs[..., j, :] - c, axis=-1) <= r
            return ok
        ok = np.all(np.linalg.norm(diffs, axis=-1) <= self.bound, axis=-1)
        nslots = diffs.shape[-2]
        for i in range(nslots):
            for j in range(i + 1, nslots):
                gap = np.linalg.norm(diffs[..., i, :] - diffs[..., j, :], axis=-1)
                ok &= gap <= self.bound
        return ok

    def is_bounded(self) -> bool:
        if self.kind == "all":
            return False
        if self.kind == "boxes":
            return all(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))
                       for lo, hi in self.boxes)
        return True

    def volume(self) -> float:
        if self.kind == "boxes":
            return float(np.prod([np.prod(hi - lo) for lo, hi in self.boxes]))
        if self.kind == "balls":
            return float(np.prod([unit_ball_volume(c.shape[0]) * r ** c.shape[0]
                                  for c, r in self.balls]))
        raise UnsupportedShapes("window volume available for boxes/balls only")

    def sampling_boxes(self, factors, margin: float = 1e-9):
        """Product box covering the translations v_j = p_1 - p_j that can
        produce an intersection; window geometry (stated for the differences
        p_j - p_1 = -v_j) enters with its sign flipped."""
        m = len(factors)
        lo1, hi1 = _union_bbox(factors[0])
        out = []
        for j in range(1, m):
            loj, hij = _union_bbox(factors[j])
            lo = lo1 - hij - margin
            hi = hi1 - loj + margin
            if self.kind == "boxes":
                blo, bhi = self.boxes[j - 1]
                lo, hi = np.maximum(lo, -bhi), np.minimum(hi, -blo)
            elif self.kind == "balls":
                c, r = self.balls[j - 1]
                lo, hi = np.maximum(lo, -c - r), np.minimum(hi, -c + r)
            elif self.kind == "pairwise":
                lo = np.maximum(lo, -self.bound)
                hi = np.minimum(hi, self.bound)
            if np.any(lo >= hi):
                return None
            out.append((lo, hi))
        return out


def _union_bbox(patches) -> tuple[np.ndarray, np.ndarray]:
    los, his = zip(*(p.bbox() for p in patches))
    return np.min(los, axis=0), np.max(his, axis=0)


def _normalize_factors(factors) -> list[list]:
    """Accept patches, patch lists, or DegreeTaggedVariety per factor."""
    out = []
    for f in factors:
        if isinstance(f, DegreeTaggedVariety):
            out.append(list(f.patches))
        elif isinstance(f, PATCH_TYPES):
            out.append([f])
        else:
            out.append(list(f))
    if len(out) < 2:
        raise DimensionMismatch("need at least two factors")
    d = out[0][0].ambient_dim
    for plist in out:
        if not plist:
            raise DimensionMismatch("empty patch list")
        if any(p.ambient_dim != d for p in plist):
            raise DimensionMismatch("patches have mixed ambient dimensions")
        if len({p.codim for p in plist}) != 1:
            raise DimensionMismatch("patches of one factor must share codim")
    if sum(plist[0].codim for plist in out) != d:
        raise DimensionMismatch("codimensions must sum to the ambient dimension")
    return out


# ---------------------------------------------------------------------------
# left side: tensor quadrature of the wedge integrand

def _default_res(qdims: Sequence[int], target: int = 300_000) -> list[int]:
    total_q = sum(qdims)
    per_axis = max(4, int(target ** (1.0 / max(total_q, 1))))
    return [min(64, per_axis)] * len(qdims)


def _combo_quadrature(patches, window: TranslationWindow, res: list[int]) -> float:
    m = len(patches)
    d = patches[0].ambient_dim
    flat = all(isinstance(p, AffinePatch) for p in patches)
    if flat and window.kind == "all":
        # constant integrand: the midpoint sum collapses exactly
        normals = np.column_stack([orthonormalize(list(p.frame.T)).complement().basis
                                   for p in patches])
        wedge = abs(np.linalg.det(normals))
        return wedge * float(np.prod([p.measure() for p in patches]))

    nodes = [p.nodes(r) for p, r in zip(patches, res)]
    counts = [n[0].shape[0] for n in nodes]
    idx_grids = np.meshgrid(*[np.arange(c) for c in counts], indexing="ij")
    idx = [g.ravel() for g in idx_grids]
    total = idx[0].size
    value = 0.0
    for start in range(0, total, CHUNK):
        sl = slice(start, min(start + CHUNK, total))
        pts = [nodes[j][0][idx[j][sl]] for j in range(m)]
        diffs = np.stack([pts[j] - pts[0] for j in range(1, m)], axis=1)
        chi = window.contains(diffs)
        if not np.any(chi):
            continue
        mats = np.concatenate([nodes[j][1][idx[j][sl]] for j in range(m)], axis=2)
        wedge = np.abs(np.linalg.det(mats))
        wts = np.prod(np.stack([nodes[j][2][idx[j][sl]] for j in range(m)]), axis=0)
        value += float(np.sum(chi * wedge * wts))
    return value


def lhs_wedge_integral(factors, window: TranslationWindow,
                       resolution: Optional[int] = None,
                       refine: bool = True) -> Measured:
    """Quadrature of chi_U(p_j - p_1) * |normal wedge| over the patch product.

    The reported stderr is the difference between the base grid and one
    refinement (halved steps); for all-affine factors with an unconstrained
    window the integrand is constant and the value is exact.
    """
    flists = _normalize_factors(factors)
    total = 0.0
    delta = 0.0
    for combo in product(*flists):
        qdims = [p.patch_dim for p in combo]
        res = [resolution] * len(combo) if resolution else _default_res(qdims)
        coarse = _combo_quadrature(list(combo), window, res)
        if refine and not (window.kind == "all"
                           and all(isinstance(p, AffinePatch) for p in combo)):
            fine = _combo_quadrature(list(combo), window, [2 * r for r in res])
            total += fine
            delta += abs(fine - coarse)
        else:
            total += coarse
    return Measured(total, delta)


# ---------------------------------------------------------------------------
# right side: Monte Carlo over translations with exact per-sample counts

def _pair_kind(p) -> str:
    if isinstance(p, AffinePatch):
        return "affine"
    if isinstance(p, CirclePatch):
        return "circle"
    return "sphere"


def _count_affine(patches, v: np.ndarray) -> np.ndarray:
    """All-affine counter: v has shape (n, m-1, d)."""
    m = len(patches)
    d = patches[0].ambient_dim
    qs = [p.patch_dim for p in patches]
    rows = (m - 1) * d
    mat = np.zeros((rows, sum(qs)))
    off = np.concatenate([[0], np.cumsum(qs)]).astype(int)
    b0 = np.zeros(rows)
    for j in range(1, m):
        r = slice((j - 1) * d, j * d)
        mat[r, off[0]:off[1]] = patches[0].frame
        mat[r, off[j]:off[j + 1]] = -patches[j].frame
        b0[r] = patches[j].base - patches[0].base
    n = v.shape[0]
    if abs(np.linalg.det(mat)) < 1e-12 * max(1.0, np.linalg.norm(mat)) ** rows:
        return np.zeros(n)
    inv = np.linalg.inv(mat)
    rhs = b0[None, :] + v.reshape(n, rows)
    t = rhs @ inv.T
    inside = np.all((t >= 0.0) & (t <= 1.0), axis=1)
    return inside.astype(float)


def _solve_harmonic(a, b, c):
    """Solutions theta of a cos(theta) + b sin(theta) + c = 0 in [0, 2 pi).

    Returns (theta1, theta2, nsol) arrays; where nsol is 0 the angles are
    meaningless, where 1 only theta1 counts.
    """
    amp = np.hypot(a, b)
    nsol = np.zeros(a.shape, dtype=int)
    th1 = np.zeros_like(a)
    th2 = np.zeros_like(a)
    ok = amp > 1e-306
    ratio = np.zeros_like(a)
    ratio[ok] = -c[ok] / amp[ok]
    has = ok & (np.abs(ratio) < 1.0)
    grazing = ok & (np.abs(ratio) == 1.0)
    phi = np.arctan2(b, a)
    acos = np.zeros_like(a)
    acos[has] = np.arccos(ratio[has])
    th1 = np.mod(phi + acos, 2.0 * math.pi)
    th2 = np.mod(phi - acos, 2.0 * math.pi)
    nsol[has] = 2
    nsol[grazing] = 1
    return th1, th2, nsol


def _count_circle_affine(circle: CirclePatch, plane: AffinePatch, v):
    """Circle meets an affine codim-1 patch translated by the rows of v."""
    normal = orthonormalize(list(plane.frame.T)).complement().basis[:, 0]
    n = v.shape[0]
    base = plane.base[None, :] + v
    circ_c = circle.center
    # normal . (c + r(cos u + sin v)) = normal . base
    a = np.full(n, circle.radius * float(normal @ circle.axis_u))
    b = np.full(n, circle.radius * float(normal @ circle.axis_v))
    c = (circ_c @ normal)[None] - base @ normal
    th1, th2, nsol = _solve_harmonic(a, b, c + np.zeros(n))
    counts = np.zeros(n)
    pinv = np.linalg.pinv(plane.frame)
    for th, take in ((th1, nsol >= 1), (th2, nsol >= 2)):
        if not np.any(take):
            continue
        pts = circle.point_at(th[take])
        params = (pts - base[take]) @ pinv.T
        inside = np.all((params >= 0.0) & (params <= 1.0), axis=1)
        inside &= circle.in_range(th[take])
        counts[np.nonzero(take)[0][inside]] += 1.0
    return counts


def _count_affine_quadric(seg: AffinePatch, center, radius, v):
    """Segment meets the quadric |x - (c + v)| = r, one row of v at a time."""
    n = v.shape[0]
    c = center[None, :] + v
    u = seg.frame[:, 0]
    rel = seg.base[None, :] - c
    aa = float(u @ u)
    bb = 2.0 * rel @ u
    cc = np.einsum("ij,ij->i", rel, rel) - radius ** 2
    disc = bb * bb - 4.0 * aa * cc
    counts = np.zeros(n)
    ok = disc > 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    for sgn in (-1.0, 1.0):
        t = (-bb + sgn * sq) / (2.0 * aa)
        counts += (ok & (t >= 0.0) & (t <= 1.0)).astype(float)
    return counts


def _count_circle_circle(c1: CirclePatch, c2: CirclePatch, v):
    """Two coplanar circles in R^2 (arcs allowed)."""
    n = v.shape[0]
    cen2 = c2.center[None, :] + v
    rel = cen2 - c1.center[None, :]
    # points on circle 1 at distance r2 from the translated center 2
    a = 2.0 * c1.radius * rel[:, 0]
    b = 2.0 * c1.radius * rel[:, 1]
    c = (c1.radius ** 2 + np.einsum("ij,ij->i", rel, rel) - c2.radius ** 2)
    th1, th2, nsol = _solve_harmonic(-a, -b, c)
    counts = np.zeros(n)
    for th, take in ((th1, nsol >= 1), (th2, nsol >= 2)):
        if not np.any(take):
            continue
        pts = c1.point_at(th[take])
        inside = c1.in_range(th[take])
        # angle on the second circle for arc clipping
        rel2 = pts - cen2[take]
        ang2 = np.arctan2(rel2 @ c2.axis_v, rel2 @ c2.axis_u)
        inside &= c2.in_range(ang2)
        counts[np.nonzero(take)[0][inside]] += 1.0
    return counts


def _count_circle_sphere(circle: CirclePatch, sphere: SpherePatch, v):
    n = v.shape[0]
    cen = sphere.center[None, :] + v
    rel = circle.center[None, :] - cen
    a = 2.0 * circle.radius * (rel @ circle.axis_u)
    b = 2.0 * circle.radius * (rel @ circle.axis_v)
    c = np.einsum("ij,ij->i", rel, rel) + circle.radius ** 2 - sphere.radius ** 2
    th1, th2, nsol = _solve_harmonic(a, b, c)
    counts = np.zeros(n)
    for th, take in ((th1, nsol >= 1), (th2, nsol >= 2)):
        if not np.any(take):
            continue
        inside = circle.in_range(th[take])
        counts[np.nonzero(take)[0][inside]] += 1.0
    return counts


def _count_pair(p1, p2, v: np.ndarray) -> np.ndarray:
    k1, k2 = _pair_kind(p1), _pair_kind(p2)
    d = p1.ambient_dim
    if k1 == "affine" and k2 == "affine":
        return _count_affine([p1, p2], v[:, None, :])
    # mixed pairs reduce to "first patch fixed, second translated by v";
    # with roles swapped, translating the first by v matches translating
    # the second by -v
    if d == 2:
        if k1 == "circle" and k2 == "circle":
            return _count_circle_circle(p1, p2, v)
        if k1 == "circle" and k2 == "affine":
            return _count_circle_affine(p1, p2, v)
        if k1 == "affine" and k2 == "circle":
            return _count_circle_affine(p2, p1, -v)
    if d == 3:
        if k1 == "affine" and p1.patch_dim == 1 and k2 == "sphere":
            return _count_affine_quadric(p1, p2.center, p2.radius, v)
        if k1 == "sphere" and k2 == "affine" and p2.patch_dim == 1:
            return _count_affine_quadric(p2, p1.center, p1.radius, -v)
        if k1 == "circle" and k2 == "affine" and p2.patch_dim == 2:
            return _count_circle_affine(p1, p2, v)
        if k1 == "affine" and p1.patch_dim == 2 and k2 == "circle":
            return _count_circle_affine(p2, p1, -v)
        if k1 == "circle" and k2 == "sphere":
            return _count_circle_sphere(p1, p2, v)
        if k1 == "sphere" and k2 == "circle":
            return _count_circle_sphere(p2, p1, -v)
    raise UnsupportedShapes(f"no intersection counter for {k1} x {k2} in R^{d}")


def _count_combo(patches, v: np.ndarray) -> np.ndarray:
    """v: (n, m-1, d) translations for patches 2..m; exact counts per sample."""
    if all(isinstance(p, AffinePatch) for p in patches):
        return _count_affine(patches, v)
    if len(patches) == 2:
        return _count_pair(patches[0], patches[1], v[:, 0, :])
    raise UnsupportedShapes("nonlinear counters support two factors only")


def rhs_translation_integral(factors, window: TranslationWindow,
                             mc_samples: int = 1_000_000,
                             seed: int = 0) -> Measured:
    """Monte Carlo average of the intersection count over translations.

    A translation tuple v contributes #(Z_1 cap (Z_2 + v_2) cap ...) times
    the window indicator evaluated at the base-point differences -v_j (the
    window is stated for p_j - p_1, and an intersection at x gives
    v_j = x - p_j = p_1 - p_j). Translations are drawn uniformly from the
    product box covering that support, so the estimate targets the window
    integral of the count exactly.
    """
    flists = _normalize_factors(factors)
    m = len(flists)
    d = flists[0][0].ambient_dim
    boxes = window.sampling_boxes(flists)
    if boxes is None:
        return Measured(0.0, 0.0)
    vol = float(np.prod([np.prod(hi - lo) for lo, hi in boxes]))
    if not np.isfinite(vol):
        raise UnsupportedShapes("translation support is unbounded")
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    n_done = 0
    while n_done < mc_samples:
        n = min(CHUNK, mc_samples - n_done)
        v = np.empty((n, m - 1, d))
        for j, (lo, hi) in enumerate(boxes):
            v[:, j, :] = rng.uniform(lo, hi, size=(n, d))
        counts = np.zeros(n)
        chi = window.contains(-v)
        if np.any(chi):
            sub = v[chi]
            acc = np.zeros(sub.shape[0])
            for combo in product(*flists):
                acc += _count_combo(list(combo), sub)
            counts[chi] = acc
        total += float(np.sum(counts))
        total_sq += float(np.sum(counts * counts))
        n_done += n
    mean = total / mc_samples
    var = max(total_sq / mc_samples - mean * mean, 0.0)
    stderr = vol * math.sqrt(var / mc_samples)
    return Measured(vol * mean, stderr)


class BezoutReport(NamedTuple):
    lhs: float
    lhs_stderr: float
    cap: float
    passed: bool


def bezout_cap_check(varieties: Sequence[DegreeTaggedVariety],
                     window: TranslationWindow,
                     resolution: Optional[int] = None,
                     tol: float = 0.02) -> BezoutReport:
    """Check lhs <= vol(window) * prod(degrees) within quadrature slack."""
    if not window.is_bounded():
        raise UnsupportedShapes("degree cap needs a bounded window")
    for var in varieties:
        if not isinstance(var, DegreeTaggedVariety):
            raise DimensionMismatch("bezout check expects degree-tagged varieties")
    lhs = lhs_wedge_integral(list(varieties), window, resolution=resolution)
    cap = window.volume() * float(np.prod([v.degree for v in varieties]))
    passed = lhs.value <= cap * (1.0 + tol) + QUAD_SAFETY * lhs.stderr
    return BezoutReport(lhs=lhs.value, lhs_stderr=lhs.stderr, cap=cap, passed=bool(passed))
