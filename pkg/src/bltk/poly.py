"""Multivariate polynomials with projective coefficients and exact root counts.

A MultiPoly stores sparse monomials with a unit-norm coefficient vector (the
zero set only depends on the projective class). Univariate restrictions are
float arrays in ascending order; root counting converts them to exact
rationals and runs a Sturm chain, so sign decisions are never at the mercy of
floating-point evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from .errors import DegreeOverflow, DimensionMismatch, IdenticallyZero

COEFF_ZERO_TOL = 1e-300  # exact-zero pruning only; tiny coefficients are real data
MAX_DEGREE = 16


def monomial_basis(dim: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples with |alpha| <= degree, graded lexicographic order."""
    if dim < 1:
        raise DimensionMismatch("dimension must be positive")
    out = [(0,) * dim]
    for total in range(1, degree + 1):
        level = set()
        for combo in combinations_with_replacement(range(dim), total):
            e = [0] * dim
            for i in combo:
                e[i] += 1
            level.add(tuple(e))
        out.extend(sorted(level, reverse=True))
    return out


@dataclass(frozen=True, eq=False)
class MultiPoly:
    """Sparse polynomial sum(c_k * x^alpha_k) with |c| normalized to 1."""

    dim: int
    exps: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.exps, dtype=np.int64)
        c = np.asarray(self.coeffs, dtype=float)
        if e.ndim != 2 or e.shape[1] != self.dim or e.shape[0] != c.shape[0]:
            raise DimensionMismatch("exponent table and coefficients disagree")
        if np.any(e < 0):
            raise DimensionMismatch("exponents must be nonnegative")
        # merge duplicate monomials, drop exact zeros, normalize
        order = np.lexsort(e.T)
        e, c = e[order], c[order]
        keep_e, keep_c = [], []
        for row, coef in zip(e, c):
            if keep_e and np.array_equal(keep_e[-1], row):
                keep_c[-1] += coef
            else:
                keep_e.append(row)
                keep_c.append(coef)
        e = np.array(keep_e, dtype=np.int64).reshape(-1, self.dim)
        c = np.array(keep_c, dtype=float)
        mask = np.abs(c) > COEFF_ZERO_TOL
        e, c = e[mask], c[mask]
        norm = float(np.linalg.norm(c))
        if c.size == 0 or norm == 0.0:
            raise IdenticallyZero("all coefficients vanish")
        if int(e.sum(axis=1).max()) > MAX_DEGREE:
            raise DegreeOverflow(f"degree exceeds the supported cap {MAX_DEGREE}")
        object.__setattr__(self, "exps", e)
        object.__setattr__(self, "coeffs", c / norm)

    @classmethod
    def from_terms(cls, dim: int, terms: dict) -> "MultiPoly":
        """terms maps exponent tuples to coefficients."""
        exps = np.array(list(terms.keys()), dtype=np.int64)
        coeffs = np.array(list(terms.values()), dtype=float)
        return cls(dim=dim, exps=exps, coeffs=coeffs)

    @classmethod
    def coordinate_product(cls, dim: int, center=None) -> "MultiPoly":
        """prod_i (x_i - c_i), the union of the d hyperplanes through c."""
        c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
        p = cls.from_terms(dim, {tuple(np.eye(dim, dtype=int)[0]): 1.0,
                                 (0,) * dim: -c[0]})
        for i in range(1, dim):
            exp = tuple(int(x) for x in np.eye(dim, dtype=int)[i])
            p = p.multiply(cls.from_terms(dim, {exp: 1.0, (0,) * dim: -c[i]}))
        return p

    @property
    def degree(self) -> int:
        return int(self.exps.sum(axis=1).max())

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise DimensionMismatch("points have wrong dimension")
        monos = np.prod(pts[:, None, :] ** self.exps[None, :, :], axis=2)
        return monos @ self.coeffs

    def multiply(self, other: "MultiPoly") -> "MultiPoly":
        if other.dim != self.dim:
            raise DimensionMismatch("polynomials live in different dimensions")
        if self.degree + other.degree > MAX_DEGREE:
            raise DegreeOverflow(f"product degree exceeds the cap {MAX_DEGREE}")
        e = (self.exps[:, None, :] + other.exps[None, :, :]).reshape(-1, self.dim)
        c = (self.coeffs[:, None] * other.coeffs[None, :]).reshape(-1)
        return MultiPoly(dim=self.dim, exps=e, coeffs=c)

    def to_dense_vector(self, degree: int | None = None) -> tuple[np.ndarray, list]:
        """Coefficients on the full graded-lex monomial basis, unit norm."""
        deg = self.degree if degree is None else int(degree)
        if deg < self.degree:
            raise DegreeOverflow("dense degree smaller than polynomial degree")
        basis = monomial_basis(self.dim, deg)
        index = {b: i for i, b in enumerate(basis)}
        vec = np.zeros(len(basis))
        for row, coef in zip(self.exps, self.coeffs):
            vec[index[tuple(int(x) for x in row)]] = coef
        return vec, basis

    @classmethod
    def from_dense_vector(cls, dim: int, vec: np.ndarray, basis: list) -> "MultiPoly":
        vec = np.asarray(vec, dtype=float)
        mask = np.abs(vec) > 1e-15
        if not np.any(mask):
            raise IdenticallyZero("all coefficients vanish")
        exps = np.array([basis[i] for i in np.nonzero(mask)[0]], dtype=np.int64)
        return cls(dim=dim, exps=exps, coeffs=vec[mask])


def restrict_to_line(p: MultiPoly, base: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Coefficients (ascending in t) of p(base + t * direction)."""
    coeffs = restrict_to_lines(p, np.asarray(base, dtype=float)[None, :], direction)
    return coeffs[0]


def restrict_to_lines(p: MultiPoly, bases: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Batched line restriction: one coefficient row per base point.

    Returns an (n, degree + 1) array; row k holds the ascending t-coefficients
    of p(bases[k] + t * direction). The per-term binomial expansions are
    batched over all bases, so the cost is a handful of vectorized shifts.
    """
    bases = np.atleast_2d(np.asarray(bases, dtype=float))
    u = np.asarray(direction, dtype=float)
    if bases.shape[1] != p.dim or u.shape != (p.dim,):
        raise DimensionMismatch("base points or direction have wrong dimension")
    n = bases.shape[0]
    deg = p.degree
    out = np.zeros((n, deg + 1))
    for row, coef in zip(p.exps, p.coeffs):
        term = np.zeros((n, 1))
        term[:, 0] = coef
        for i in range(p.dim):
            a = int(row[i])
            if a == 0:
                continue
            # batched multiply by (base_i + u_i t)^a
            binom = np.array([float(comb(a, k)) for k in range(a + 1)])
            pw_base = bases[:, i:i + 1] ** np.arange(a, -1, -1)[None, :]
            pw_dir = u[i] ** np.arange(a + 1)
            factor = binom[None, :] * pw_base * pw_dir[None, :]
            ln = term.shape[1]
            new = np.zeros((n, ln + a))
            for k in range(a + 1):
                new[:, k:k + ln] += factor[:, k:k + 1] * term
            term = new
        out[:, : term.shape[1]] += term
    return out


# ---------------------------------------------------------------------------
# exact univariate root counting (Sturm chains over Fractions)

def _frac_poly(coeffs) -> list[Fraction]:
    fr = [Fraction(float(c)) for c in coeffs]
    while fr and fr[-1] == 0:
        fr.pop()
    return fr


def _eval(poly: list[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(poly):
        acc = acc * x + c
    return acc


def _deriv(poly: list[Fraction]) -> list[Fraction]:
    return [c * k for k, c in enumerate(poly)][1:]


def _neg_rem(num: list[Fraction], den: list[Fraction]) -> list[Fraction]:
    rem = list(num)
    dn = len(den) - 1
    lead = den[-1]
    while len(rem) - 1 >= dn and rem:
        shift = len(rem) - 1 - dn
        q = rem[-1] / lead
        for i in range(dn + 1):
            rem[shift + i] -= q * den[i]
        rem.pop()
        while rem and rem[-1] == 0:
            rem.pop()
    return [-c for c in rem]


def _deflate(poly: list[Fraction], root: Fraction) -> list[Fraction]:
    """Exact synthetic division by (t - root); caller checks poly(root) == 0."""
    out = [Fraction(0)] * (len(poly) - 1)
    acc = Fraction(0)
    for k in range(len(poly) - 1, 0, -1):
        acc = poly[k] + acc * root
        out[k - 1] = acc
    return out


def _variations(chain: list[list[Fraction]], x: Fraction) -> int:
    signs = []
    for p in chain:
        v = _eval(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots(coeffs, interval) -> int:
    """Distinct real roots of the polynomial in the open interval (a, b).

    Coefficients are ascending; they are converted to exact rationals, so the
    count is exact for the given floating-point polynomial. Roots exactly at
    a or b are excluded. Raises IdenticallyZero for the zero polynomial.
    """
    a, b = interval
    if not (np.isfinite(a) and np.isfinite(b)):
        raise DimensionMismatch("interval endpoints must be finite")
    if not a < b:
        return 0
    poly = _frac_poly(coeffs)
    if not poly:
        raise IdenticallyZero("zero polynomial has no root count")
    if len(poly) == 1:
        return 0
    fa, fb = Fraction(float(a)), Fraction(float(b))
    # clear exact endpoint roots so the Sturm count is the open-interval count
    while len(poly) > 1 and _eval(poly, fa) == 0:
        poly = _deflate(poly, fa)
    while len(poly) > 1 and _eval(poly, fb) == 0:
        poly = _deflate(poly, fb)
    if len(poly) <= 1:
        return 0
    chain = [poly, _deriv(poly)]
    while True:
        nxt = _neg_rem(chain[-2], chain[-1])
        if not nxt:
            break
        chain.append(nxt)
    return _variations(chain, fa) - _variations(chain, fb)


@dataclass(frozen=True, eq=False)
class Region:
    """Axis box or round ball used as the window for zero-set measurements."""

    kind: str
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    center_point: np.ndarray | None = None
    radius: float = 0.0

    def __post_init__(self):
        if self.kind == "box":
            lo = np.asarray(self.lo, dtype=float).reshape(-1)
            hi = np.asarray(self.hi, dtype=float).reshape(-1)
            if lo.shape != hi.shape or np.any(lo >= hi):
                raise DimensionMismatch("box needs lo < hi componentwise")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        elif self.kind == "ball":
            c = np.asarray(self.center_point, dtype=float).reshape(-1)
            if not self.radius > 0:
                raise DimensionMismatch("ball needs a positive radius")
            object.__setattr__(self, "center_point", c)
        else:
            raise DimensionMismatch(f"unknown region kind {self.kind!r}")

    @classmethod
    def box(cls, lo, hi) -> "Region":
        return cls(kind="box", lo=lo, hi=hi)

    @classmethod
    def ball(cls, center, radius: float) -> "Region":
        return cls(kind="ball", center_point=center, radius=float(radius))

    @property
    def dim(self) -> int:
        return self.lo.shape[0] if self.kind == "box" else self.center_point.shape[0]

    @property
    def center(self) -> np.ndarray:
        if self.kind == "box":
            return 0.5 * (self.lo + self.hi)
        return self.center_point.copy()

    def volume(self) -> float:
        if self.kind == "box":
            return float(np.prod(self.hi - self.lo))
        from .ellipsoid import unit_ball_volume

        return unit_ball_volume(self.dim) * self.radius ** self.dim

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "box":
            return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        return np.linalg.norm(pts - self.center_point, axis=1) <= self.radius

    def line_clips(self, bases: np.ndarray, direction: np.ndarray):
        """Parameter intervals where base + t*direction stays in the region.

        Returns (t0, t1, hit): arrays over the base points; hit is False where
        the line misses the region (t0/t1 undefined there).
        """
        bases = np.atleast_2d(np.asarray(bases, dtype=float))
        u = np.asarray(direction, dtype=float)
        n = bases.shape[0]
        if self.kind == "ball":
            rel = bases - self.center_point
            a = float(u @ u)
            bq = 2.0 * rel @ u
            cq = np.einsum("ij,ij->i", rel, rel) - self.radius ** 2
            disc = bq * bq - 4.0 * a * cq
            hit = disc > 0
            sq = np.sqrt(np.where(hit, disc, 0.0))
            t0 = (-bq - sq) / (2.0 * a)
            t1 = (-bq + sq) / (2.0 * a)
            return t0, t1, hit
        t0 = np.full(n, -np.inf)
        t1 = np.full(n, np.inf)
        hit = np.ones(n, dtype=bool)
        for i in range(self.dim):
            lo_i, hi_i = self.lo[i], self.hi[i]
            if abs(u[i]) < 1e-15:
                hit &= (bases[:, i] >= lo_i) & (bases[:, i] <= hi_i)
                continue
            ta = (lo_i - bases[:, i]) / u[i]
            tb = (hi_i - bases[:, i]) / u[i]
            t0 = np.maximum(t0, np.minimum(ta, tb))
            t1 = np.minimum(t1, np.maximum(ta, tb))
        hit &= t0 < t1
        return t0, t1, hit
