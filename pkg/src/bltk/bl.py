"""Brascamp-Lieb data: scaling/dimension conditions, constants, wedge checks.

A datum is a family of surjective linear maps B_j : R^d -> R^{d_j} with
exponents p_j held as exact rationals. The constant is the supremum over
Gaussian inputs of

    ( prod_j det(A_j)^{p_j} / det(sum_j p_j B_j^T A_j B_j) )^{1/2},

located by the alternating update A_j <- (B_j M^{-1} B_j^T)^{-1}; the ratio
trace is monotone nondecreasing and either stabilizes (finite constant) or
blows past the divergence thresholds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .calibration import BL_WEDGE_DUAL_FLOOR, BL_WEDGE_PRIMAL_FLOOR
from .errors import (
    DimensionMismatch,
    HypothesisViolated,
    InfiniteBLConstant,
    RankDeficient,
    ScalingMismatch,
    SingularDenominator,
)
from .exterior import Subspace
from .visibility import VectorFieldSample, general_visibility
from .ellipsoid import direction_grid

MAX_DENOMINATOR = 64
RANK_TOL = 1e-9
LATTICE_CAP = 512

RATIO_BLOWUP = 1e8
COND_BLOWUP = 1e12
EIG_FLOOR = 1e-12
MAX_ROUNDS = 10_000
STABLE_ROUNDS = 10


def _as_fraction(p) -> Fraction:
    f = Fraction(p) if not isinstance(p, Fraction) else p
    if f <= 0:
        raise DimensionMismatch("exponents must be positive")
    if f.denominator > MAX_DENOMINATOR:
        raise DimensionMismatch(f"exponent denominator exceeds {MAX_DENOMINATOR}")
    return f


@dataclass(frozen=True, eq=False)
class BLDatum:
    """Maps B_j (full row rank d_j x d) with positive rational exponents."""

    dim: int
    maps: tuple
    exponents: tuple

    def __post_init__(self):
        maps = tuple(np.atleast_2d(np.asarray(b, dtype=float)) for b in self.maps)
        exps = tuple(_as_fraction(p) for p in self.exponents)
        if len(maps) != len(exps) or not maps:
            raise DimensionMismatch("need one exponent per map")
        for b in maps:
            if b.shape[1] != self.dim:
                raise DimensionMismatch("map columns must match the dimension")
            if b.shape[0] > self.dim:
                raise DimensionMismatch("maps must not increase dimension")
            if np.linalg.svd(b, compute_uv=False)[-1] <= RANK_TOL:
                raise RankDeficient("maps must have full row rank")
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "exponents", exps)

    @property
    def n_maps(self) -> int:
        return len(self.maps)

    def codomain_dims(self) -> tuple[int, ...]:
        return tuple(b.shape[0] for b in self.maps)


@dataclass(frozen=True, eq=False)
class GaussianInput:
    """One SPD matrix per map (the covariance-inverse of a centered Gaussian)."""

    matrices: tuple

    def __post_init__(self):
        mats = tuple(np.atleast_2d(np.asarray(a, dtype=float)) for a in self.matrices)
        for a in mats:
            if a.shape[0] != a.shape[1]:
                raise DimensionMismatch("inputs must be square")
            if np.max(np.abs(a - a.T)) > 1e-10 * max(1.0, float(np.max(np.abs(a)))):
                raise DimensionMismatch("inputs must be symmetric")
            if np.min(np.linalg.eigvalsh(a)) <= 0:
                raise DimensionMismatch("inputs must be positive definite")
        object.__setattr__(self, "matrices", mats)


def scaling_condition(datum: BLDatum) -> bool:
    """Exact check of sum p_j d_j = d."""
    total = sum((p * dj for p, dj in zip(datum.exponents, datum.codomain_dims())),
                Fraction(0))
    return total == datum.dim


def _orth(mat: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column space with the fixed rank threshold."""
    if mat.size == 0:
        return mat.reshape(mat.shape[0], 0)
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    return u[:, s > RANK_TOL]


def _rank(mat: np.ndarray) -> int:
    if mat.size == 0:
        return 0
    return int(np.sum(np.linalg.svd(mat, compute_uv=False) > RANK_TOL))


def _kernel(mat: np.ndarray, d: int) -> np.ndarray:
    u, s, vt = np.linalg.svd(mat, full_matrices=True)
    rank = int(np.sum(s > RANK_TOL))
    return vt[rank:].T.reshape(d, -1)


def _sum_space(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _orth(np.column_stack([a, b]))


def _intersect_space(a: np.ndarray, b: np.ndarray, d: int) -> np.ndarray:
    pa = np.eye(d) - a @ a.T
    pb = np.eye(d) - b @ b.T
    return _kernel(np.vstack([pa, pb]), d)


def _space_key(basis: np.ndarray, d: int) -> bytes:
    proj = basis @ basis.T if basis.size else np.zeros((d, d))
    return np.round(proj, 7).tobytes()


class DimensionVerdict(NamedTuple):
    kind: str  # "pass" or "counterexample"
    candidates_checked: int
    witness: Optional[Subspace]

    @property
    def passed(self) -> bool:
        return self.kind == "pass"


def dimension_condition(datum: BLDatum, probes: int = 200,
                        seed: int = 0) -> DimensionVerdict:
    """Search for a subspace violating dim V <= sum p_j dim(B_j V).

    Candidates: the map kernels, their lattice closure under sum and
    intersection (capped), coordinate subspaces, and seeded random probes.
    A returned counterexample is conclusive; a pass is only as strong as the
    candidate family.
    """
    d = datum.dim
    kernels = [_kernel(b, d) for b in datum.maps]
    seen: dict[bytes, np.ndarray] = {}

    def add(basis: np.ndarray) -> bool:
        if basis.shape[1] in (0, d):
            return False
        key = _space_key(basis, d)
        if key in seen:
            return False
        seen[key] = basis
        return True

    for k in kernels:
        add(k)
    # lattice closure under + and cap the growth
    frontier = list(seen.values())
    while frontier and len(seen) < LATTICE_CAP:
        nxt = []
        current = list(seen.values())
        for fb in frontier:
            for other in current:
                for cand in (_sum_space(fb, other), _intersect_space(fb, other, d)):
                    if len(seen) >= LATTICE_CAP:
                        break
                    if add(cand):
                        nxt.append(cand)
        frontier = nxt
    # coordinate subspaces
    if d <= 8:
        eye = np.eye(d)
        for size in range(1, d):
            for subset in combinations(range(d), size):
                add(eye[:, list(subset)])
    # seeded random probes
    rng = np.random.default_rng(seed)
    for _ in range(probes):
        k = int(rng.integers(1, d)) if d > 1 else 1
        q, _r = np.linalg.qr(rng.standard_normal((d, k)))
        add(q[:, :k])

    checked = 0
    for basis in seen.values():
        checked += 1
        lhs = basis.shape[1]
        rhs = sum((p * _rank(b @ basis) for p, b in
                   zip(datum.exponents, datum.maps)), Fraction(0))
        if Fraction(lhs) > rhs:
            return DimensionVerdict("counterexample", checked, Subspace(basis))
    return DimensionVerdict("pass", checked, None)


def lieb_ratio(datum: BLDatum, inputs: GaussianInput) -> float:
    """Gaussian ratio (prod det(A_j)^{p_j} / det(sum p_j B_j^T A_j B_j))^{1/2}."""
    mats = inputs.matrices
    if len(mats) != datum.n_maps:
        raise DimensionMismatch("one input per map required")
    log_num = 0.0
    m = np.zeros((datum.dim, datum.dim))
    for p, b, a in zip(datum.exponents, datum.maps, mats):
        if a.shape[0] != b.shape[0]:
            raise DimensionMismatch("input size must match the map codomain")
        sign, ld = np.linalg.slogdet(a)
        if sign <= 0:
            raise DimensionMismatch("inputs must be positive definite")
        log_num += float(p) * ld
        m += float(p) * b.T @ a @ b
    m = 0.5 * (m + m.T)
    eigs = np.linalg.eigvalsh(m)
    if eigs[0] <= EIG_FLOOR * max(1.0, eigs[-1]):
        raise SingularDenominator("denominator quadratic form is singular")
    log_den = float(np.sum(np.log(eigs)))
    return math.exp(0.5 * (log_num - log_den))


@dataclass(frozen=True, eq=False)
class ScalingTrace:
    """Ratio trajectory of the alternating Gaussian updates."""

    ratios: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ratios", np.asarray(self.ratios, dtype=float))

    @property
    def monotone(self) -> bool:
        r = self.ratios
        return bool(np.all(np.diff(r) >= -1e-9 * np.maximum(1.0, r[:-1])))


@dataclass(frozen=True, eq=False)
class BLResult:
    verdict: str  # "finite" or "diverged"
    value: float  # the constant when finite, last ratio otherwise
    trace: ScalingTrace
    rounds: int
    reason: str = ""

    @property
    def finite(self) -> bool:
        return self.verdict == "finite"


def bl_constant(datum: BLDatum, tol: float = 1e-9,
                max_rounds: int = MAX_ROUNDS) -> BLResult:
    """Locate the Gaussian supremum by alternating covariance updates.

    Finite: the ratio moved by relative < tol for 10 straight rounds.
    Diverged: ratio above 1e8, denominator condition above 1e12, a singular
    update, or the round cap without stabilizing.
    """
    dims = datum.codomain_dims()
    inputs = [np.eye(k) for k in dims]
    ratios = []
    stable = 0
    for rounds in range(1, max_rounds + 1):
        try:
            ratio = lieb_ratio(datum, GaussianInput(tuple(inputs)))
        except SingularDenominator:
            return BLResult("diverged", math.inf, ScalingTrace(ratios),
                            rounds, "singular denominator")
        ratios.append(ratio)
        if ratio > RATIO_BLOWUP:
            return BLResult("diverged", math.inf, ScalingTrace(ratios),
                            rounds, "ratio blowup")
        m = np.zeros((datum.dim, datum.dim))
        for p, b, a in zip(datum.exponents, datum.maps, inputs):
            m += float(p) * b.T @ a @ b
        m = 0.5 * (m + m.T)
        eigs = np.linalg.eigvalsh(m)
        if eigs[0] <= EIG_FLOOR * max(1.0, eigs[-1]):
            return BLResult("diverged", math.inf, ScalingTrace(ratios),
                            rounds, "singular denominator")
        if eigs[-1] / eigs[0] > COND_BLOWUP:
            return BLResult("diverged", math.inf, ScalingTrace(ratios),
                            rounds, "ill-conditioned denominator")
        minv = np.linalg.inv(m)
        new_inputs = []
        for b in datum.maps:
            core = b @ minv @ b.T
            core = 0.5 * (core + core.T)
            ce = np.linalg.eigvalsh(core)
            if ce[0] <= EIG_FLOOR * max(1.0, ce[-1]):
                return BLResult("diverged", math.inf, ScalingTrace(ratios),
                                rounds, "singular update")
            new_inputs.append(np.linalg.inv(core))
        inputs = new_inputs
        if len(ratios) >= 2:
            moved = abs(ratios[-1] - ratios[-2]) / max(1.0, abs(ratios[-1]))
            stable = stable + 1 if moved < tol else 0
            if stable >= STABLE_ROUNDS:
                return BLResult("finite", ratios[-1], ScalingTrace(ratios),
                                rounds)
    return BLResult("diverged", ratios[-1] if ratios else math.inf,
                    ScalingTrace(ratios), max_rounds, "round cap")


def gaussian_grid_ratio_max(datum: BLDatum, scales: Sequence[float]) -> float:
    """Brute-force lower bound: max ratio over scalar multiples of identity."""
    dims = datum.codomain_dims()
    best = 0.0
    grids = np.meshgrid(*[np.asarray(scales, dtype=float)] * datum.n_maps,
                        indexing="ij")
    flat = np.stack([g.ravel() for g in grids], axis=1)
    for row in flat:
        inputs = GaussianInput(tuple(a * np.eye(k) for a, k in zip(row, dims)))
        try:
            best = max(best, lieb_ratio(datum, inputs))
        except SingularDenominator:
            continue
    return best


def duplicate_datum(datum: BLDatum) -> BLDatum:
    """Split each map into tau_j = p_j * tau identical copies at exponent 1/tau.

    tau is the least common multiple of the exponent denominators; the
    constant of the duplicated datum equals the original one.
    """
    tau = 1
    for p in datum.exponents:
        tau = tau * p.denominator // math.gcd(tau, p.denominator)
    maps = []
    exps = []
    for p, b in zip(datum.exponents, datum.maps):
        copies = p * tau
        if copies.denominator != 1:
            raise ScalingMismatch("duplication needs integer p_j * tau")
        for _ in range(int(copies)):
            maps.append(b.copy())
            exps.append(Fraction(1, tau))
    return BLDatum(dim=datum.dim, maps=tuple(maps), exponents=tuple(exps))


@dataclass(frozen=True, eq=False)
class OrthoProjectionDatum:
    """Datum of orthogonal projections, stored by their kernels."""

    kernels: tuple
    exponents: tuple

    def __post_init__(self):
        kers = tuple(self.kernels)
        exps = tuple(_as_fraction(p) for p in self.exponents)
        if len(kers) != len(exps) or not kers:
            raise DimensionMismatch("need one exponent per kernel")
        d = kers[0].ambient_dim
        for k in kers:
            if k.ambient_dim != d:
                raise DimensionMismatch("kernels have mixed ambient dimensions")
            if k.dim >= d:
                raise DimensionMismatch("kernels must be proper subspaces")
        object.__setattr__(self, "kernels", kers)
        object.__setattr__(self, "exponents", exps)

    @property
    def dim(self) -> int:
        return self.kernels[0].ambient_dim

    @property
    def n_maps(self) -> int:
        return len(self.kernels)

    def projection_matrix(self, j: int) -> np.ndarray:
        k = self.kernels[j]
        return np.eye(self.dim) - k.basis @ k.basis.T

    def as_bl_datum(self) -> BLDatum:
        maps = tuple(k.complement().basis.T for k in self.kernels)
        return BLDatum(dim=self.dim, maps=maps, exponents=self.exponents)


def pointwise_datum(kernels: Sequence[Subspace], tau: int) -> OrthoProjectionDatum:
    """Projection datum with exponents 1/tau; enforces the scaling balance."""
    kers = tuple(kernels)
    if not kers:
        raise DimensionMismatch("need at least one kernel")
    d = kers[0].ambient_dim
    total = sum(d - k.dim for k in kers)
    if total != tau * d:
        raise ScalingMismatch(
            f"sum of projection ranks {total} != tau * d = {tau * d}")
    return OrthoProjectionDatum(kernels=kers,
                                exponents=tuple(Fraction(1, tau) for _ in kers))


class BLWedgeCheck(NamedTuple):
    primal: float
    dual: float
    vis: float
    bl: float
    primal_bound: float
    dual_bound: float
    primal_ratio: float
    dual_ratio: float
    passed: bool


def _tuple_wedge_sum(field: VectorFieldSample, fixed: np.ndarray, size: int) -> float:
    """sum over ordered `size`-tuples of prod(mu) * |fixed ^ f(x_1) ^ ...|."""
    d = field.dim
    if size == 0:
        return float(abs(np.linalg.det(fixed))) if fixed.shape[1] == d else 1.0
    m = field.weights.size
    if m ** size > 2_000_000:
        raise DimensionMismatch("too many ordered tuples for the exact sum")
    idx = np.indices((m,) * size).reshape(size, -1).T
    vecs = field.vectors[idx]  # (T, size, d)
    mats = np.concatenate(
        [np.broadcast_to(fixed, (vecs.shape[0],) + fixed.shape),
         np.transpose(vecs, (0, 2, 1))], axis=2)
    dets = np.abs(np.linalg.det(mats))
    wts = np.prod(field.weights[idx], axis=1)
    return float(wts @ dets)


def bl_weighted_wedge_check(field: VectorFieldSample,
                            datum: OrthoProjectionDatum,
                            primal_floor: Optional[float] = None,
                            dual_floor: Optional[float] = None) -> BLWedgeCheck:
    """Projection-weighted wedge sums against BL^{-tau} times visibility powers.

    primal_j wedges ker B_j with d - k_j field vectors, dual_j wedges the
    orthogonal complement with k_j of them; the products over j are compared
    with BL^{-tau} Vis^tau and BL^{-tau} Vis^{n-tau} respectively.
    """
    d = datum.dim
    if field.dim != d:
        raise DimensionMismatch("field and datum dimensions differ")
    exps = set(datum.exponents)
    if len(exps) != 1:
        raise ScalingMismatch("wedge check expects uniform exponents 1/tau")
    p = next(iter(exps))
    if p.numerator != 1:
        raise ScalingMismatch("wedge check expects exponents of the form 1/tau")
    tau = p.denominator
    ranks = sum(d - k.dim for k in datum.kernels)
    if ranks != tau * d:
        raise ScalingMismatch("projection ranks violate the scaling balance")
    n = datum.n_maps

    check_dirs = direction_grid(d, 2 * d * d + 200, seed=0)
    if float(np.min(field.gauge(check_dirs))) < 1.0 - 1e-9:
        raise HypothesisViolated("directed mass V(v) dips below 1 on the sphere")

    result = bl_constant(datum.as_bl_datum())
    if not result.finite:
        raise InfiniteBLConstant("wedge comparison needs a finite constant")
    bl = result.value

    primal = 1.0
    dual = 1.0
    for j, ker in enumerate(datum.kernels):
        primal *= _tuple_wedge_sum(field, ker.basis, d - ker.dim)
        dual *= _tuple_wedge_sum(field, ker.complement().basis, ker.dim)
    vis = general_visibility(field)
    primal_bound = bl ** (-tau) * vis ** tau
    dual_bound = bl ** (-tau) * vis ** (n - tau)
    pf = BL_WEDGE_PRIMAL_FLOOR if primal_floor is None else float(primal_floor)
    df = BL_WEDGE_DUAL_FLOOR if dual_floor is None else float(dual_floor)
    primal_ratio = primal / primal_bound
    dual_ratio = dual / dual_bound
    return BLWedgeCheck(
        primal=primal, dual=dual, vis=vis, bl=bl,
        primal_bound=primal_bound, dual_bound=dual_bound,
        primal_ratio=primal_ratio, dual_ratio=dual_ratio,
        passed=bool(primal_ratio >= pf and dual_ratio >= df),
    )


def two_line_datum(theta: float) -> BLDatum:
    """Projections of the plane onto two lines at angle theta, exponents 1."""
    u1 = np.array([[1.0, 0.0]])
    u2 = np.array([[math.cos(theta), math.sin(theta)]])
    return BLDatum(dim=2, maps=(u1, u2), exponents=(Fraction(1), Fraction(1)))
