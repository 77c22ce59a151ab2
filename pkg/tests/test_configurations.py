"""Slab-family quadrature, size sweeps, and sampled variety functionals."""
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from bltk.configurations import (
    CellFunctional,
    Slab,
    SlabFamily,
    VarietyModel,
    cell_functional_variety,
    default_reach,
    fit_log_slope,
    kjplane_ratio,
    lhs_affine,
    lhs_bl,
    lhs_kjplane,
    size_sweep,
    unit_cell_centers,
    variety_inequality_check,
)
from bltk.errors import (
    DimensionMismatch,
    EmptyFamily,
    InfiniteBLConstant,
    Unsupported,
)
from bltk.exterior import AffineSubspace, Subspace


def line_span(*coords):
    v = np.asarray(coords, dtype=float)
    return Subspace((v / np.linalg.norm(v)).reshape(-1, 1))


def strip(direction, offset=None, size=math.inf, radius=1.0, weight=1.0):
    d = len(direction)
    base = np.zeros(d) if offset is None else np.asarray(offset, dtype=float)
    return Slab(core=AffineSubspace(base, line_span(*direction)),
                size=size, radius=radius, weight=weight)


def perpendicular_strips(radius=1.0, size=math.inf):
    vert = strip((0.0, 1.0), size=size, radius=radius)
    horiz = strip((1.0, 0.0), size=size, radius=radius)
    return [SlabFamily(1, (vert,), line_span(0, 1)),
            SlabFamily(2, (horiz,), line_span(1, 0))]


class TestSlab:
    def test_infinite_strip_membership(self):
        s = strip((0.0, 1.0))
        got = s.contains(np.array([[0.5, 100.0], [1.5, 0.0], [1.0, -3.0]]))
        assert got.tolist() == [True, False, True]

    def test_finite_size_clips_core_extent(self):
        s = strip((1.0, 0.0), size=2.0, radius=0.5)
        got = s.contains(np.array([[1.9, 0.4], [2.2, 0.0], [0.0, 0.6]]))
        assert got.tolist() == [True, False, False]

    def test_zero_core_is_a_ball(self):
        s = Slab(core=AffineSubspace(np.zeros(3), Subspace(np.zeros((3, 0)))),
                 radius=2.0)
        got = s.contains(np.array([[1.0, 1.0, 1.0], [2.0, 0.1, 0.0]]))
        assert got.tolist() == [True, False]

    def test_rigid_motion_invariance(self):
        rng = np.random.default_rng(3)
        s = strip((2.0, 1.0), offset=(0.3, -0.2), size=1.5, radius=0.7)
        ang = 0.83
        q = np.array([[math.cos(ang), -math.sin(ang)],
                      [math.sin(ang), math.cos(ang)]])
        t = np.array([0.4, 1.1])
        moved = Slab(core=AffineSubspace(q @ s.core.base_point + t,
                                         Subspace(q @ s.core.direction.basis)),
                     size=s.size, radius=s.radius)
        pts = rng.uniform(-3, 3, size=(400, 2))
        np.testing.assert_array_equal(s.contains(pts),
                                      moved.contains(pts @ q.T + t))

    def test_rejects_bad_parameters(self):
        with pytest.raises(DimensionMismatch):
            strip((1.0, 0.0), radius=-1.0)
        with pytest.raises(DimensionMismatch):
            strip((1.0, 0.0), size=0.0)

    def test_bbox_tracks_size_and_radius(self):
        s = strip((1.0, 0.0), size=2.0, radius=0.5)
        lo, hi = s.bbox()
        np.testing.assert_allclose(lo, [-2.5, -0.5])
        np.testing.assert_allclose(hi, [2.5, 0.5])


class TestSlabFamily:
    def test_warns_beyond_delta(self):
        tilted = strip((math.sin(0.2), math.cos(0.2)))
        with pytest.warns(UserWarning, match="exceeds delta"):
            SlabFamily(1, (tilted,), line_span(0, 1), delta=0.05)

    def test_quiet_within_delta(self):
        tilted = strip((math.sin(0.03), math.cos(0.03)))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            SlabFamily(1, (tilted,), line_span(0, 1), delta=0.05)

    def test_empty_family_rejected(self):
        with pytest.raises(EmptyFamily):
            SlabFamily(1, (), line_span(0, 1))

    def test_core_dim_mismatch_rejected(self):
        ball = Slab(core=AffineSubspace(np.zeros(2), Subspace(np.zeros((2, 0)))))
        with pytest.raises(DimensionMismatch):
            SlabFamily(1, (ball,), line_span(0, 1))


class TestKjplane:
    def test_perpendicular_strips_exactly_four(self):
        lhs = lhs_kjplane(perpendicular_strips())
        assert lhs.value == pytest.approx(4.0, abs=1e-12)
        assert lhs.stderr == pytest.approx(0.0, abs=1e-12)

    def test_grid_families_ratio_constant(self):
        for m in (1, 2, 3):
            verts = [strip((0.0, 1.0), offset=(4.0 * i, 0.0)) for i in range(m)]
            horizs = [strip((1.0, 0.0), offset=(0.0, 4.0 * i)) for i in range(m)]
            fams = [SlabFamily(1, tuple(verts), line_span(0, 1)),
                    SlabFamily(2, tuple(horizs), line_span(1, 0))]
            rep = kjplane_ratio(fams)
            assert rep.lhs.value == pytest.approx(4.0 * m * m, abs=1e-9)
            assert rep.rhs == pytest.approx(float(m * m))
            assert rep.ratio == pytest.approx(4.0, abs=1e-9)

    def test_disjoint_families_vanish(self):
        near = strip((0.0, 1.0), size=1.0)
        far = strip((1.0, 0.0), offset=(10.0, 0.0), size=1.0)
        fams = [SlabFamily(1, (near,), line_span(0, 1)),
                SlabFamily(2, (far,), line_span(1, 0))]
        lhs = lhs_kjplane(fams)
        assert lhs.value == 0.0 and lhs.stderr == 0.0

    def test_single_family_rejected(self):
        fam = SlabFamily(1, (strip((0.0, 1.0)),), line_span(0, 1))
        with pytest.raises(DimensionMismatch):
            lhs_kjplane([fam])

    def test_core_sum_must_match_dimension(self):
        fams = [SlabFamily(1, (strip((0.0, 1.0)),), line_span(0, 1)),
                SlabFamily(2, (strip((0.0, 1.0), offset=(0.5, 0.0)),),
                           line_span(0, 1)),
                SlabFamily(3, (strip((1.0, 0.0)),), line_span(1, 0))]
        with pytest.raises(DimensionMismatch):
            lhs_kjplane(fams)

    def test_common_rotation_preserves_value(self):
        ang = math.pi / 6
        q = np.array([[math.cos(ang), -math.sin(ang)],
                      [math.sin(ang), math.cos(ang)]])
        fams = []
        for j, direction in enumerate(((0.0, 1.0), (1.0, 0.0))):
            core = q @ np.asarray(direction)
            fams.append(SlabFamily(j + 1, (strip(tuple(core)),),
                                   line_span(*core)))
        with pytest.warns(UserWarning, match="truncated"):
            lhs = lhs_kjplane(fams, h=1.0 / 16.0)
        assert lhs.value == pytest.approx(4.0, rel=0.05)

    def test_empty_input_rejected(self):
        with pytest.raises(EmptyFamily):
            lhs_kjplane([])


class TestAffine:
    def test_matches_kjplane_on_orthogonal_strips(self):
        fams = perpendicular_strips()
        rep = lhs_affine(fams)
        assert rep.lhs.value == pytest.approx(lhs_kjplane(fams).value, abs=1e-12)
        assert rep.rhs == pytest.approx(1.0)
        assert rep.ratio == pytest.approx(4.0, abs=1e-12)

    @pytest.mark.parametrize("theta", [math.pi / 3, math.pi / 4])
    def test_angled_strips_are_theta_invariant(self, theta):
        # wider intersection times smaller wedge: the product stays 4
        second = strip((math.cos(theta), math.sin(theta)))
        fams = [SlabFamily(1, (strip((0.0, 1.0)),), line_span(0, 1)),
                SlabFamily(2, (second,),
                           line_span(math.cos(theta), math.sin(theta)))]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep = lhs_affine(fams, h=1.0 / 16.0)
        assert rep.lhs.value == pytest.approx(4.0, rel=0.03)

    def test_parallel_families_vanish(self):
        fams = [SlabFamily(1, (strip((0.0, 1.0)),), line_span(0, 1)),
                SlabFamily(2, (strip((0.0, 1.0), offset=(0.5, 0.0)),),
                           line_span(0, 1))]
        with pytest.warns(UserWarning, match="truncated"):
            rep = lhs_affine(fams)
        assert rep.lhs.value == 0.0

    def test_weight_doubling_homogeneity(self):
        base = perpendicular_strips()
        doubled = [SlabFamily(f.index,
                              tuple(Slab(core=s.core, size=s.size,
                                         radius=s.radius, weight=2.0 * s.weight)
                                    for s in f.slabs),
                              f.nominal)
                   for f in base]
        a = lhs_affine(base)
        b = lhs_affine(doubled)
        assert b.lhs.value == pytest.approx(4.0 * a.lhs.value, rel=1e-8)
        assert b.ratio == pytest.approx(a.ratio, rel=1e-8)

    def test_sign_of_weights_is_immaterial_for_single_slabs(self):
        flipped = [SlabFamily(f.index,
                              tuple(Slab(core=s.core, size=s.size,
                                         radius=s.radius, weight=-s.weight)
                                    for s in f.slabs),
                              f.nominal)
                   for f in perpendicular_strips()]
        rep = lhs_affine(flipped)
        assert rep.lhs.value == pytest.approx(4.0, abs=1e-12)


class TestBLQuadrature:
    def test_orthogonal_strips_reproduce_kjplane(self):
        fams = perpendicular_strips()
        rep = lhs_bl(fams, (Fraction(1), Fraction(1)))
        assert rep.lhs.value == pytest.approx(4.0, abs=1e-12)
        assert rep.constant == pytest.approx(1.0, abs=1e-9)
        assert rep.ratio == pytest.approx(4.0, abs=1e-12)

    def test_interval_holder_smoke(self):
        ball = Slab(core=AffineSubspace(np.zeros(1), Subspace(np.zeros((1, 0)))),
                    radius=1.0)
        nominal = Subspace(np.zeros((1, 0)))
        fams = [SlabFamily(1, (ball,), nominal),
                SlabFamily(2, (ball,), nominal)]
        rep = lhs_bl(fams, (Fraction(1, 2), Fraction(1, 2)))
        assert rep.lhs.value == pytest.approx(2.0, abs=1e-12)
        assert rep.constant == pytest.approx(1.0, abs=1e-9)

    def test_parallel_kernels_diverge(self):
        fams = [SlabFamily(1, (strip((0.0, 1.0)),), line_span(0, 1)),
                SlabFamily(2, (strip((0.0, 1.0), offset=(0.5, 0.0)),),
                           line_span(0, 1))]
        with pytest.raises(InfiniteBLConstant):
            lhs_bl(fams, (Fraction(1), Fraction(1)))

    def test_exponent_count_checked(self):
        with pytest.raises(DimensionMismatch):
            lhs_bl(perpendicular_strips(), (Fraction(1),))


class TestSizeSweep:
    def test_perpendicular_generator_is_flat(self):
        def gen(r):
            return perpendicular_strips(size=r)

        rep = size_sweep(gen, (1.0, 10.0, 100.0, 1000.0))
        assert abs(rep.slope) < 0.05
        for row in rep.rows:
            assert row.ratio == pytest.approx(4.0, abs=1e-9)

    def test_fit_detects_power_growth(self):
        sizes = (1.0, 10.0, 100.0, 1000.0)
        ratios = tuple(4.0 * r ** 0.2 for r in sizes)
        assert fit_log_slope(sizes, ratios) == pytest.approx(0.2, abs=1e-9)

    @pytest.mark.parametrize("seed", range(3))
    def test_near_axis_random_families_stay_flat(self, seed):
        rng = np.random.default_rng(seed)

        def gen(r):
            # crossings sit inside every slab already at r = 1, so the
            # overlap is local and the ratio must not drift with r
            fams = []
            for j, axis in enumerate(((0.0, 1.0), (1.0, 0.0))):
                slabs = []
                for _ in range(2):
                    ang = rng.uniform(-0.01, 0.01)
                    c, s = math.cos(ang), math.sin(ang)
                    direction = (axis[0] * c - axis[1] * s,
                                 axis[0] * s + axis[1] * c)
                    normal = np.array([-direction[1], direction[0]])
                    offset = normal * rng.uniform(-0.35, 0.35)
                    slabs.append(strip(direction, offset=tuple(offset),
                                       size=r, radius=rng.uniform(0.4, 0.6)))
                fams.append(SlabFamily(j + 1, tuple(slabs),
                                       line_span(*axis), delta=0.05))
            return fams

        sizes = (1.0, 10.0, 100.0, 1000.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep = size_sweep(gen, sizes)
        assert abs(rep.slope) < 0.05

    def test_unknown_mode_rejected(self):
        with pytest.raises(DimensionMismatch):
            size_sweep(lambda r: perpendicular_strips(), (1.0, 10.0),
                       mode="other")

    def test_bl_mode_needs_exponents(self):
        with pytest.raises(DimensionMismatch):
            size_sweep(lambda r: perpendicular_strips(), (1.0, 10.0), mode="bl")


def axis_line(axis, offset):
    d = len(offset)
    e = np.zeros(d)
    e[axis] = 1.0
    return AffineSubspace(np.asarray(offset, dtype=float), Subspace(e.reshape(d, 1)))


class TestCellFunctional:
    def test_axis_lines_exact_square(self):
        models = [VarietyModel.planes((axis_line(0, (0.0, 0.0)),)),
                  VarietyModel.planes((axis_line(1, (0.0, 0.0)),))]
        cf = cell_functional_variety(models, (0.0, 0.0), reach=5.0,
                                     n_samples=500, seed=1)
        assert cf.value == pytest.approx(100.0, abs=1e-9)
        assert cf.stderr == pytest.approx(0.0, abs=1e-9)

    def test_parallel_lines_vanish(self):
        models = [VarietyModel.planes((axis_line(0, (0.0, 0.0)),)),
                  VarietyModel.planes((axis_line(0, (0.0, 1.0)),))]
        cf = cell_functional_variety(models, (0.0, 0.0), reach=5.0,
                                     n_samples=200, seed=1)
        assert cf.value == 0.0

    def test_linear_graph_matches_plane(self):
        direction = np.array([1.0, 0.0])

        def chart(t):
            return t * direction

        def jacobian(t):
            return np.broadcast_to(direction.reshape(2, 1),
                                   (t.shape[0], 2, 1))

        graph = VarietyModel.graph(chart, jacobian, (-1.0,), (1.0,),
                                   degree=1, ambient_dim=2)
        vert = VarietyModel.planes((axis_line(1, (0.0, 0.0)),))
        g = cell_functional_variety([graph, vert], (0.0, 0.0), reach=5.0,
                                    n_samples=400, seed=2)
        ref = cell_functional_variety(
            [VarietyModel.planes((AffineSubspace(np.zeros(2),
                                                 Subspace(direction.reshape(2, 1))),)),
             vert], (0.0, 0.0), reach=5.0, n_samples=400, seed=2)
        # the chart covers [-1,1] of the line instead of the reach ball
        assert g.value == pytest.approx(ref.value * 2.0 / 10.0, rel=1e-9)

    def test_circle_pair_against_arc_quadrature(self):
        c1 = VarietyModel.sphere((0.0, 0.0), 1.0)
        c2 = VarietyModel.sphere((1.0, 0.0), 1.0)
        center = np.array([0.5, math.sqrt(3.0) / 2.0])
        reach = 0.4
        cf = cell_functional_variety([c1, c2], center, reach=reach,
                                     n_samples=60_000, seed=3)

        def arc(cc):
            th = np.linspace(0.0, 2.0 * math.pi, 20_001)[:-1]
            pts = np.asarray(cc, dtype=float) + np.stack(
                [np.cos(th), np.sin(th)], axis=1)
            keep = np.linalg.norm(pts - center, axis=1) <= reach
            return th[keep], np.full(int(keep.sum()), 2.0 * math.pi / th.size)

        th1, w1 = arc((0.0, 0.0))
        th2, w2 = arc((1.0, 0.0))
        wedge = np.abs(np.sin(th1[:, None] - th2[None, :]))
        brute = float(w1 @ wedge @ w2)
        assert cf.value == pytest.approx(brute, abs=3.0 * cf.stderr + 0.02 * brute)

    def test_strata_additivity(self):
        l1 = axis_line(0, (0.0, 0.0))
        l2 = axis_line(0, (0.0, 0.5))
        vert = VarietyModel.planes((axis_line(1, (0.2, 0.0)),))
        union = cell_functional_variety(
            [VarietyModel.planes((l1, l2)), vert], (0.0, 0.0), reach=3.0,
            n_samples=40_000, seed=4)
        part1 = cell_functional_variety(
            [VarietyModel.planes((l1,)), vert], (0.0, 0.0), reach=3.0,
            n_samples=40_000, seed=5)
        part2 = cell_functional_variety(
            [VarietyModel.planes((l2,)), vert], (0.0, 0.0), reach=3.0,
            n_samples=40_000, seed=6)
        spread = 3.0 * (union.stderr + part1.stderr + part2.stderr)
        assert union.value == pytest.approx(part1.value + part2.value,
                                            abs=max(spread, 1e-9))

    def test_tangent_dimensions_must_fill_space(self):
        models = [VarietyModel.planes((axis_line(0, (0.0, 0.0, 0.0)),)),
                  VarietyModel.planes((axis_line(1, (0.0, 0.0, 0.0)),))]
        with pytest.raises(DimensionMismatch):
            cell_functional_variety(models, (0.0, 0.0, 0.0), reach=2.0)

    def test_negative_value_impossible(self):
        with pytest.raises(DimensionMismatch):
            CellFunctional(cell=(0,), value=-1.0, stderr=0.0)

    def test_default_reach_is_capped(self):
        assert default_reach(2) == 50.0
        assert default_reach(3) == 50.0


def line_grid_models(m):
    verts = tuple(axis_line(1, (i + 0.5, 0.0)) for i in range(m))
    horizs = tuple(axis_line(0, (0.0, j + 0.5)) for j in range(m))
    return [VarietyModel.planes(verts), VarietyModel.planes(horizs)]


class TestVarietyInequality:
    @pytest.mark.parametrize("m", [1, 2, 4])
    def test_line_grid_ratio_constant(self, m):
        centers = unit_cell_centers((0.0, 0.0), (float(m), float(m)))
        rep = variety_inequality_check(line_grid_models(m), centers,
                                       reach=0.5, n_samples=3000, seed=0)
        # one crossing per cell with local measure (2N)^2 = 1
        assert rep.ratio == pytest.approx(1.0, abs=max(3.0 * rep.stderr / rep.rhs,
                                                       0.05))

    def test_bl_weighted_matches_plain_for_orthogonal_lines(self):
        centers = unit_cell_centers((0.0, 0.0), (2.0, 2.0))
        models = line_grid_models(2)
        plain = variety_inequality_check(models, centers, reach=0.5,
                                         n_samples=2000, seed=1)
        weighted = variety_inequality_check(models, centers, reach=0.5,
                                            n_samples=2000, seed=1,
                                            mode="bl_weighted", tau=1)
        spread = 3.0 * (plain.stderr + weighted.stderr)
        assert weighted.total == pytest.approx(plain.total,
                                               abs=max(spread, 1e-9))

    def test_sphere_and_line_stable_under_refinement(self):
        sphere = VarietyModel.sphere((0.0, 0.0, 0.0), 1.0)
        line = VarietyModel.planes(
            (AffineSubspace(np.array([0.3, 0.2, 0.0]),
                            Subspace(np.array([[0.0], [0.0], [1.0]]))),))
        coarse = variety_inequality_check([sphere, line], [(0.0, 0.0, 0.0)],
                                          reach=2.0, n_samples=3000, seed=2)
        fine = variety_inequality_check([sphere, line], [(0.0, 0.0, 0.0)],
                                        reach=2.0, n_samples=12_000, seed=7)
        assert coarse.total > 0
        sigma = 3.0 * math.hypot(coarse.stderr, fine.stderr)
        assert fine.total == pytest.approx(coarse.total, abs=sigma)

    def test_same_seed_reproduces_report(self):
        centers = unit_cell_centers((0.0, 0.0), (2.0, 2.0))
        a = variety_inequality_check(line_grid_models(2), centers, reach=0.5,
                                     n_samples=1000, seed=9)
        b = variety_inequality_check(line_grid_models(2), centers, reach=0.5,
                                     n_samples=1000, seed=9)
        assert a.total == b.total and a.stderr == b.stderr

    def test_tau_must_balance(self):
        with pytest.raises(DimensionMismatch):
            variety_inequality_check(line_grid_models(1),
                                     [(0.5, 0.5)], reach=0.5,
                                     mode="bl_weighted", tau=2)

    def test_unknown_mode_rejected(self):
        with pytest.raises(DimensionMismatch):
            variety_inequality_check(line_grid_models(1), [(0.5, 0.5)],
                                     mode="nope")


class TestGuards:
    def test_cell_cap_enforced(self):
        fams = perpendicular_strips()
        with pytest.raises(Unsupported):
            lhs_kjplane(fams, h=1e-4)

    def test_unit_cell_centers_layout(self):
        got = unit_cell_centers((0.0, 0.0), (2.0, 1.0))
        np.testing.assert_allclose(got, [[0.5, 0.5], [1.5, 0.5]])
