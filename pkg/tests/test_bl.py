"""Gaussian constants: scaling/dimension conditions, iteration, wedge checks."""
import math
from fractions import Fraction

import numpy as np
import pytest

from bltk.bl import (
    BLDatum,
    GaussianInput,
    OrthoProjectionDatum,
    bl_constant,
    bl_weighted_wedge_check,
    dimension_condition,
    duplicate_datum,
    gaussian_grid_ratio_max,
    lieb_ratio,
    pointwise_datum,
    scaling_condition,
    two_line_datum,
)
from bltk.errors import (
    DimensionMismatch,
    HypothesisViolated,
    InfiniteBLConstant,
    RankDeficient,
    ScalingMismatch,
    SingularDenominator,
)
from bltk.exterior import Subspace
from bltk.visibility import VectorFieldSample


def holder_datum(d=2, parts=2):
    maps = tuple(np.eye(d) for _ in range(parts))
    return BLDatum(dim=d, maps=maps, exponents=(Fraction(1, parts),) * parts)


def loomis_whitney_3d():
    eye = np.eye(3)
    maps = tuple(eye[[a, b]] for a, b in ((1, 2), (0, 2), (0, 1)))
    return BLDatum(dim=3, maps=maps, exponents=(Fraction(1, 2),) * 3)


def degenerate_datum():
    # scaling balances (3/2 + 2/4 = 2) but the e2-axis kills it
    return BLDatum(dim=2,
                   maps=(np.array([[1.0, 0.0]]), np.eye(2)),
                   exponents=(Fraction(3, 2), Fraction(1, 4)))


class TestDatumValidation:
    def test_rejects_nonpositive_exponent(self):
        with pytest.raises(DimensionMismatch):
            BLDatum(dim=2, maps=(np.eye(2),), exponents=(Fraction(0),))

    def test_rejects_huge_denominator(self):
        with pytest.raises(DimensionMismatch):
            BLDatum(dim=2, maps=(np.eye(2),), exponents=(Fraction(1, 128),))

    def test_rejects_rank_deficient_map(self):
        with pytest.raises(RankDeficient):
            BLDatum(dim=2, maps=(np.array([[1.0, 1.0], [2.0, 2.0]]),),
                    exponents=(Fraction(1),))

    def test_rejects_count_mismatch(self):
        with pytest.raises(DimensionMismatch):
            BLDatum(dim=2, maps=(np.eye(2),),
                    exponents=(Fraction(1, 2), Fraction(1, 2)))

    def test_rejects_wide_codomain(self):
        with pytest.raises(DimensionMismatch):
            BLDatum(dim=2, maps=(np.eye(3, 2),), exponents=(Fraction(1),))

    def test_gaussian_input_requires_spd(self):
        with pytest.raises(DimensionMismatch):
            GaussianInput((np.array([[1.0, 2.0], [2.0, 1.0]]),))


class TestScalingCondition:
    def test_holder_balances(self):
        assert scaling_condition(holder_datum())

    def test_two_lines_balance(self):
        assert scaling_condition(two_line_datum(0.7))

    def test_loomis_whitney_balances(self):
        assert scaling_condition(loomis_whitney_3d())

    def test_degenerate_still_balances(self):
        assert scaling_condition(degenerate_datum())

    def test_detects_imbalance(self):
        bad = BLDatum(dim=2, maps=(np.eye(2), np.eye(2)),
                      exponents=(Fraction(1, 2), Fraction(1, 4)))
        assert not scaling_condition(bad)


class TestLiebRatio:
    def test_holder_identity_inputs(self):
        datum = holder_datum()
        ratio = lieb_ratio(datum, GaussianInput((np.eye(2), np.eye(2))))
        assert ratio == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 3, math.pi / 2])
    @pytest.mark.parametrize("scales", [(1.0, 1.0), (2.7, 0.3)])
    def test_two_lines_scale_invariant(self, theta, scales):
        # rank-one maps: the ratio is 1/|sin theta| at every scalar input
        datum = two_line_datum(theta)
        inputs = GaussianInput(tuple(np.array([[a]]) for a in scales))
        assert lieb_ratio(datum, inputs) == pytest.approx(
            1.0 / math.sin(theta), rel=1e-12)

    def test_singular_denominator_raises(self):
        datum = BLDatum(dim=2,
                        maps=(np.array([[1.0, 0.0]]), np.array([[1.0, 0.0]])),
                        exponents=(Fraction(1), Fraction(1)))
        with pytest.raises(SingularDenominator):
            lieb_ratio(datum, GaussianInput((np.eye(1), np.eye(1))))

    def test_input_count_checked(self):
        with pytest.raises(DimensionMismatch):
            lieb_ratio(holder_datum(), GaussianInput((np.eye(2),)))


class TestBLConstant:
    def test_holder_is_one(self):
        res = bl_constant(holder_datum())
        assert res.finite
        assert res.value == pytest.approx(1.0, abs=1e-9)
        assert res.trace.monotone

    def test_loomis_whitney_is_one(self):
        res = bl_constant(loomis_whitney_3d())
        assert res.finite
        assert res.value == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 3, math.pi / 2])
    def test_two_lines_inverse_sine(self, theta):
        res = bl_constant(two_line_datum(theta))
        assert res.finite
        assert res.value == pytest.approx(1.0 / math.sin(theta), rel=1e-9)

    def test_degenerate_diverges(self):
        res = bl_constant(degenerate_datum())
        assert not res.finite
        assert res.reason
        assert math.isinf(res.value)
        assert res.trace.ratios[-1] > res.trace.ratios[0]
        assert res.trace.monotone

    def test_grid_never_beats_iteration(self):
        datum = two_line_datum(math.pi / 6)
        grid_best = gaussian_grid_ratio_max(datum, (0.25, 1.0, 4.0))
        assert grid_best <= bl_constant(datum).value + 1e-9
        assert grid_best == pytest.approx(2.0, rel=1e-12)

    @pytest.mark.parametrize("seed", range(6))
    def test_random_line_triples_finite_and_monotone(self, seed):
        rng = np.random.default_rng(seed)
        angles = rng.uniform(0.2, math.pi - 0.2, size=3)
        maps = tuple(np.array([[math.cos(a), math.sin(a)]]) for a in angles)
        datum = BLDatum(dim=2, maps=maps, exponents=(Fraction(2, 3),) * 3)
        res = bl_constant(datum)
        assert res.finite
        assert res.trace.monotone
        grid_best = gaussian_grid_ratio_max(datum, (0.2, 1.0, 5.0))
        assert grid_best <= res.value + 1e-6 * res.value


class TestDimensionCondition:
    def test_holder_passes(self):
        verdict = dimension_condition(holder_datum())
        assert verdict.passed
        assert verdict.candidates_checked > 0

    def test_two_lines_pass(self):
        assert dimension_condition(two_line_datum(1.0)).passed

    def test_loomis_whitney_passes(self):
        assert dimension_condition(loomis_whitney_3d()).passed

    def test_degenerate_witness_is_second_axis(self):
        verdict = dimension_condition(degenerate_datum())
        assert not verdict.passed
        w = verdict.witness
        assert w is not None and w.dim == 1
        assert abs(w.basis[0, 0]) < 1e-9
        assert abs(abs(w.basis[1, 0]) - 1.0) < 1e-9

    def test_verdict_matches_iteration(self):
        for datum in (holder_datum(), loomis_whitney_3d(),
                      two_line_datum(0.9), degenerate_datum()):
            assert dimension_condition(datum).passed == bl_constant(datum).finite


class TestDuplication:
    def test_splits_by_lcm_of_denominators(self):
        datum = BLDatum(dim=2, maps=(np.eye(2), np.eye(2)),
                        exponents=(Fraction(2, 3), Fraction(1, 3)))
        dup = duplicate_datum(datum)
        assert dup.n_maps == 3
        assert all(p == Fraction(1, 3) for p in dup.exponents)
        assert scaling_condition(dup)

    def test_constant_is_preserved(self):
        eye = np.eye(2)
        rot = np.array([[math.cos(a), math.sin(a)]
                        for a in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)])
        datum = BLDatum(dim=2, maps=tuple(rot[j:j + 1] for j in range(3)),
                        exponents=(Fraction(2, 3),) * 3)
        dup = duplicate_datum(datum)
        assert dup.n_maps == 6
        a = bl_constant(datum)
        b = bl_constant(dup)
        assert a.finite and b.finite
        assert b.value == pytest.approx(a.value, rel=1e-7)

    def test_integer_exponents_copy_maps(self):
        dup = duplicate_datum(two_line_datum(0.6))
        assert dup.n_maps == 2
        assert all(p == 1 for p in dup.exponents)


class TestProjectionData:
    def test_as_bl_datum_recovers_two_lines(self):
        theta = math.pi / 6
        normals = np.array([[0.0, 1.0],
                            [-math.sin(theta), math.cos(theta)]])
        kernels = tuple(Subspace(n.reshape(2, 1)) for n in normals)
        proj = OrthoProjectionDatum(kernels=kernels,
                                    exponents=(Fraction(1), Fraction(1)))
        res = bl_constant(proj.as_bl_datum())
        assert res.finite
        assert res.value == pytest.approx(2.0, rel=1e-9)

    def test_projection_matrix_is_idempotent(self):
        ker = Subspace(np.array([[0.0], [1.0], [0.0]]))
        proj = OrthoProjectionDatum(kernels=(ker, Subspace(np.eye(3)[:, :1])),
                                    exponents=(Fraction(1, 2), Fraction(1, 2)))
        p0 = proj.projection_matrix(0)
        np.testing.assert_allclose(p0 @ p0, p0, atol=1e-12)

    def test_pointwise_datum_balances(self):
        axes = [Subspace(np.eye(3)[:, j:j + 1]) for j in range(3)]
        proj = pointwise_datum(axes, tau=2)
        assert all(p == Fraction(1, 2) for p in proj.exponents)
        assert scaling_condition(proj.as_bl_datum())

    def test_pointwise_datum_rejects_imbalance(self):
        axes = [Subspace(np.eye(2)[:, j:j + 1]) for j in range(2)]
        with pytest.raises(ScalingMismatch):
            pointwise_datum(axes, tau=2)

    def test_rejects_full_kernel(self):
        with pytest.raises(DimensionMismatch):
            OrthoProjectionDatum(kernels=(Subspace(np.eye(2)),),
                                 exponents=(Fraction(1),))


def frame_field(d, weight=1.0):
    return VectorFieldSample(weights=np.full(d, weight), vectors=np.eye(d))


class TestWeightedWedgeCheck:
    def test_plane_frame_ratios(self):
        # kernels = the two axes, tau = 1, constant 1; both sums equal 1
        kernels = (Subspace(np.eye(2)[:, 1:]), Subspace(np.eye(2)[:, :1]))
        proj = pointwise_datum(kernels, tau=1)
        chk = bl_weighted_wedge_check(frame_field(2), proj)
        assert chk.bl == pytest.approx(1.0, abs=1e-9)
        assert chk.primal == pytest.approx(1.0, rel=1e-12)
        assert chk.dual == pytest.approx(1.0, rel=1e-12)
        assert chk.vis == pytest.approx(0.5, rel=0.05)
        assert chk.primal_ratio == pytest.approx(2.0, rel=0.05)
        assert chk.dual_ratio == pytest.approx(2.0, rel=0.05)
        assert chk.passed

    def test_space_frame_against_coordinate_planes(self):
        axes = [Subspace(np.eye(3)[:, j:j + 1]) for j in range(3)]
        proj = pointwise_datum(axes, tau=2)
        chk = bl_weighted_wedge_check(frame_field(3), proj)
        assert chk.bl == pytest.approx(1.0, abs=1e-8)
        assert chk.primal == pytest.approx(8.0, rel=1e-12)
        assert chk.dual == pytest.approx(1.0, rel=1e-12)
        assert chk.vis == pytest.approx(0.75, rel=0.05)
        assert chk.primal_ratio == pytest.approx(8.0 / 0.75 ** 2, rel=0.12)
        assert chk.dual_ratio == pytest.approx(1.0 / 0.75, rel=0.05)
        assert chk.passed

    def test_small_field_violates_hypothesis(self):
        kernels = (Subspace(np.eye(2)[:, 1:]), Subspace(np.eye(2)[:, :1]))
        proj = pointwise_datum(kernels, tau=1)
        with pytest.raises(HypothesisViolated):
            bl_weighted_wedge_check(frame_field(2, weight=0.4), proj)

    def test_divergent_constant_is_rejected(self):
        kernels = (Subspace(np.eye(2)[:, 1:]), Subspace(np.eye(2)[:, 1:]))
        proj = pointwise_datum(kernels, tau=1)
        with pytest.raises(InfiniteBLConstant):
            bl_weighted_wedge_check(frame_field(2), proj)

    def test_mixed_exponents_rejected(self):
        kernels = (Subspace(np.eye(2)[:, 1:]), Subspace(np.eye(2)[:, :1]))
        proj = OrthoProjectionDatum(kernels=kernels,
                                    exponents=(Fraction(1), Fraction(1, 2)))
        with pytest.raises(ScalingMismatch):
            bl_weighted_wedge_check(frame_field(2), proj)
