import numpy as np
import pytest

from medialcover import (
    ClosedSetSpec,
    CoercivityError,
    Point,
    ScalarField,
    SlopeLattice,
    Window,
    asplund_field,
    cc_decompose_c2,
    convexity_probe,
    marginal_inf,
    named_field,
    nondiff_witness,
    one_sided_partials,
    strong_convexity_probe,
    strongify,
    subgradient_box,
)

WINDOW2 = Window([-2, -2], [2, 2])
WINDOW1 = Window([-2], [2])

TWO_POINTS = ClosedSetSpec([Point([-1, 0]), Point([1, 0])], 2)
# strongly convex lift of the two-point set: 2|x1| + |x|^2 - 1
LIFT = strongify(asplund_field(TWO_POINTS))


def kinked_1d() -> ScalarField:
    return ScalarField(lambda x: np.abs(x[..., 0]), 1, tag="abs")


class TestOneSidedPartials:
    def test_abs_kink_at_origin(self):
        g = one_sided_partials(kinked_1d(), [0.0], 0)
        assert g.minus == pytest.approx(-1.0, abs=1e-9)
        assert g.plus == pytest.approx(1.0, abs=1e-9)

    def test_lift_kink(self):
        # subgradient of 2|t| + t^2 at t = 0 is [-2, 2]
        g = one_sided_partials(LIFT, [0.0, 0.5], 0)
        assert g.minus == pytest.approx(-2.0, abs=1e-8)
        assert g.plus == pytest.approx(2.0, abs=1e-8)

    def test_smooth_field(self):
        g = one_sided_partials(named_field("sq_norm", 2), [1.0, 0.0], 0)
        assert g.minus == pytest.approx(2.0, abs=1e-9)
        assert g.plus == pytest.approx(2.0, abs=1e-9)

    def test_order_invariant_on_random_points(self):
        rng = np.random.default_rng(0)
        for x in rng.uniform(-2, 2, size=(100, 2)):
            for axis in range(2):
                g = one_sided_partials(LIFT, x, axis)
                assert g.minus <= g.plus + 1e-8


class TestSubgradientBox:
    def test_abs_interval(self):
        box = subgradient_box(kinked_1d(), [0.0])
        assert box.minus(0) == pytest.approx(-1.0, abs=1e-9)
        assert box.plus(0) == pytest.approx(1.0, abs=1e-9)

    def test_smooth_point_box_collapses(self):
        box = subgradient_box(named_field("sq_norm", 2), [1.0, 2.0])
        assert box.minus(0) == pytest.approx(2.0, abs=1e-8)
        assert box.plus(0) == pytest.approx(2.0, abs=1e-8)
        assert box.minus(1) == pytest.approx(4.0, abs=1e-8)
        assert box.plus(1) == pytest.approx(4.0, abs=1e-8)

    def test_lift_box_at_origin(self):
        box = subgradient_box(LIFT, [0.0, 0.0])
        assert box.intervals[0] == pytest.approx([-2.0, 2.0], abs=1e-8)
        assert box.intervals[1] == pytest.approx([0.0, 0.0], abs=1e-8)

    def test_supporting_line_inequality(self):
        # for every s in the axis interval: f(x + t e_i) >= f(x) + s t - 1e-8
        rng = np.random.default_rng(1)
        x = np.array([0.0, 0.5])
        f0 = LIFT(x)
        for axis in range(2):
            box = subgradient_box(LIFT, x)
            slopes = rng.uniform(box.minus(axis), box.plus(axis), size=10)
            steps = rng.uniform(-2, 2, size=10)
            for s in slopes:
                for t in steps:
                    y = x.copy()
                    y[axis] += t
                    assert LIFT(y) >= f0 + s * t - 1e-8


class TestWitness:
    def test_widest_interior_pair_on_coarse_lattice(self):
        # derivative gap (-2, 2); half-step margin leaves {-1.5, ..., 1.5}
        w = nondiff_witness(LIFT, [0.0, 0.5], SlopeLattice(step=0.5, bound=4.0))
        assert w is not None
        assert w.axis == 0
        assert w.alpha == pytest.approx(-1.5)
        assert w.beta == pytest.approx(1.5)

    def test_smooth_field_has_no_witness(self):
        assert nondiff_witness(named_field("sq_norm", 2), [0.7, -0.3], SlopeLattice(0.5, 4.0)) is None

    def test_abs_smooth_away_from_kink(self):
        assert nondiff_witness(kinked_1d(), [0.3], SlopeLattice(0.5, 4.0)) is None

    def test_gap_below_two_steps_is_unresolved(self):
        # sites 0.1 apart give a derivative gap of 0.2 on the bisector
        narrow = strongify(asplund_field(ClosedSetSpec([Point([-0.05, 0]), Point([0.05, 0])], 2)))
        assert nondiff_witness(narrow, [0.0, 0.4], SlopeLattice(step=0.125, bound=64)) is None
        finer = nondiff_witness(narrow, [0.0, 0.4], SlopeLattice(step=0.0625, bound=64))
        assert finer is not None
        assert finer.alpha == pytest.approx(-0.0625)
        assert finer.beta == pytest.approx(0.0625)

    def test_bound_clamps_the_pair(self):
        w = nondiff_witness(LIFT, [0.0, 0.5], SlopeLattice(step=0.5, bound=1.0))
        assert w is not None
        assert (w.alpha, w.beta) == (-1.0, 1.0)


class TestMarginalInf:
    def test_kink_minimizer(self):
        # inf over t of 2|t| + t^2 + x2^2 - 1 at x2 = 0
        assert marginal_inf(LIFT, 0, 0.0, [0.0]) == pytest.approx(-1.0, abs=1e-6)

    def test_slope_inside_the_kink_keeps_the_minimizer(self):
        assert marginal_inf(LIFT, 0, 1.0, [0.5]) == pytest.approx(-0.75, abs=1e-6)

    def test_complete_the_square_1d(self):
        f = named_field("sq_norm", 1)
        assert marginal_inf(f, 0, 2.0, []) == pytest.approx(-1.0, abs=1e-10)

    def test_far_minimizer_through_bracket_expansion(self):
        f = named_field("sq_norm", 1)
        # inf(x^2 - 40 x) = -400 at x = 20, far outside the initial bracket
        assert marginal_inf(f, 0, 40.0, []) == pytest.approx(-400.0, abs=1e-6)

    def test_non_coercive_input_fails_with_diagnostic(self):
        hollow = ScalarField(lambda x: -np.sum(x * x, axis=-1), 1, tag="concave")
        with pytest.raises(CoercivityError, match="strongly convex"):
            marginal_inf(hollow, 0, 0.0, [], max_doublings=10)

    def test_marginal_function_is_convex(self):
        values = ScalarField(
            lambda x: np.array([marginal_inf(LIFT, 0, 0.5, [t]) for t in np.atleast_1d(x[..., 0])]).reshape(
                x.shape[:-1]
            ),
            1,
            tag="marginal",
        )
        report = convexity_probe(values, WINDOW1, num_samples=200, seed=0)
        assert report.max_violation <= 1e-6

    def test_identity_at_witnessed_point(self):
        # at a kink point the marginal infimum is attained at the point itself
        a = np.array([0.0, 0.37])
        w = nondiff_witness(LIFT, a, SlopeLattice(0.125, 64))
        assert w is not None
        lift_at_a = LIFT(a)
        for slope in (w.alpha, w.beta):
            g = marginal_inf(LIFT, w.axis, slope, [a[1]])
            assert g == pytest.approx(lift_at_a - slope * a[0], abs=1e-6)

    def test_rest_shape_validated(self):
        with pytest.raises(ValueError, match="x_rest"):
            marginal_inf(LIFT, 0, 0.0, [1.0, 2.0])


class TestProbes:
    def test_squared_norm_is_convex(self):
        report = convexity_probe(named_field("sq_norm", 2), WINDOW2, 10_000, seed=0)
        assert report.passed
        assert report.max_violation <= 1e-12

    def test_concave_field_fails(self):
        hollow = ScalarField(lambda x: -np.sum(x * x, axis=-1), 2, tag="concave")
        report = convexity_probe(hollow, WINDOW2, 10_000, seed=0)
        assert not report.passed
        assert report.max_violation > 0.1

    def test_distance_lift_is_convex_for_all_primitive_kinds(self):
        from medialcover import Ball, Segment

        specs = [
            TWO_POINTS,
            ClosedSetSpec([Segment([-1, -0.5], [1, 0.5])], 2),
            ClosedSetSpec([Ball([0.2, -0.1], 0.9)], 2),
            ClosedSetSpec([Point([0, 0]), Ball([1, 1], 0.5), Segment([-1, 1], [-1, -1])], 2),
        ]
        for spec in specs:
            report = convexity_probe(asplund_field(spec), WINDOW2, 10_000, seed=3)
            assert report.max_violation <= 1e-9

    def test_strongified_zero_passes_with_equality(self):
        zero = ScalarField(lambda x: np.zeros(x.shape[:-1]), 2, tag="zero")
        report = strong_convexity_probe(strongify(zero), WINDOW2, 10_000, seed=0)
        assert report.passed

    def test_strongified_lift_passes(self):
        report = strong_convexity_probe(LIFT, WINDOW2, 10_000, seed=0)
        assert report.passed

    def test_half_modulus_fails(self):
        half = ScalarField(lambda x: 0.5 * np.sum(x * x, axis=-1), 2, tag="half")
        report = strong_convexity_probe(half, WINDOW2, 10_000, seed=0)
        assert not report.passed

    def test_sample_count_validated(self):
        with pytest.raises(ValueError, match="num_samples"):
            convexity_probe(named_field("sq_norm", 2), WINDOW2, 0)


class TestDecomposition:
    def sample_ball(self, rng, radius, count=1000):
        pts = rng.uniform(-radius, radius, size=(3 * count, 2))
        pts = pts[np.linalg.norm(pts, axis=1) <= radius]
        return pts[:count]

    @pytest.mark.parametrize("name,radius", [("sin1", 3.0), ("sq_norm", 1.0), ("blend:7", 2.0)])
    def test_reconstruction_is_exact_inside_radius(self, name, radius):
        field = named_field(name, 2)
        dec = cc_decompose_c2(field, radius)
        pts = self.sample_ball(np.random.default_rng(0), radius)
        residual = np.abs(dec.convex_part(pts) - dec.subtracted_quadratic(pts) - field(pts))
        assert residual.max() <= 1e-12

    @pytest.mark.parametrize("name,radius", [("sin1", 3.0), ("sq_norm", 1.0), ("blend:7", 2.0)])
    def test_convex_part_passes_probe_on_double_radius(self, name, radius):
        dec = cc_decompose_c2(named_field(name, 2), radius)
        window = Window([-2 * radius, -2 * radius], [2 * radius, 2 * radius])
        report = convexity_probe(dec.convex_part, window, 10_000, seed=1)
        assert report.max_violation <= 1e-9

    def test_linear_field(self):
        linear = ScalarField(lambda x: 3.0 * x[..., 0] - x[..., 1], 2, tag="linear", smooth_c2=True)
        dec = cc_decompose_c2(linear, 1.5)
        pts = self.sample_ball(np.random.default_rng(1), 1.5, 200)
        residual = np.abs(dec.convex_part(pts) - dec.subtracted_quadratic(pts) - linear(pts))
        assert residual.max() <= 1e-12

    def test_requires_smooth_evaluator(self):
        with pytest.raises(ValueError, match="C\\^2"):
            cc_decompose_c2(named_field("abs", 2), 1.0)

    def test_non_finite_hessian_detected(self):
        spiky = ScalarField(
            lambda x: np.where(np.abs(x[..., 0]) < 0.5, np.inf, 0.0), 2, tag="bad", smooth_c2=True
        )
        with pytest.raises(ValueError, match="non-finite"):
            cc_decompose_c2(spiky, 1.0)

    def test_radius_validated(self):
        with pytest.raises(ValueError, match="radius"):
            cc_decompose_c2(named_field("sin1", 2), -1.0)


def test_ambiguous_points_have_witnesses():
    # classification says ambiguous => the lift shows a derivative gap there
    from medialcover import Classification, nearest_points

    lattice = SlopeLattice(0.125, 64)
    for y in (-1.5, -0.2, 0.8, 1.9):
        point = np.array([0.0, y])
        assert nearest_points(TWO_POINTS, point).classification is Classification.AMBIGUOUS
        assert nondiff_witness(LIFT, point, lattice) is not None
