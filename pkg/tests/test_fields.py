import numpy as np
import pytest

from medialcover import (
    Ball,
    ClosedSetSpec,
    Point,
    Window,
    asplund_field,
    named_field,
    quadratic_sine_blend,
    squared_norm,
    strongify,
)

TWO_POINTS = ClosedSetSpec([Point([-1, 0]), Point([1, 0])], 2)
CIRCLE = ClosedSetSpec([Ball([0, 0], 1.0)], 2)


def test_two_point_convex_lift_has_closed_form():
    # |x|^2 - min((x1 -+ 1)^2 + x2^2) simplifies to 2|x1| - 1
    f = asplund_field(TWO_POINTS)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-2, 2, size=(500, 2))
    assert np.allclose(f(pts), 2 * np.abs(pts[:, 0]) - 1, atol=1e-12)


def test_single_point_lift_vanishes():
    f = asplund_field(ClosedSetSpec([Point([0, 0])], 2))
    pts = np.random.default_rng(1).uniform(-2, 2, size=(100, 2))
    assert np.allclose(f(pts), 0.0, atol=1e-12)


def test_circle_lift_has_closed_form():
    # |x|^2 - (|x| - 1)^2 = 2|x| - 1
    f = asplund_field(CIRCLE)
    pts = np.random.default_rng(2).uniform(-2, 2, size=(500, 2))
    assert np.allclose(f(pts), 2 * np.linalg.norm(pts, axis=1) - 1, atol=1e-12)


def test_strongify_adds_squared_norm():
    f = asplund_field(TWO_POINTS)
    g = strongify(f)
    x = np.array([0.3, -0.7])
    assert g(x) == pytest.approx(f(x) + 0.3**2 + 0.7**2)


def test_strongify_of_zero_is_squared_norm():
    from medialcover import ScalarField

    zero = ScalarField(lambda x: np.zeros(x.shape[:-1]), 2, tag="zero")
    g = strongify(zero)
    assert g([1.0, 2.0]) == pytest.approx(5.0)


class TestNamedFields:
    def test_known_names(self):
        assert named_field("abs", 2)([-3.0, 1.0]) == pytest.approx(3.0)
        assert named_field("norm", 2)([3.0, 4.0]) == pytest.approx(5.0)
        assert named_field("sq_norm", 2)([3.0, 4.0]) == pytest.approx(25.0)
        assert named_field("sin1", 2)([np.pi / 2, 9.0]) == pytest.approx(1.0)

    def test_smoothness_flags(self):
        assert named_field("sq_norm", 2).smooth_c2
        assert named_field("sin1", 2).smooth_c2
        assert named_field("blend:3", 2).smooth_c2
        assert not named_field("abs", 2).smooth_c2
        assert not named_field("norm", 2).smooth_c2

    def test_blend_is_seeded(self):
        a = quadratic_sine_blend(2, seed=5)
        b = quadratic_sine_blend(2, seed=5)
        c = quadratic_sine_blend(2, seed=6)
        x = np.array([0.4, -1.2])
        assert a(x) == b(x)
        assert a(x) != c(x)

    def test_asplund_reference_needs_a_set(self):
        with pytest.raises(ValueError, match="needs a set"):
            named_field("asplund:set", 2)
        f = named_field("asplund:set", 2, set_spec=TWO_POINTS)
        assert f([0.5, 0.0]) == pytest.approx(0.0)

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown field"):
            named_field("mystery", 2)


def test_field_shape_handling():
    f = squared_norm(2)
    assert isinstance(f([1.0, 1.0]), float)
    out = f(np.ones((4, 5, 2)))
    assert out.shape == (4, 5)
    with pytest.raises(ValueError, match="dimension"):
        f(np.ones((3, 3)))  # interpreted as 3 points of dimension 3


def test_lift_is_vectorized_consistently():
    f = strongify(asplund_field(CIRCLE))
    pts = Window([-2, -2], [2, 2]).sample(np.random.default_rng(3), 64)
    batch = f(pts)
    single = np.array([f(p) for p in pts])
    assert np.allclose(batch, single)
