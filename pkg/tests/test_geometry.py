import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medialcover import Ball, ClosedSetSpec, Point, PolygonBoundary, Segment, Window

UNIT_SQUARE = PolygonBoundary([[0, 0], [1, 0], [1, 1], [0, 1]])


def test_point_distance():
    p = Point([0.0, 0.0])
    assert p.distance(np.array([3.0, 4.0]))[0] == pytest.approx(5.0)


def test_segment_distance_interior_foot():
    s = Segment([0, 0], [2, 0])
    assert s.distance(np.array([1.0, 1.0]))[0] == pytest.approx(1.0)


def test_segment_distance_clamps_to_endpoint():
    s = Segment([0, 0], [2, 0])
    assert s.distance(np.array([3.0, 0.0]))[0] == pytest.approx(1.0)
    assert np.allclose(s.project(np.array([3.0, 4.0]))[0], [2.0, 0.0])


def test_ball_radial_distance():
    b = Ball([0, 0], 1.0)
    assert b.distance(np.array([3.0, 0.0]))[0] == pytest.approx(2.0)
    # inside the shell the distance is measured to the shell, not zero
    assert b.distance(np.array([0.25, 0.0]))[0] == pytest.approx(0.75)


def test_ball_zero_radius_degenerates_to_point():
    b = Ball([1, 2], 0.0)
    assert b.distance(np.array([1.0, 0.0]))[0] == pytest.approx(2.0)
    pts, infinite = b.nearest(np.array([5.0, 2.0]))
    assert not infinite
    assert np.allclose(pts[0], [1, 2])


def test_point_nearest():
    pts, infinite = Point([1.0, 0.0]).nearest(np.array([0.0, 0.0]))
    assert not infinite
    assert np.allclose(pts[0], [1.0, 0.0])


def test_segment_nearest_foot():
    pts, infinite = Segment([-1, 0], [1, 0]).nearest(np.array([0.0, 1.0]))
    assert not infinite
    assert np.allclose(pts[0], [0.0, 0.0])


def test_ball_center_query_flags_infinite_set():
    b = Ball([0, 0], 1.0)
    pts, infinite = b.nearest(np.array([0.0, 0.0]))
    assert infinite
    assert len(pts) == 1
    assert np.linalg.norm(pts[0]) == pytest.approx(1.0)


def test_polygon_distance_and_corner_projection():
    assert UNIT_SQUARE.distance(np.array([0.5, -1.0]))[0] == pytest.approx(1.0)
    assert UNIT_SQUARE.distance(np.array([2.0, 2.0]))[0] == pytest.approx(np.sqrt(2))


def test_polygon_center_has_four_nearest_points():
    pts, infinite = UNIT_SQUARE.nearest(np.array([0.5, 0.5]))
    assert not infinite
    assert len(pts) == 4
    for p in pts:
        assert np.linalg.norm(p - [0.5, 0.5]) == pytest.approx(0.5)


def test_polygon_tie_candidate_on_diagonal():
    x = np.array([[0.5, 0.5], [0.5, -0.9]])
    flags = UNIT_SQUARE.tie_candidate(x, 1e-9)
    assert flags.tolist() == [True, False]


@pytest.mark.parametrize(
    "primitive",
    [
        Point([0.3, -0.7]),
        Segment([-1, -1], [1, 0.5]),
        Ball([0.2, 0.1], 0.8),
        UNIT_SQUARE,
    ],
)
def test_nearest_points_attain_the_distance(primitive):
    rng = np.random.default_rng(42)
    for x in rng.uniform(-2, 2, size=(50, 2)):
        d = primitive.distance(x[None, :])[0]
        pts, _ = primitive.nearest(x)
        best = min(np.linalg.norm(x - p) for p in pts)
        assert abs(best - d) <= 1e-12 * (1 + d)
        for p in pts:
            assert abs(np.linalg.norm(x - p) - d) <= 1e-12 * (1 + d)


@pytest.mark.parametrize(
    "primitive",
    [Point([0.3, -0.7]), Segment([-1, -1], [1, 0.5]), Ball([0.2, 0.1], 0.8), UNIT_SQUARE],
)
def test_primitive_distance_is_one_lipschitz(primitive):
    rng = np.random.default_rng(7)
    x = rng.uniform(-3, 3, size=(10_000, 2))
    y = rng.uniform(-3, 3, size=(10_000, 2))
    dx = primitive.distance(x)
    dy = primitive.distance(y)
    assert np.all(np.abs(dx - dy) <= np.linalg.norm(x - y, axis=1) + 1e-12)


coords = st.tuples(
    st.floats(-5, 5, allow_nan=False), st.floats(-5, 5, allow_nan=False)
)


@settings(max_examples=100, deadline=None)
@given(x=coords, y=coords)
def test_segment_lipschitz_property(x, y):
    s = Segment([-1, 0], [1, 1])
    x, y = np.array(x), np.array(y)
    assert abs(s.distance(x[None])[0] - s.distance(y[None])[0]) <= np.linalg.norm(x - y) + 1e-12


class TestValidation:
    def test_segment_endpoints_must_differ(self):
        with pytest.raises(ValueError, match="distinct"):
            Segment([1, 1], [1, 1])

    def test_polygon_needs_three_vertices(self):
        with pytest.raises(ValueError, match="3 vertices"):
            PolygonBoundary([[0, 0], [1, 1]])

    def test_polygon_rejects_repeated_vertices(self):
        with pytest.raises(ValueError, match="coincide"):
            PolygonBoundary([[0, 0], [1, 0], [0, 0], [0, 1]])

    def test_ball_rejects_negative_radius(self):
        with pytest.raises(ValueError, match="radius"):
            Ball([0, 0], -1.0)

    def test_nan_coordinates_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            Point([np.nan, 0.0])

    def test_set_needs_primitives(self):
        with pytest.raises(ValueError, match="at least one"):
            ClosedSetSpec([], 2)

    def test_set_dimension_mismatch(self):
        with pytest.raises(ValueError, match="does not match"):
            ClosedSetSpec([Point([0, 0, 0])], 2)

    def test_set_dimension_range(self):
        with pytest.raises(ValueError, match="1, 2 or 3"):
            ClosedSetSpec([Point([0])], 4)

    def test_window_orders_corners(self):
        with pytest.raises(ValueError, match="lower < upper"):
            Window([1, 0], [0, 1])

    def test_primitive_arrays_are_read_only(self):
        p = Point([1.0, 2.0])
        with pytest.raises(ValueError):
            p.coords[0] = 5.0


class TestJson:
    def test_round_trip(self):
        spec = ClosedSetSpec(
            [Point([1, 0]), Segment([0, 0], [1, 1]), UNIT_SQUARE, Ball([0, 0], 2.0)], 2
        )
        again = ClosedSetSpec.from_json(json.dumps(spec.to_dict()))
        assert again.to_dict() == spec.to_dict()

    def test_unknown_primitive_type_rejected(self):
        doc = {"dimension": 2, "primitives": [{"type": "blob"}]}
        with pytest.raises(ValueError, match="unknown primitive type 'blob'"):
            ClosedSetSpec.from_dict(doc)

    def test_missing_field_named_in_error(self):
        doc = {"dimension": 2, "primitives": [{"type": "ball", "center": [0, 0]}]}
        with pytest.raises(ValueError, match="radius"):
            ClosedSetSpec.from_dict(doc)

    def test_missing_dimension(self):
        with pytest.raises(ValueError, match="dimension"):
            ClosedSetSpec.from_dict({"primitives": [{"type": "point", "coords": [0, 0]}]})


def test_window_grid_and_sampling():
    w = Window([-2, -2], [2, 2])
    pts = w.grid_points(5)
    assert pts.shape == (25, 2)
    assert np.allclose(pts[0], [-2, -2]) and np.allclose(pts[-1], [2, 2])
    rng = np.random.default_rng(0)
    sample = w.sample(rng, 100)
    assert np.all(w.contains(sample))
