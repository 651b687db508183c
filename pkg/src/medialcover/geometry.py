"""Closed-set descriptions and exact per-primitive nearest-point queries.

A closed set is declared as a finite union of primitives: points, segments,
polygon boundary loops, and circle/sphere shells.  Each primitive answers
exact Euclidean distance and nearest-point queries in closed form, both for
single points and for batched arrays of query points.

All coordinates are double precision.  Instances are frozen and their arrays
are marked read-only, so they are safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Point",
    "Segment",
    "PolygonBoundary",
    "Ball",
    "Primitive",
    "ClosedSetSpec",
    "Window",
]


def _frozen_array(values, name: str, shape_hint: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {values!r}")
    if arr.ndim == 0:
        raise ValueError(f"{name} must be {shape_hint}, got a scalar")
    arr.setflags(write=False)
    return arr


def _batch(x: np.ndarray, dimension: int) -> tuple[np.ndarray, bool]:
    """Coerce ``x`` to shape (N, dimension); report whether it was a single point."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dimension:
        raise ValueError(f"expected points of dimension {dimension}, got shape {arr.shape}")
    return arr, single


@dataclass(frozen=True)
class Point:
    """A single point site."""

    coords: np.ndarray

    def __init__(self, coords):
        object.__setattr__(self, "coords", _frozen_array(coords, "point coords", "a vector"))
        if self.coords.ndim != 1:
            raise ValueError("point coords must be a flat vector")

    @property
    def dimension(self) -> int:
        return self.coords.shape[0]

    def distance(self, x: np.ndarray) -> np.ndarray:
        x, _ = _batch(x, self.dimension)
        return np.linalg.norm(x - self.coords, axis=1)

    def project(self, x: np.ndarray) -> np.ndarray:
        x, _ = _batch(x, self.dimension)
        return np.broadcast_to(self.coords, x.shape).copy()

    def tie_candidate(self, x: np.ndarray, tol: float) -> np.ndarray:
        x, _ = _batch(x, self.dimension)
        return np.zeros(x.shape[0], dtype=bool)

    def nearest(self, x: np.ndarray) -> tuple[list[np.ndarray], bool]:
        return [self.coords.copy()], False


@dataclass(frozen=True)
class Segment:
    """A closed line segment with distinct endpoints."""

    a: np.ndarray
    b: np.ndarray

    def __init__(self, a, b):
        object.__setattr__(self, "a", _frozen_array(a, "segment endpoint a", "a vector"))
        object.__setattr__(self, "b", _frozen_array(b, "segment endpoint b", "a vector"))
        if self.a.shape != self.b.shape or self.a.ndim != 1:
            raise ValueError("segment endpoints must be vectors of equal dimension")
        if np.array_equal(self.a, self.b):
            raise ValueError("segment endpoints must be distinct")

    @property
    def dimension(self) -> int:
        return self.a.shape[0]

    def _params(self, x: np.ndarray) -> np.ndarray:
        d = self.b - self.a
        t = (x - self.a) @ d / (d @ d)
        return np.clip(t, 0.0, 1.0)

    def distance(self, x: np.ndarray) -> np.ndarray:
        x, _ = _batch(x, self.dimension)
        t = self._params(x)
        foot = self.a + t[:, None] * (self.b - self.a)
        return np.linalg.norm(x - foot, axis=1)

    def project(self, x: np.ndarray) -> np.ndarray:
        x, _ = _batch(x, self.dimension)
        t = self._params(x)
        return self.a + t[:, None] * (self.b - self.a)

    def tie_candidate(self, x: np.ndarray, tol: float) -> np.ndarray:
        x, _ = _batch(x, self.dimension)
        return np.zeros(x.shape[0], dtype=bool)

    def nearest(self, x: np.ndarray) -> tuple[list[np.ndarray], bool]:
        # A segment is convex, so the nearest point is always unique.
        return [self.project(x)[0]], False


@dataclass(frozen=True)
class PolygonBoundary:
    """The closed boundary curve of a polygon (the 1-D edge loop, not the filled region)."""

    vertices: np.ndarray

    def __init__(self, vertices):
        verts = _frozen_array(vertices, "polygon vertices", "an (m, n) array")
        if verts.ndim != 2 or verts.shape[0] < 3:
            raise ValueError("polygon boundary needs at least 3 vertices")
        for i in range(verts.shape[0]):
            for j in range(i + 1, verts.shape[0]):
                if np.array_equal(verts[i], verts[j]):
                    raise ValueError(f"polygon vertices {i} and {j} coincide")
        object.__setattr__(self, "vertices", verts)

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    def _edges(self) -> list[Segment]:
        m = self.vertices.shape[0]
        return [Segment(self.vertices[i], self.vertices[(i + 1) % m]) for i in range(m)]

    def _edge_table(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Distances (m, N) and projections (m, N, n) onto every edge."""
        edges = self._edges()
        dists = np.stack([e.distance(x) for e in edges])
        projs = np.stack([e.project(x) for e in edges])
        return dists, projs

    def distance(self, x: np.ndarray) -> np.ndarray:
        x, _ = _batch(x, self.dimension)
        dists, _ = self._edge_table(x)
        return dists.min(axis=0)

    def project(self, x: np.ndarray) -> np.ndarray:
        x, _ = _batch(x, self.dimension)
        dists, projs = self._edge_table(x)
        best = dists.argmin(axis=0)
        return projs[best, np.arange(x.shape[0])]

    def tie_candidate(self, x: np.ndarray, tol: float) -> np.ndarray:
        x, _ = _batch(x, self.dimension)
        dists, _ = self._edge_table(x)
        ranked = np.sort(dists, axis=0)
        return (ranked[1] - ranked[0]) <= tol

    def nearest(self, x: np.ndarray) -> tuple[list[np.ndarray], bool]:
        x1, _ = _batch(x, self.dimension)
        dists, projs = self._edge_table(x1)
        dmin = dists[:, 0].min()
        eps = 1e-12 * (1.0 + dmin)
        points: list[np.ndarray] = []
        for k in np.flatnonzero(dists[:, 0] <= dmin + eps):
            cand = projs[k, 0]
            if all(np.linalg.norm(cand - p) > eps for p in points):
                points.append(cand)
        return points, False


@dataclass(frozen=True)
class Ball:
    """The shell {x : |x - c| = r}, i.e. a circle in 2-D or a sphere in 3-D.

    Distance from a query point is ``| |x - c| - r |``.  Radius 0 degenerates
    to the center point.  Querying exactly at the center of a positive-radius
    shell is the one configuration where the nearest set is infinite (the
    whole shell); :meth:`nearest` then returns a single witness point plus an
    infinite-set flag.
    """

    center: np.ndarray
    radius: float

    def __init__(self, center, radius):
        object.__setattr__(self, "center", _frozen_array(center, "ball center", "a vector"))
        if self.center.ndim != 1:
            raise ValueError("ball center must be a flat vector")
        radius = float(radius)
        if not np.isfinite(radius) or radius < 0:
            raise ValueError(f"ball radius must be finite and >= 0, got {radius}")
        object.__setattr__(self, "radius", radius)

    @property
    def dimension(self) -> int:
        return self.center.shape[0]

    def distance(self, x: np.ndarray) -> np.ndarray:
        x, _ = _batch(x, self.dimension)
        return np.abs(np.linalg.norm(x - self.center, axis=1) - self.radius)

    def _witness(self) -> np.ndarray:
        w = self.center.copy()
        w[0] += self.radius
        return w

    def project(self, x: np.ndarray) -> np.ndarray:
        x, _ = _batch(x, self.dimension)
        u = x - self.center
        rho = np.linalg.norm(u, axis=1)
        out = np.empty_like(x)
        degenerate = rho == 0.0
        safe = ~degenerate
        out[safe] = self.center + (self.radius / rho[safe])[:, None] * u[safe]
        out[degenerate] = self._witness()
        return out

    def tie_candidate(self, x: np.ndarray, tol: float) -> np.ndarray:
        x, _ = _batch(x, self.dimension)
        if self.radius == 0.0:
            return np.zeros(x.shape[0], dtype=bool)
        return np.linalg.norm(x - self.center, axis=1) <= tol

    def nearest(self, x: np.ndarray) -> tuple[list[np.ndarray], bool]:
        if self.radius == 0.0:
            return [self.center.copy()], False
        x1, _ = _batch(x, self.dimension)
        u = x1[0] - self.center
        rho = float(np.linalg.norm(u))
        if rho == 0.0:
            return [self._witness()], True
        return [self.center + (self.radius / rho) * u], False


Primitive = Union[Point, Segment, PolygonBoundary, Ball]

_PRIMITIVE_NAMES = {Point: "point", Segment: "segment", PolygonBoundary: "polygon", Ball: "ball"}


@dataclass(frozen=True)
class ClosedSetSpec:
    """A nonempty closed set, given as a finite union of primitives."""

    primitives: tuple[Primitive, ...]
    dimension: int

    def __init__(self, primitives, dimension: int):
        primitives = tuple(primitives)
        if not primitives:
            raise ValueError("a closed set needs at least one primitive")
        dimension = int(dimension)
        if dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {dimension}")
        for k, p in enumerate(primitives):
            if not isinstance(p, (Point, Segment, PolygonBoundary, Ball)):
                raise ValueError(f"primitives[{k}]: not a supported primitive: {p!r}")
            if p.dimension != dimension:
                raise ValueError(
                    f"primitives[{k}]: dimension {p.dimension} does not match set dimension {dimension}"
                )
            if isinstance(p, PolygonBoundary) and dimension < 2:
                raise ValueError(f"primitives[{k}]: polygon boundary needs dimension >= 2")
        object.__setattr__(self, "primitives", primitives)
        object.__setattr__(self, "dimension", dimension)

    @classmethod
    def from_dict(cls, data: dict) -> "ClosedSetSpec":
        if not isinstance(data, dict):
            raise ValueError("set description must be a JSON object")
        if "dimension" not in data:
            raise ValueError("set description is missing 'dimension'")
        if "primitives" not in data:
            raise ValueError("set description is missing 'primitives'")
        raw = data["primitives"]
        if not isinstance(raw, list) or not raw:
            raise ValueError("'primitives' must be a nonempty list")
        prims: list[Primitive] = []
        for k, entry in enumerate(raw):
            where = f"primitives[{k}]"
            if not isinstance(entry, dict) or "type" not in entry:
                raise ValueError(f"{where}: each primitive needs a 'type' field")
            kind = entry["type"]
            try:
                if kind == "point":
                    prims.append(Point(entry["coords"]))
                elif kind == "segment":
                    prims.append(Segment(entry["a"], entry["b"]))
                elif kind == "polygon":
                    prims.append(PolygonBoundary(entry["vertices"]))
                elif kind == "ball":
                    prims.append(Ball(entry["center"], entry["radius"]))
                else:
                    raise ValueError(f"unknown primitive type {kind!r}")
            except KeyError as exc:
                raise ValueError(f"{where}: missing field {exc.args[0]!r} for type {kind!r}") from None
            except ValueError as exc:
                raise ValueError(f"{where}: {exc}") from None
        return cls(prims, data["dimension"])

    @classmethod
    def from_json(cls, text: str) -> "ClosedSetSpec":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        out = []
        for p in self.primitives:
            if isinstance(p, Point):
                out.append({"type": "point", "coords": p.coords.tolist()})
            elif isinstance(p, Segment):
                out.append({"type": "segment", "a": p.a.tolist(), "b": p.b.tolist()})
            elif isinstance(p, PolygonBoundary):
                out.append({"type": "polygon", "vertices": p.vertices.tolist()})
            else:
                out.append({"type": "ball", "center": p.center.tolist(), "radius": p.radius})
        return {"dimension": self.dimension, "primitives": out}


@dataclass(frozen=True)
class Window:
    """An axis-aligned box; all grid sweeps and probes are restricted to one."""

    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, lower, upper):
        lo = _frozen_array(lower, "window lower corner", "a vector")
        hi = _frozen_array(upper, "window upper corner", "a vector")
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("window corners must be vectors of equal dimension")
        if not np.all(lo < hi):
            raise ValueError("window must satisfy lower < upper on every axis")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    @property
    def extent(self) -> np.ndarray:
        return self.upper - self.lower

    def axes(self, resolution: int) -> list[np.ndarray]:
        return [np.linspace(self.lower[i], self.upper[i], resolution) for i in range(self.dimension)]

    def grid_points(self, resolution: int) -> np.ndarray:
        """All grid nodes as an (resolution**n, n) array, last axis fastest."""
        mesh = np.meshgrid(*self.axes(resolution), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(count, self.dimension))

    def contains(self, x: np.ndarray) -> np.ndarray:
        x, single = _batch(x, self.dimension)
        inside = np.all((x >= self.lower) & (x <= self.upper), axis=1)
        return bool(inside[0]) if single else inside
