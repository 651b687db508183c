"""Scalar fields: the convex lift of a distance field and analytic test fields.

Every field is a plain evaluator over points, vectorized over a trailing
coordinate axis: input shape (..., n), output shape (...).  ``asplund_field``
builds the convex function |x|^2 - dist(x, E)^2 of a closed set;
``strongify`` adds |x|^2, which makes any convex field strongly convex with
modulus 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .distance import distance
from .geometry import ClosedSetSpec

__all__ = [
    "ScalarField",
    "asplund_field",
    "strongify",
    "coordinate_abs",
    "euclidean_norm",
    "squared_norm",
    "first_coordinate_sine",
    "quadratic_sine_blend",
    "named_field",
    "NAMED_FIELDS",
]


@dataclass(frozen=True)
class ScalarField:
    """A real-valued field over R^n with a descriptive tag.

    ``smooth_c2`` marks fields whose evaluator is twice continuously
    differentiable everywhere; only those are eligible for the C^2
    difference-of-convex decomposition.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    dimension: int
    tag: str = ""
    smooth_c2: bool = False

    def __call__(self, x) -> float | np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.shape[-1] != self.dimension:
            raise ValueError(f"field {self.tag!r} expects dimension {self.dimension}, got shape {arr.shape}")
        out = self.evaluator(arr)
        if arr.ndim == 1:
            return float(out)
        return np.asarray(out, dtype=float)

    def with_tag(self, tag: str) -> "ScalarField":
        return replace(self, tag=tag)


def _sq(x: np.ndarray) -> np.ndarray:
    return np.sum(x * x, axis=-1)


def asplund_field(spec: ClosedSetSpec) -> ScalarField:
    """|x|^2 - dist(x, E)^2, convex for any nonempty closed E."""

    def evaluate(x: np.ndarray) -> np.ndarray:
        flat = x.reshape(-1, spec.dimension)
        d = distance(spec, flat)
        out = _sq(flat) - d * d
        return out.reshape(x.shape[:-1])

    return ScalarField(evaluate, spec.dimension, tag="asplund", smooth_c2=False)


def strongify(field: ScalarField) -> ScalarField:
    """Add |x|^2; for convex input the result is strongly convex with modulus 1."""

    def evaluate(x: np.ndarray) -> np.ndarray:
        return field.evaluator(x) + _sq(x)

    return ScalarField(evaluate, field.dimension, tag=f"{field.tag}+sq", smooth_c2=field.smooth_c2)


def coordinate_abs(dimension: int) -> ScalarField:
    return ScalarField(lambda x: np.abs(x[..., 0]), dimension, tag="abs")


def euclidean_norm(dimension: int) -> ScalarField:
    return ScalarField(lambda x: np.sqrt(_sq(x)), dimension, tag="norm")


def squared_norm(dimension: int) -> ScalarField:
    return ScalarField(_sq, dimension, tag="sq_norm", smooth_c2=True)


def first_coordinate_sine(dimension: int) -> ScalarField:
    return ScalarField(lambda x: np.sin(x[..., 0]), dimension, tag="sin1", smooth_c2=True)


def quadratic_sine_blend(dimension: int, seed: int = 0) -> ScalarField:
    """A seeded C^2 test field: x^T A x plus per-coordinate sine ripples."""
    rng = np.random.default_rng(seed)
    m = rng.uniform(-1.0, 1.0, size=(dimension, dimension))
    quad = 0.5 * (m + m.T)
    amps = rng.uniform(-1.0, 1.0, size=dimension)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=dimension)

    def evaluate(x: np.ndarray) -> np.ndarray:
        q = np.einsum("...i,ij,...j->...", x, quad, x)
        return q + np.sum(amps * np.sin(x + phases), axis=-1)

    return ScalarField(evaluate, dimension, tag=f"blend:{seed}", smooth_c2=True)


NAMED_FIELDS = ("abs", "norm", "sq_norm", "sin1", "blend:<seed>", "asplund:<set-ref>")


def named_field(name: str, dimension: int, set_spec: ClosedSetSpec | None = None) -> ScalarField:
    """Resolve a field by its config name.

    ``asplund`` / ``asplund:set`` require ``set_spec``; path-style references
    must be resolved to a :class:`ClosedSetSpec` by the caller beforehand.
    """
    if name == "abs":
        return coordinate_abs(dimension)
    if name == "norm":
        return euclidean_norm(dimension)
    if name == "sq_norm":
        return squared_norm(dimension)
    if name == "sin1":
        return first_coordinate_sine(dimension)
    if name.startswith("blend:"):
        return quadratic_sine_blend(dimension, seed=int(name.split(":", 1)[1]))
    if name == "asplund" or name.startswith("asplund:"):
        if set_spec is None:
            raise ValueError(f"field {name!r} needs a set description")
        return asplund_field(set_spec)
    raise ValueError(f"unknown field name {name!r}; known names: {', '.join(NAMED_FIELDS)}")
