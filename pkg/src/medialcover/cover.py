"""Covering graphs built from marginal infima of a strongly convex field.

For a strongly convex field F, an axis i and two slopes alpha < beta, the
graph  { x : x_i = (g_alpha(x_rest) - g_beta(x_rest)) / (beta - alpha) }
(with g_s the marginal infimum of F(x) - s * x_i over x_i) contains every
point whose one-sided derivative gap along axis i brackets [alpha, beta].
The evaluator is a difference of two convex functions of x_rest.

Marginal values are memoized per graph and query node, since verification
sweeps hit the same nodes repeatedly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .convex import SlopeLattice, marginal_inf
from .fields import ScalarField

__all__ = [
    "FamilyBudgetError",
    "CcGraph",
    "CoverFamily",
    "build_cover_graph",
    "enumerate_cover",
    "graph_deviation",
    "family_deviation",
    "cover_family_to_dict",
]


class FamilyBudgetError(ValueError):
    """Requested cover family exceeds the configured combination budget."""


@dataclass
class CcGraph:
    """One covering graph in the direction of ``axis``.

    ``bias`` is a fault-injection hook used by the negative-control test: it
    shifts every evaluator output and must be 0 in normal operation.
    """

    axis: int
    alpha: float
    beta: float
    base: ScalarField
    xtol: float = 1e-7
    bias: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.alpha < self.beta:
            raise ValueError(f"need alpha < beta, got {self.alpha} >= {self.beta}")
        if not 0 <= self.axis < self.base.dimension:
            raise ValueError(f"axis {self.axis} out of range for dimension {self.base.dimension}")

    @property
    def key(self) -> str:
        return f"axis{self.axis}:{self.alpha:g}:{self.beta:g}"

    def marginal_values(self, x_rest) -> tuple[float, float]:
        """Memoized (g_alpha, g_beta) at one x_rest node."""
        x_rest = np.atleast_1d(np.asarray(x_rest, dtype=float))
        node = tuple(x_rest.tolist())
        hit = self._cache.get(node)
        if hit is None:
            hit = (
                marginal_inf(self.base, self.axis, self.alpha, x_rest, xtol=self.xtol),
                marginal_inf(self.base, self.axis, self.beta, x_rest, xtol=self.xtol),
            )
            self._cache[node] = hit
        return hit

    def evaluate(self, x_rest) -> float:
        va, vb = self.marginal_values(x_rest)
        return (va - vb) / (self.beta - self.alpha) + self.bias


@dataclass(frozen=True)
class CoverFamily:
    """A finite, deterministically ordered family of covering graphs."""

    graphs: tuple[CcGraph, ...]
    provenance: str
    lattice: SlopeLattice
    axes: tuple[int, ...]


def build_cover_graph(
    base: ScalarField,
    axis: int,
    alpha: float,
    beta: float,
    lattice: SlopeLattice | None = None,
    xtol: float = 1e-7,
) -> CcGraph:
    """Construct one covering graph; validates the slope pair against the lattice if given."""
    if lattice is not None:
        for name, value in (("alpha", alpha), ("beta", beta)):
            k = value / lattice.step
            if abs(k - round(k)) > 1e-9 or abs(value) > lattice.bound + 1e-9:
                raise ValueError(f"{name}={value} is not on the configured slope lattice")
    return CcGraph(axis=axis, alpha=float(alpha), beta=float(beta), base=base, xtol=xtol)


def enumerate_cover(
    base: ScalarField,
    axes,
    lattice: SlopeLattice,
    cap: int,
    xtol: float = 1e-7,
) -> CoverFamily:
    """All (axis, alpha < beta) combinations, axis-major then alpha then beta ascending."""
    axes = tuple(int(a) for a in axes)
    for a in axes:
        if not 0 <= a < base.dimension:
            raise ValueError(f"axis {a} out of range for dimension {base.dimension}")
    total = len(axes) * lattice.pair_count()
    if total > cap:
        raise FamilyBudgetError(f"family would need {total} graphs, exceeding the cap of {cap}")
    slopes = lattice.points()
    graphs = [
        CcGraph(axis=a, alpha=float(alpha), beta=float(beta), base=base, xtol=xtol)
        for a in axes
        for alpha, beta in itertools.combinations(slopes, 2)
    ]
    return CoverFamily(graphs=tuple(graphs), provenance=base.tag, lattice=lattice, axes=axes)


def _split(x: np.ndarray, axis: int) -> tuple[float, np.ndarray]:
    x = np.asarray(x, dtype=float)
    rest = np.delete(x, axis)
    return float(x[axis]), rest


def graph_deviation(graph: CcGraph, x) -> float:
    """Vertical deviation |x_axis - g(x_rest)| in the graph direction."""
    coord, rest = _split(x, graph.axis)
    return abs(coord - graph.evaluate(rest))


def family_deviation(family: CoverFamily, x) -> tuple[float, int]:
    """Minimum deviation over the family and the first graph index attaining it."""
    if not family.graphs:
        raise ValueError("cover family is empty")
    best = np.inf
    best_idx = 0
    for idx, graph in enumerate(family.graphs):
        dev = graph_deviation(graph, x)
        if dev < best:
            best, best_idx = dev, idx
    return float(best), best_idx


def cover_family_to_dict(family: CoverFamily, rest_nodes: np.ndarray) -> list[dict]:
    """Serialize each graph with its values over the given x_rest nodes."""
    rest_nodes = np.atleast_2d(np.asarray(rest_nodes, dtype=float))
    out = []
    for graph in family.graphs:
        grid = [[*node.tolist(), graph.evaluate(node)] for node in rest_nodes]
        out.append({"axis": graph.axis, "alpha": graph.alpha, "beta": graph.beta, "grid": grid})
    return out
