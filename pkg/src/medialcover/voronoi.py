"""Independent planar Voronoi-skeleton oracle for finite point sets.

The 1-skeleton of the Voronoi diagram of m sites is built directly: for each
pair of sites the perpendicular bisector is intersected with the half-plane
constraints imposed by every other site and with the window, leaving a
(possibly empty) segment per pair.  O(m^3), which is fine at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Window

__all__ = [
    "SkeletonSegment",
    "voronoi_medial_axis_2d",
    "skeleton_total_length",
    "sample_skeleton",
]

_EPS = 1e-12


@dataclass(frozen=True)
class SkeletonSegment:
    """A maximal piece of the Voronoi edge shared by two sites, clipped to the window."""

    start: np.ndarray
    end: np.ndarray
    sites: tuple[int, int]

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))


def voronoi_medial_axis_2d(points, window: Window) -> list[SkeletonSegment]:
    """Voronoi 1-skeleton of a finite planar point set, clipped to the window.

    The result is exactly the locus of window points with two or more nearest
    sites.  Coincident sites are rejected.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("sites must form an (m, 2) array")
    m = pts.shape[0]
    if m < 2:
        raise ValueError("need at least two sites")
    if window.dimension != 2:
        raise ValueError("window must be two-dimensional")
    for i in range(m):
        for j in range(i + 1, m):
            if np.linalg.norm(pts[i] - pts[j]) <= _EPS:
                raise ValueError(f"sites {i} and {j} coincide")

    segments: list[SkeletonSegment] = []
    for i in range(m):
        for j in range(i + 1, m):
            mid = 0.5 * (pts[i] + pts[j])
            chord = pts[j] - pts[i]
            direction = np.array([-chord[1], chord[0]])
            direction /= np.linalg.norm(direction)

            # Feasible parameter interval along x(t) = mid + t * direction.
            t_lo, t_hi = -np.inf, np.inf

            def restrict(a: float, b: float, lo: float, hi: float) -> tuple[float, float]:
                # a * t <= b
                if abs(a) <= _EPS:
                    if b < -_EPS:
                        return 1.0, 0.0  # infeasible
                    return lo, hi
                if a > 0:
                    return lo, min(hi, b / a)
                return max(lo, b / a), hi

            for k in range(m):
                if k in (i, j):
                    continue
                # |x - p_i|^2 <= |x - p_k|^2 is linear in x.
                normal = pts[k] - pts[i]
                a = 2.0 * float(direction @ normal)
                b = float(pts[k] @ pts[k] - pts[i] @ pts[i] - 2.0 * (mid @ normal))
                t_lo, t_hi = restrict(a, b, t_lo, t_hi)
                if t_lo > t_hi:
                    break
            else:
                for d in range(2):
                    t_lo, t_hi = restrict(direction[d], float(window.upper[d] - mid[d]), t_lo, t_hi)
                    t_lo, t_hi = restrict(-direction[d], float(mid[d] - window.lower[d]), t_lo, t_hi)
                if t_hi - t_lo > _EPS and np.isfinite(t_lo) and np.isfinite(t_hi):
                    start = mid + t_lo * direction
                    end = mid + t_hi * direction
                    start.setflags(write=False)
                    end.setflags(write=False)
                    segments.append(SkeletonSegment(start=start, end=end, sites=(i, j)))
    return segments


def skeleton_total_length(segments: list[SkeletonSegment]) -> float:
    return float(sum(seg.length for seg in segments))


def sample_skeleton(segments: list[SkeletonSegment], spacing: float, interior_fraction: float = 0.0) -> np.ndarray:
    """Evenly spaced samples along each segment.

    ``interior_fraction`` trims both segment ends by that fraction of the
    length, which keeps samples away from skeleton vertices.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    rows = []
    for seg in segments:
        t0, t1 = interior_fraction, 1.0 - interior_fraction
        if t1 <= t0:
            continue
        count = max(2, int(np.ceil(seg.length * (t1 - t0) / spacing)) + 1)
        for t in np.linspace(t0, t1, count):
            rows.append(seg.start + t * (seg.end - seg.start))
    return np.asarray(rows) if rows else np.empty((0, 2))
