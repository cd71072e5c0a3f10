"""Laplace-distributed map point uncertainty: densities, fitting, risk lookup.

Each uncertain map vertex carries a 2D location mu and per-axis scales
b = (b1, b2). The negative log-likelihood of a ground-truth point p under one
vertex is sum_j [ log(2 b_j) + |p_j - mu_j| / b_j ], natural logarithm
throughout. Low NLL against a boundary vertex means the point sits deep in
that vertex's uncertainty region, which selection treats as driving risk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geometry import Point2, Polyline

B_MIN = 1e-3  # m, smallest admissible Laplace scale; avoids NLL -> -inf


@dataclass(frozen=True)
class LaplacePoint:
    """2D location estimate with per-axis Laplace scales in meters."""

    mu: Point2
    b: tuple[float, float]

    def __post_init__(self) -> None:
        bx, by = float(self.b[0]), float(self.b[1])
        if not (math.isfinite(bx) and math.isfinite(by)):
            raise ValueError(f"scales must be finite, got {self.b}")
        object.__setattr__(self, "b", (max(bx, B_MIN), max(by, B_MIN)))


@dataclass(frozen=True)
class UncertainPolyline:
    """Ordered uncertain vertices of one vectorized map element."""

    points: tuple[LaplacePoint, ...]

    def __post_init__(self) -> None:
        pts = tuple(self.points)
        if not pts:
            raise ValueError("uncertain polyline needs at least one point")
        object.__setattr__(self, "points", pts)

    def mu_polyline(self) -> Polyline:
        """Most-likely geometry of the element."""
        return Polyline(tuple(lp.mu for lp in self.points))


def laplace_point_nll(gt: Point2, lp: LaplacePoint) -> float:
    """Negative log-likelihood of a ground-truth point under one uncertain vertex."""
    b1, b2 = lp.b
    return (
        math.log(2.0 * b1)
        + abs(gt.x - lp.mu.x) / b1
        + math.log(2.0 * b2)
        + abs(gt.y - lp.mu.y) / b2
    )


def element_nll(gt_points: Sequence[Point2], element: UncertainPolyline) -> float:
    """Summed NLL of index-matched ground-truth points against an element."""
    if len(gt_points) != len(element.points):
        raise ValueError(
            f"{len(gt_points)} ground-truth points vs {len(element.points)} element points"
        )
    return sum(laplace_point_nll(g, lp) for g, lp in zip(gt_points, element.points))


def log_joint_density(gt_points: Sequence[Point2], element: UncertainPolyline) -> float:
    """Log of the element's joint density at the ground-truth points (= -element_nll)."""
    return -element_nll(gt_points, element)


def fit_laplace_mle(observations: Sequence[Point2]) -> LaplacePoint:
    """Maximum-likelihood (mu, b) from repeated sightings of one map point.

    mu is the per-axis median (midpoint convention for even counts), b the
    per-axis mean absolute deviation from that median, clamped to B_MIN.
    """
    if not observations:
        raise ValueError("need at least one observation")
    # sorting makes the result bit-identical under permutation of the input
    xs = np.sort(np.array([p.x for p in observations], dtype=float))
    ys = np.sort(np.array([p.y for p in observations], dtype=float))
    mx = float(np.median(xs))
    my = float(np.median(ys))
    bx = float(np.mean(np.abs(xs - mx)))
    by = float(np.mean(np.abs(ys - my)))
    return LaplacePoint(Point2(mx, my), (bx, by))


def min_nll_to_elements(p: Point2, elements: Iterable[UncertainPolyline]) -> float:
    """Minimum NLL of p over every vertex of every element (lower = riskier)."""
    best = math.inf
    seen = False
    for element in elements:
        for lp in element.points:
            seen = True
            nll = laplace_point_nll(p, lp)
            if nll < best:
                best = nll
    if not seen:
        raise ValueError("need at least one element with at least one point")
    return best
