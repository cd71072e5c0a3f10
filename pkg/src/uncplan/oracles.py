"""Slow, independent reference implementations for differential checking.

These share only domain types with the production code: containment goes
through 4-direction ray casting in extended precision instead of crossing
counts, the Laplace fit is a grid refinement of the NLL objective instead of
closed forms, and selection is a literal transcription of the
zero-then-argmax rule over precomputed flags. They ship in the library so
`eval --verify` can cross-check any scenario file in the field.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .geometry import MultiPolygon, Point2
from .selection import CandidateSet, CandidateTrajectory, Command, SelectionConfig, command_filter
from .uncertainty import B_MIN, LaplacePoint

_LD = np.longdouble


def _oracle_corners(wp: Point2, heading: float, length: float, width: float):
    """Footprint corners recomputed here in extended precision."""
    hl = _LD(length) / 2
    hw = _LD(width) / 2
    c = np.cos(_LD(heading))
    s = np.sin(_LD(heading))
    px, py = _LD(wp.x), _LD(wp.y)
    out = []
    for lx, ly in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)):
        out.append((px + c * lx - s * ly, py + s * lx + c * ly))
    return out


def _ring_arrays(ring) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    xs = np.array([p.x for p in ring], dtype=_LD)
    ys = np.array([p.y for p in ring], dtype=_LD)
    return xs[:-1], ys[:-1], xs[1:], ys[1:]


def _crossings_odd(px, py, edges) -> bool:
    """Even-odd parity of +x ray crossings over precomputed edge arrays."""
    x1, y1, x2, y2 = edges
    straddles = (y1 > py) != (y2 > py)
    if not np.any(straddles):
        return False
    xi = x1[straddles] + (py - y1[straddles]) * (x2[straddles] - x1[straddles]) / (
        y2[straddles] - y1[straddles]
    )
    return bool(np.count_nonzero(px < xi) % 2)


def _point_in_da_votes(px, py, polygons_edges) -> int:
    """Votes over 4 ray directions (+x, -x, +y, -y) that the point is inside."""
    votes = 0
    for flip_x, swap in ((False, False), (True, False), (False, True), (True, True)):
        inside = False
        for rings in polygons_edges:
            parity = False
            for x1, y1, x2, y2 in rings:
                if swap:
                    edges = (y1, x1, y2, x2)
                    p = (py, px)
                else:
                    edges = (x1, y1, x2, y2)
                    p = (px, py)
                if flip_x:
                    edges = (-edges[0], edges[1], -edges[2], edges[3])
                    p = (-p[0], p[1])
                if _crossings_odd(p[0], p[1], edges):
                    parity = not parity
            if parity:
                inside = True
                break
        votes += inside
    return votes


def _da_edges(da: MultiPolygon):
    out = []
    for poly in da.polygons:
        rings = [_ring_arrays(poly.outer)]
        rings.extend(_ring_arrays(h) for h in poly.holes)
        out.append(rings)
    return out


def oracle_dacr_flags(
    traj: CandidateTrajectory, ego_dims: tuple[float, float], da: MultiPolygon
) -> tuple[bool, ...]:
    """Per-step conflict flags via majority-voted 4-direction ray casting."""
    length, width = ego_dims
    polygons_edges = _da_edges(da)
    flags = []
    for wp, heading in zip(traj.waypoints, traj.headings):
        conflict = False
        for cx, cy in _oracle_corners(wp, heading, length, width):
            if _point_in_da_votes(cx, cy, polygons_edges) < 2:
                conflict = True
                break
        flags.append(conflict)
    return tuple(flags)


def oracle_dacr(
    traj: CandidateTrajectory,
    ego_dims: tuple[float, float],
    da: MultiPolygon,
    horizon_steps: int,
) -> float:
    """Reference drivable-area conflict rate over the first horizon_steps steps."""
    flags = oracle_dacr_flags(traj, ego_dims, da)
    return sum(flags[:horizon_steps]) / horizon_steps


# ---------------------------------------------------------------------------
# Laplace fit by grid refinement


def _location_cost(vals: np.ndarray, grid: np.ndarray) -> np.ndarray:
    return np.abs(vals[None, :] - grid[:, None]).sum(axis=1)


def _flat_endpoints(grid: np.ndarray, cost: np.ndarray) -> tuple[float, float]:
    """First and last grid point of the near-flat argmin set. The location
    objective is piecewise linear with a flat valley between the two middle
    order statistics for even counts, so the argmin is an interval."""
    vmin = float(cost.min())
    tol = abs(vmin) * 1e-12 + 1e-12
    flat = grid[cost <= vmin + tol]
    return float(flat[0]), float(flat[-1])


def _refine_location(vals: np.ndarray) -> float:
    """Minimizer of sum |v - mu| by grid refinement of both valley endpoints,
    returning the valley midpoint."""
    span = float(vals.max() - vals.min())
    pad = max(1e-3, 0.01 * span)
    grid = np.linspace(float(vals.min()) - pad, float(vals.max()) + pad, 513)
    step = float(grid[1] - grid[0])
    vlo, vhi = _flat_endpoints(grid, _location_cost(vals, grid))
    for _ in range(4):
        glo = np.linspace(vlo - step, vlo + step, 129)
        ghi = np.linspace(vhi - step, vhi + step, 129)
        vlo, _ = _flat_endpoints(glo, _location_cost(vals, glo))
        _, vhi = _flat_endpoints(ghi, _location_cost(vals, ghi))
        step = float(glo[1] - glo[0])
    return 0.5 * (vlo + vhi)


def _refine_scale(vals: np.ndarray, mu: float) -> float:
    """Grid-refined minimizer of n*log(2b) + sum|v - mu|/b over b >= B_MIN."""
    n = len(vals)
    total_dev = float(np.abs(vals - mu).sum())
    hi = max(1.0, 3.0 * total_dev / n)
    lo = B_MIN
    for _ in range(5):
        grid = np.linspace(lo, hi, 257)
        cost = n * np.log(2.0 * grid) + total_dev / grid
        k = int(np.argmin(cost))
        step = grid[1] - grid[0]
        lo = max(B_MIN, float(grid[k] - step))
        hi = float(grid[k] + step)
    return max(B_MIN, 0.5 * (lo + hi))


def oracle_laplace_fit(observations: Sequence[Point2]) -> LaplacePoint:
    """Numerical maximum-likelihood fit of one uncertain point per axis."""
    if not observations:
        raise ValueError("need at least one observation")
    xs = np.array([p.x for p in observations], dtype=float)
    ys = np.array([p.y for p in observations], dtype=float)
    mx = _refine_location(xs)
    my = _refine_location(ys)
    bx = _refine_scale(xs, mx)
    by = _refine_scale(ys, my)
    return LaplacePoint(Point2(mx, my), (bx, by))


# ---------------------------------------------------------------------------
# selection rule transcription


def oracle_select(
    candidate_set: CandidateSet,
    command: Command | str,
    cfg: SelectionConfig,
    risks: Sequence[float],
    agent_flags: Sequence[bool],
    boundary_flags: Sequence[bool],
) -> int:
    """Literal zero-then-argmax transcription over precomputed per-candidate flags.

    risks are only consulted when the uncertainty filter is enabled, matching
    the production rule where a disabled filter never evaluates its quantity.
    """
    candidates = command_filter(candidate_set, command)
    n = len(candidates)
    if not (len(risks) == len(agent_flags) == len(boundary_flags) == n):
        raise ValueError("flag arrays must match the candidate count")

    effective_risk = list(risks) if cfg.enable_uncertainty_filter else [math.inf] * n

    scores = []
    for i in range(n):
        score = candidates[i].confidence
        if cfg.enable_uncertainty_filter and effective_risk[i] < cfg.nll_threshold:
            score = 0.0
        if cfg.enable_agent_filter and agent_flags[i]:
            score = 0.0
        if cfg.enable_boundary_filter and boundary_flags[i]:
            score = 0.0
        scores.append(score)

    best = 0
    for i in range(1, n):
        if scores[i] > scores[best]:
            best = i
        elif scores[i] == scores[best] and effective_risk[i] < effective_risk[best]:
            best = i
    if scores[best] > 0.0:
        return best

    # everything zeroed: prefer agent-safe candidates, stay far from boundaries
    agent_used = [cfg.enable_agent_filter and f for f in agent_flags]
    pool = [i for i in range(n) if not agent_used[i]]
    if pool:
        best = pool[0]
        for i in pool[1:]:
            key_i = (effective_risk[i], candidates[i].confidence)
            key_b = (effective_risk[best], candidates[best].confidence)
            if key_i > key_b:
                best = i
        return best
    best = 0
    for i in range(1, n):
        if candidates[i].confidence > candidates[best].confidence:
            best = i
    return best
