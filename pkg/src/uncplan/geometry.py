"""2D geometric primitives and queries for planar driving scenes.

Coordinates are ego-frame meters: x forward, y left, headings in radians
counterclockwise from +x. All types are immutable values and all operations
are pure functions, so everything here is safe to use concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MIN_VERTEX_SEPARATION = 1e-9  # m, closer consecutive polyline vertices are rejected
MIN_POLYGON_AREA = 1e-12  # m^2, smaller rings are degenerate


def normalize_heading(theta: float) -> float:
    """Wrap an angle into (-pi, pi]. Values already in range pass through unchanged."""
    if not math.isfinite(theta):
        raise ValueError(f"heading must be finite, got {theta}")
    if -math.pi < theta <= math.pi:
        return theta
    wrapped = theta % math.tau
    if wrapped > math.pi:
        wrapped -= math.tau
    return wrapped


@dataclass(frozen=True)
class Point2:
    """Point in the ground plane, meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class Pose2:
    """Position plus heading, heading normalized into (-pi, pi]."""

    position: Point2
    heading: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "heading", normalize_heading(self.heading))


@dataclass(frozen=True)
class Polyline:
    """Open chain of at least two non-coincident vertices."""

    points: tuple[Point2, ...]

    def __post_init__(self) -> None:
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValueError("polyline needs at least 2 points")
        for k in range(1, len(pts)):
            a, b = pts[k - 1], pts[k]
            if math.hypot(b.x - a.x, b.y - a.y) <= MIN_VERTEX_SEPARATION:
                raise ValueError(f"polyline vertices {k - 1} and {k} are coincident")


@dataclass(frozen=True)
class Polygon:
    """Simple polygon: closed CCW outer ring with optional closed CW hole rings.

    Rings carry an explicit closing vertex (first == last).
    """

    outer: tuple[Point2, ...]
    holes: tuple[tuple[Point2, ...], ...] = ()

    def __post_init__(self) -> None:
        outer = tuple(self.outer)
        holes = tuple(tuple(h) for h in self.holes)
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "holes", holes)
        _validate_ring(outer, want_ccw=True, label="outer")
        for i, hole in enumerate(holes):
            _validate_ring(hole, want_ccw=False, label=f"hole {i}")


@dataclass(frozen=True)
class MultiPolygon:
    """Disjoint collection of polygons, e.g. a drivable area."""

    polygons: tuple[Polygon, ...]

    def __post_init__(self) -> None:
        polys = tuple(self.polygons)
        object.__setattr__(self, "polygons", polys)
        if not polys:
            raise ValueError("multipolygon needs at least one polygon")
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                if _polygons_touch(polys[i], polys[j]):
                    raise ValueError(f"polygons {i} and {j} are not disjoint")


@dataclass(frozen=True)
class OrientedBox:
    """Rectangular footprint: center, heading and full length/width in meters."""

    center: Point2
    heading: float
    length: float
    width: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.heading):
            raise ValueError(f"heading must be finite, got {self.heading}")
        if self.length <= 0 or self.width <= 0:
            raise ValueError(f"box dimensions must be positive, got {self.length} x {self.width}")

    def corners(self) -> list[Point2]:
        return vehicle_corners(Pose2(self.center, self.heading), self.length, self.width)


# ---------------------------------------------------------------------------
# ring validation helpers


def _cross(o: Point2, a: Point2, b: Point2) -> float:
    """z component of (a - o) x (b - o)."""
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


def _on_segment_bbox(a: Point2, b: Point2, p: Point2) -> bool:
    return min(a.x, b.x) <= p.x <= max(a.x, b.x) and min(a.y, b.y) <= p.y <= max(a.y, b.y)


def _segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool:
    """Whether two closed segments share any point (touching counts)."""
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment_bbox(q1, q2, p1):
        return True
    if d2 == 0 and _on_segment_bbox(q1, q2, p2):
        return True
    if d3 == 0 and _on_segment_bbox(p1, p2, q1):
        return True
    if d4 == 0 and _on_segment_bbox(p1, p2, q2):
        return True
    return False


def _ring_signed_area(ring: tuple[Point2, ...]) -> float:
    acc = 0.0
    for k in range(len(ring) - 1):
        a, b = ring[k], ring[k + 1]
        acc += a.x * b.y - b.x * a.y
    return 0.5 * acc


def _validate_ring(ring: tuple[Point2, ...], want_ccw: bool, label: str) -> None:
    if len(ring) < 4:
        raise ValueError(f"{label} ring needs at least 4 vertices including the closing one")
    if ring[0].x != ring[-1].x or ring[0].y != ring[-1].y:
        raise ValueError(f"{label} ring is not closed (first vertex != last vertex)")
    area = _ring_signed_area(ring)
    if abs(area) < MIN_POLYGON_AREA:
        raise ValueError(f"{label} ring is degenerate (area {abs(area):.3e} m^2)")
    if (area > 0) != want_ccw:
        want = "counterclockwise" if want_ccw else "clockwise"
        raise ValueError(f"{label} ring must be {want}")
    n_edges = len(ring) - 1
    for i in range(n_edges):
        for j in range(i + 1, n_edges):
            if j == i + 1 or (i == 0 and j == n_edges - 1):
                continue  # adjacent edges legitimately share a vertex
            if _segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1]):
                raise ValueError(f"{label} ring is self-intersecting (edges {i} and {j})")


def _ring_edges(poly: Polygon):
    for ring in (poly.outer, *poly.holes):
        for k in range(len(ring) - 1):
            yield ring[k], ring[k + 1]


def _polygons_touch(a: Polygon, b: Polygon) -> bool:
    for e1 in _ring_edges(a):
        for e2 in _ring_edges(b):
            if _segments_intersect(e1[0], e1[1], e2[0], e2[1]):
                return True
    return _point_in_polygon(a.outer[0], b) or _point_in_polygon(b.outer[0], a)


# ---------------------------------------------------------------------------
# operations


def vehicle_corners(pose: Pose2, length: float, width: float) -> list[Point2]:
    """Footprint corners in counterclockwise order starting at front-left."""
    if length <= 0 or width <= 0:
        raise ValueError(f"vehicle dimensions must be positive, got {length} x {width}")
    hl, hw = 0.5 * length, 0.5 * width
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    px, py = pose.position.x, pose.position.y
    local = ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw))
    return [Point2(px + c * lx - s * ly, py + s * lx + c * ly) for lx, ly in local]


def _point_on_ring(p: Point2, ring: tuple[Point2, ...]) -> bool:
    for k in range(len(ring) - 1):
        a, b = ring[k], ring[k + 1]
        if _cross(a, b, p) == 0.0 and _on_segment_bbox(a, b, p):
            return True
    return False


def _even_odd_inside(p: Point2, ring: tuple[Point2, ...]) -> bool:
    """Even-odd crossing count along the +x ray; boundary points are not handled here."""
    inside = False
    for k in range(len(ring) - 1):
        a, b = ring[k], ring[k + 1]
        if (a.y > p.y) != (b.y > p.y):
            x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
            if p.x < x_at:
                inside = not inside
    return inside


def _point_in_polygon(p: Point2, poly: Polygon) -> bool:
    if _point_on_ring(p, poly.outer):
        return True
    if not _even_odd_inside(p, poly.outer):
        return False
    for hole in poly.holes:
        if _point_on_ring(p, hole):
            return True  # hole boundary still belongs to the polygon
        if _even_odd_inside(p, hole):
            return False
    return True


def point_in_multipolygon(p: Point2, area: MultiPolygon) -> bool:
    """Closed-set containment: points on any boundary count as inside."""
    return any(_point_in_polygon(p, poly) for poly in area.polygons)


def dist_point_segment(p: Point2, a: Point2, b: Point2) -> float:
    """Euclidean distance from p to the closed segment a-b."""
    abx, aby = b.x - a.x, b.y - a.y
    apx, apy = p.x - a.x, p.y - a.y
    t = (apx * abx + apy * aby) / (abx * abx + aby * aby)
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(apx - t * abx, apy - t * aby)


def dist_point_polyline(p: Point2, line: Polyline) -> float:
    """Minimum distance from p to any segment of the polyline."""
    pts = line.points
    return min(dist_point_segment(p, pts[k], pts[k + 1]) for k in range(len(pts) - 1))


def _project(corners: list[Point2], ax: float, ay: float) -> tuple[float, float]:
    dots = [c.x * ax + c.y * ay for c in corners]
    return min(dots), max(dots)


def boxes_overlap(a: OrientedBox, b: OrientedBox) -> bool:
    """Separating-axis test over the two boxes' edge normals; touching counts as overlap."""
    ca, cb = a.corners(), b.corners()
    for box in (a, b):
        c, s = math.cos(box.heading), math.sin(box.heading)
        for ax, ay in ((c, s), (-s, c)):
            amin, amax = _project(ca, ax, ay)
            bmin, bmax = _project(cb, ax, ay)
            if amax < bmin or bmax < amin:
                return False
    return True
