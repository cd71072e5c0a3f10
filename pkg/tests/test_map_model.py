import math

import pytest

from uncplan.geometry import MultiPolygon, Point2, Polygon
from uncplan.map_model import (
    MAX_ELEMENTS,
    MapElement,
    MapElementKind,
    UncertainMap,
    boundary_elements,
    perturb_map,
)
from uncplan.uncertainty import B_MIN, LaplacePoint, UncertainPolyline, fit_laplace_mle


def strip_da():
    ring = (
        Point2(0, -5), Point2(40, -5), Point2(40, 5), Point2(0, 5), Point2(0, -5),
    )
    return MultiPolygon((Polygon(ring),))


def element(kind, y, n=20, b=B_MIN):
    pts = tuple(LaplacePoint(Point2(2.0 * k, y), (b, b)) for k in range(n))
    return MapElement(UncertainPolyline(pts), kind)


def demo_map(n_boundaries=2, n_dividers=3):
    elements = [element(MapElementKind.BOUNDARY, 3.0 + i) for i in range(n_boundaries)]
    elements += [element(MapElementKind.LANE_DIVIDER, -1.0 - i) for i in range(n_dividers)]
    return UncertainMap(tuple(elements), strip_da())


def test_element_cap():
    elements = tuple(element(MapElementKind.BOUNDARY, i * 0.01) for i in range(MAX_ELEMENTS + 1))
    with pytest.raises(ValueError):
        UncertainMap(elements, strip_da())
    full = UncertainMap(elements[:MAX_ELEMENTS], strip_da())
    assert len(boundary_elements(full)) == MAX_ELEMENTS


def test_boundary_elements_filters_and_preserves_order():
    m = demo_map(2, 3)
    bounds = boundary_elements(m)
    assert len(bounds) == 2
    assert bounds[0] is m.elements[0].polyline
    assert bounds[1] is m.elements[1].polyline
    empty = UncertainMap((element(MapElementKind.LANE_DIVIDER, 0.0),), strip_da())
    assert boundary_elements(empty) == []


def test_boundary_plus_rest_is_the_whole_map():
    m = demo_map(2, 3)
    bounds = set(map(id, boundary_elements(m)))
    rest = {id(e.polyline) for e in m.elements if e.kind is not MapElementKind.BOUNDARY}
    assert bounds | rest == {id(e.polyline) for e in m.elements}
    assert len(bounds) + len(rest) == len(m.elements)


def test_perturb_zero_noise_keeps_mu_and_clamps_b():
    m = demo_map()
    out = perturb_map(m, 0.0, seed=5, calibrated=True)
    for orig, pert in zip(m.elements, out.elements):
        for a, b in zip(orig.polyline.points, pert.polyline.points):
            assert a.mu == b.mu
            assert b.b == (B_MIN, B_MIN)
    assert out.drivable_area is m.drivable_area


def test_perturb_rejects_negative_noise():
    with pytest.raises(ValueError):
        perturb_map(demo_map(), -0.1, seed=1)


def test_perturb_deterministic_per_seed():
    m = demo_map()
    a = perturb_map(m, 0.5, seed=99)
    b = perturb_map(m, 0.5, seed=99)
    c = perturb_map(m, 0.5, seed=100)
    assert a == b
    assert a != c


def test_perturb_preserves_structure():
    m = demo_map(2, 3)
    out = perturb_map(m, 0.7, seed=3, calibrated=False)
    assert len(out.elements) == len(m.elements)
    for orig, pert in zip(m.elements, out.elements):
        assert orig.kind is pert.kind
        assert len(orig.polyline.points) == len(pert.polyline.points)
        for a, b in zip(orig.polyline.points, pert.polyline.points):
            assert a.b == b.b  # fixed-b mode keeps the advertised scales


def test_perturb_mean_abs_displacement_matches_scale():
    # Laplace(0, b) has E|x| = b; Monte Carlo over 10^4 points
    n = 10_000
    pts = tuple(LaplacePoint(Point2(0.0, 0.0), (B_MIN, B_MIN)) for _ in range(n))
    m = UncertainMap((MapElement(UncertainPolyline(pts), MapElementKind.BOUNDARY),), strip_da())
    out = perturb_map(m, 0.5, seed=11)
    dx = [abs(p.mu.x) for p in out.elements[0].polyline.points]
    assert 0.45 <= sum(dx) / n <= 0.55


def test_calibrated_perturbation_is_recoverable_by_the_fitter():
    # repeated perturbations of one point recover mu and b
    noise = 0.5
    k = 400
    single = UncertainMap(
        (MapElement(UncertainPolyline((LaplacePoint(Point2(3.0, -1.5), (B_MIN, B_MIN)),)), MapElementKind.BOUNDARY),),
        strip_da(),
    )
    sightings = []
    for i in range(k):
        out = perturb_map(single, noise, seed=1000 + i)
        sightings.append(out.elements[0].polyline.points[0].mu)
        assert out.elements[0].polyline.points[0].b == (noise, noise)
    fitted = fit_laplace_mle(sightings)
    bound = 3 * noise / math.sqrt(k)
    assert abs(fitted.mu.x - 3.0) <= bound
    assert abs(fitted.mu.y + 1.5) <= bound
    assert abs(fitted.b[0] - noise) <= 0.15 * noise
    assert abs(fitted.b[1] - noise) <= 0.15 * noise
