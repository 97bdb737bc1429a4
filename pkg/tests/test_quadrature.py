import numpy as np
import pytest

from couplefem.quadrature import (
    polygon_area,
    polygon_rule,
    segment_rule,
    triangle_rule,
)

REF = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def test_weights_positive_and_sum_to_measure():
    r = triangle_rule(REF)
    assert np.all(r.weights > 0)
    assert r.weights.sum() == pytest.approx(0.5, abs=1e-12)
    s = segment_rule(np.array([0.0, 0.0]), np.array([3.0, 4.0]))
    assert np.all(s.weights > 0)
    assert s.weights.sum() == pytest.approx(5.0, abs=1e-12)
    poly = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    p = polygon_rule(poly)
    assert p.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_volume_rule_degree_two_exact():
    # exact moments of x^2, xy, y^2 over the reference triangle
    r = triangle_rule(REF)
    assert r.integrate(lambda p: p[:, 0] ** 2) == pytest.approx(1 / 12, abs=1e-15)
    assert r.integrate(lambda p: p[:, 0] * p[:, 1]) == pytest.approx(1 / 24, abs=1e-15)
    assert r.integrate(lambda p: p[:, 1] ** 2) == pytest.approx(1 / 12, abs=1e-15)


def test_degree5_rule_exact_for_quartics():
    r = triangle_rule(REF, degree=5)
    # int x^4 over reference triangle = 1/30
    assert r.integrate(lambda p: p[:, 0] ** 4) == pytest.approx(1 / 30, abs=1e-14)
    assert r.weights.sum() == pytest.approx(0.5, abs=1e-14)


def test_segment_rule_degree_three_exact():
    a, b = np.array([0.25, 0.0]), np.array([1.25, 0.75])
    r = segment_rule(a, b)
    # parametrize f(x, y) = (2x - y)^3 along the segment; integrate exactly
    t = np.linspace(0, 1, 200001)
    pts = a[None, :] + t[:, None] * (b - a)[None, :]
    f = lambda p: (2 * p[:, 0] - p[:, 1]) ** 3
    exact = np.trapezoid(f(pts), dx=1.0 / 200000) * np.linalg.norm(b - a)
    assert r.integrate(f) == pytest.approx(exact, rel=1e-9)


def _shoelace_moments(poly):
    """Exact area and first moments of a polygon (shoelace formulas)."""
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()
    mx = np.sum((x + xn) * cross) / 6.0
    my = np.sum((y + yn) * cross) / 6.0
    sgn = np.sign(area)
    return abs(area), sgn * mx, sgn * my


def test_polygon_rule_matches_shoelace_moments():
    rng = np.random.default_rng(3)
    for _ in range(50):
        # convex polygon: triangle clipped by a random half-plane
        base = rng.uniform(0, 1, (3, 2))
        base = base[np.argsort(np.arctan2(*(base - base.mean(0)).T[::-1]))]
        poly = np.vstack([base, base.mean(axis=0) * 0.0 + base[0]])[:3]
        r = polygon_rule(base)
        area, mx, my = _shoelace_moments(base)
        assert r.weights.sum() == pytest.approx(area, rel=1e-12)
        assert r.integrate(lambda p: p[:, 0]) == pytest.approx(mx, rel=1e-12)
        assert r.integrate(lambda p: p[:, 1]) == pytest.approx(my, rel=1e-12)

    quad = np.array([[0.1, 0.0], [1.2, 0.1], [0.9, 1.3], [0.0, 0.8]])
    r = polygon_rule(quad)
    area, mx, my = _shoelace_moments(quad)
    assert r.weights.sum() == pytest.approx(area, rel=1e-12)
    assert r.integrate(lambda p: p[:, 0]) == pytest.approx(mx, rel=1e-12)
    assert r.integrate(lambda p: p[:, 1]) == pytest.approx(my, rel=1e-12)


def test_polygon_area_orientation_independent():
    quad = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]])
    assert polygon_area(quad) == pytest.approx(2.0, abs=1e-15)
    assert polygon_area(quad[::-1]) == pytest.approx(2.0, abs=1e-15)
