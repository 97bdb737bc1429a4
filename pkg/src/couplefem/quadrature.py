"""Quadrature rules on triangles, segments and clipped convex polygons.

Assembly uses the 3-point edge-midpoint rule on triangles (exact for degree
2, all P1 integrands here are at most quadratic) and 2-point Gauss on
segments (exact for degree 3).  Error norms use a 7-point degree-5 rule so
the measured convergence rates are not polluted by quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# barycentric points and weights (weights sum to 1, scale by element area)
_MIDPOINT_BARY = np.array([
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
])
_MIDPOINT_W = np.array([1.0, 1.0, 1.0]) / 3.0

_A1, _B1 = 0.059715871789769820, 0.470142064105115090
_A2, _B2 = 0.797426985353087320, 0.101286507323456340
_DEG5_BARY = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [_A1, _B1, _B1],
    [_B1, _A1, _B1],
    [_B1, _B1, _A1],
    [_A2, _B2, _B2],
    [_B2, _A2, _B2],
    [_B2, _B2, _A2],
])
_DEG5_W = np.array([
    0.225,
    0.132394152788506180, 0.132394152788506180, 0.132394152788506180,
    0.125939180544827150, 0.125939180544827150, 0.125939180544827150,
])

_GAUSS2 = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])


@dataclass(frozen=True)
class QuadratureRule:
    """Physical points (m, 2) and weights (m,); weights sum to the measure."""

    points: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(self.weights @ np.asarray(f(self.points), dtype=float))


def triangle_rule(pts: np.ndarray, degree: int = 2) -> QuadratureRule:
    """Rule on the triangle with vertex coordinates ``pts`` (3, 2)."""
    bary, w = (_MIDPOINT_BARY, _MIDPOINT_W) if degree <= 2 else (_DEG5_BARY, _DEG5_W)
    p = bary @ pts
    d1, d2 = pts[1] - pts[0], pts[2] - pts[0]
    area = 0.5 * abs(d1[0] * d2[1] - d1[1] * d2[0])
    return QuadratureRule(points=p, weights=w * area)


def segment_rule(p0: np.ndarray, p1: np.ndarray) -> QuadratureRule:
    """2-point Gauss rule along the segment p0-p1 (degree 3)."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    length = float(np.linalg.norm(p1 - p0))
    pts = p0[None, :] + _GAUSS2[:, None] * (p1 - p0)[None, :]
    return QuadratureRule(points=pts, weights=np.full(2, 0.5 * length))


def fan_triangles(poly: np.ndarray):
    """Triangulate a convex polygon (k, 2) by fanning from vertex 0."""
    for k in range(1, len(poly) - 1):
        yield np.array([poly[0], poly[k], poly[k + 1]])


def polygon_rule(poly: np.ndarray, degree: int = 2) -> QuadratureRule:
    """Composite triangle rule over a convex polygon."""
    pts, wts = [], []
    for tri in fan_triangles(np.asarray(poly, dtype=float)):
        r = triangle_rule(tri, degree)
        pts.append(r.points)
        wts.append(r.weights)
    return QuadratureRule(points=np.vstack(pts), weights=np.concatenate(wts))


def polygon_area(poly: np.ndarray) -> float:
    """Shoelace area of a (convex) polygon given counterclockwise or clockwise."""
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
