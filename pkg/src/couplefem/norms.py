"""Error norms and interpolation for single- and two-field P1 solutions.

Norms integrate with a degree-5 rule so measured convergence rates are not
polluted by quadrature error.  Two-field errors restrict each field to its
own physical region: the tagged subdomain for fitted layouts, the clipped
polygons for cut layouts.
"""

from __future__ import annotations

import numpy as np

from .assembly import _barycentric
from .levelset import CUT, INSIDE_1, INSIDE_2, CutClassification
from .mesh import Mesh
from .quadrature import fan_triangles, triangle_rule
from .spaces import TwoFieldSpace


def interpolate(mesh: Mesh, u_exact) -> np.ndarray:
    """Vertex interpolant of a scalar field."""
    return np.asarray(u_exact(mesh.vertices), dtype=float)


def _element_errors(mesh, t, poly, coeffs, u_exact, grad_exact, degree=5):
    tri_pts = mesh.vertices[mesh.triangles[t]]
    gh = coeffs @ mesh.tri_grads[t]
    e2 = 0.0
    g2 = 0.0
    base = [tri_pts] if poly is None else list(fan_triangles(poly))
    for tp in base:
        rule = triangle_rule(tp, degree)
        lam = _barycentric(tri_pts, rule.points)
        uh = lam @ coeffs
        du = uh - np.asarray(u_exact(rule.points), dtype=float)
        e2 += float(rule.weights @ du ** 2)
        if grad_exact is not None:
            dg = gh[None, :] - np.asarray(grad_exact(rule.points), dtype=float)
            g2 += float(rule.weights @ (dg ** 2).sum(axis=1))
    return e2, g2


def scalar_errors(mesh: Mesh, u: np.ndarray, u_exact, grad_exact=None,
                  space=None, cls: CutClassification | None = None):
    """(L2, H1-seminorm) errors of a single-field solution.

    With a classification, integration is restricted to the physical domain
    {phi < 0} (full inside elements plus clipped cut polygons); ``space``
    maps dofs to vertices in that case.
    """
    l2 = 0.0
    h1 = 0.0
    if cls is None:
        elements = range(mesh.num_triangles)
    else:
        elements = np.flatnonzero((cls.status == INSIDE_1) | (cls.status == CUT))
    for t in elements:
        poly = None
        if cls is not None and cls.status[t] == CUT:
            poly = cls.cell_of(int(t)).poly1
        dofs = mesh.triangles[t] if space is None else space.dofs_of(int(t))
        e2, g2 = _element_errors(mesh, int(t), poly, u[dofs], u_exact, grad_exact)
        l2 += e2
        h1 += g2
    return np.sqrt(l2), np.sqrt(h1)


def twofield_errors(mesh: Mesh, space: TwoFieldSpace, u: np.ndarray,
                    exact1, grad1, exact2, grad2,
                    cls: CutClassification | None = None,
                    eps=(1.0, 1.0)):
    """Errors of a two-field solution over its physical regions.

    Returns a dict with keys "l2", "h1" (broken seminorm) and "energy",
    the latter being  eps1 ||grad e1|| + eps2 ||grad e2||  (the
    contrast-robust flux-error measure).
    """
    l2 = 0.0
    h1 = 0.0
    flux = []
    for fld, (sub, ex, gr) in enumerate(
            [(space.space1, exact1, grad1), (space.space2, exact2, grad2)],
            start=1):
        part2 = 0.0
        grad2s = 0.0
        for t in sub.elements:
            poly = None
            if cls is not None and cls.status[t] == CUT:
                cell = cls.cell_of(int(t))
                poly = cell.poly1 if fld == 1 else cell.poly2
            elif cls is not None:
                want = INSIDE_1 if fld == 1 else INSIDE_2
                if cls.status[t] != want:
                    continue
            dofs = space.dofs_of(int(t), fld)
            e2, g2 = _element_errors(mesh, int(t), poly, u[dofs], ex, gr)
            part2 += e2
            grad2s += g2
        l2 += part2
        h1 += grad2s
        flux.append(eps[fld - 1] * np.sqrt(grad2s))
    return {"l2": np.sqrt(l2), "h1": np.sqrt(h1), "energy": flux[0] + flux[1]}
