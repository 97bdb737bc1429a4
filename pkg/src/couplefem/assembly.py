"""P1 element kernels and global sparse assembly.

Assembly is deterministic: elements are visited in index order and COO
triplets are accumulated in a fixed order, so two assemblies of the same
problem produce bitwise-identical matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateElementError
from .mesh import Mesh
from .quadrature import fan_triangles, triangle_rule

_GEOM_TOL = 1e-14


@dataclass
class SparseSystem:
    """Symmetric sparse system, optionally in 2x2 saddle-point block form.

    ``block_structure`` holds (n_primal, n_multiplier) for saddle systems.
    ``dirichlet`` is an optional (dofs, values) pair of strongly eliminated
    degrees of freedom; solvers apply the symmetric reduction.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    block_structure: tuple[int, int] | None = None
    dirichlet: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def ndof(self) -> int:
        return self.matrix.shape[0]

    def with_dirichlet(self, dofs, values=None) -> "SparseSystem":
        """Return a copy with (additional) strong Dirichlet constraints."""
        dofs = np.asarray(dofs, dtype=np.int64)
        if values is None:
            values = np.zeros(len(dofs))
        values = np.broadcast_to(np.asarray(values, dtype=float), dofs.shape).copy()
        if self.dirichlet is not None:
            d0, v0 = self.dirichlet
            dofs = np.concatenate([d0, dofs])
            values = np.concatenate([v0, values])
        dofs, idx = np.unique(dofs, return_index=True)
        return replace(self, dirichlet=(dofs, values[idx]))


def make_system(rows, cols, vals, rhs, ndof, block_structure=None) -> SparseSystem:
    mat = sp.coo_matrix(
        (np.asarray(vals, dtype=float),
         (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(ndof, ndof),
    ).tocsr()
    return SparseSystem(matrix=mat, rhs=np.asarray(rhs, dtype=float),
                        block_structure=block_structure)


def reduced_form(system: SparseSystem):
    """Eliminate Dirichlet dofs symmetrically (with lifting of nonzero values).

    Returns (A_ff, b_f, free, full_template) where ``full_template`` has the
    constrained values filled in and zeros elsewhere.
    """
    n = system.ndof
    template = np.zeros(n)
    if system.dirichlet is None:
        return system.matrix.tocsc(), system.rhs.copy(), np.arange(n), template
    cdofs, cvals = system.dirichlet
    mask = np.ones(n, dtype=bool)
    mask[cdofs] = False
    free = np.flatnonzero(mask)
    A = system.matrix.tocsc()
    b = system.rhs - A[:, cdofs] @ cvals
    template[cdofs] = cvals
    return A[free][:, free], b[free], free, template


def local_stiffness(pts: np.ndarray, eps: float = 1.0) -> np.ndarray:
    """eps * |K| * grad(phi_i) . grad(phi_j) for one triangle."""
    pts = np.asarray(pts, dtype=float)
    d1, d2 = pts[1] - pts[0], pts[2] - pts[0]
    det = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(det) <= _GEOM_TOL:
        raise DegenerateElementError("zero-area triangle in local_stiffness")
    g = np.empty((3, 2))
    g[1] = (d2[1] / det, -d2[0] / det)
    g[2] = (-d1[1] / det, d1[0] / det)
    g[0] = -g[1] - g[2]
    return eps * 0.5 * abs(det) * (g @ g.T)


def _eps_per_triangle(mesh: Mesh, eps) -> np.ndarray:
    """Resolve a diffusivity spec (scalar, pair, or {tag: value}) per element."""
    if np.isscalar(eps):
        if eps <= 0:
            raise ValueError("diffusivity must be positive")
        return np.full(mesh.num_triangles, float(eps))
    if isinstance(eps, dict):
        table = eps
    else:
        e1, e2 = eps
        table = {1: e1, 2: e2}
    if any(v <= 0 for v in table.values()):
        raise ValueError("diffusivity must be positive")
    out = np.empty(mesh.num_triangles)
    for tag, value in table.items():
        out[mesh.subdomain_tags == tag] = float(value)
    return out


def assemble_stiffness(mesh: Mesh, eps=1.0) -> SparseSystem:
    """Global stiffness matrix (epsilon grad u, grad v); rhs is zero.

    ``eps`` may be a scalar, a (eps1, eps2) pair or a {tag: value} dict
    resolved through the subdomain tags.
    """
    e = _eps_per_triangle(mesh, eps)
    g = mesh.tri_grads
    local = np.einsum("t,tid,tjd->tij", e * mesh.tri_areas, g, g)
    tri = mesh.triangles.astype(np.int64)
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    return make_system(rows, cols, local.ravel(), np.zeros(mesh.num_vertices),
                       mesh.num_vertices)


def _split_polygon_by_line_y(poly: np.ndarray, yc: float):
    """Split a convex polygon along the horizontal line y = yc."""
    vals = poly[:, 1] - yc
    if np.all(vals >= 0) or np.all(vals <= 0):
        return [poly]
    below, above = [], []
    m = len(poly)
    for k in range(m):
        a, b = k, (k + 1) % m
        (below if vals[a] < 0 else above).append(poly[a])
        if vals[a] * vals[b] < 0:
            t = vals[a] / (vals[a] - vals[b])
            p = poly[a] + t * (poly[b] - poly[a])
            below.append(p)
            above.append(p)
    return [np.asarray(below), np.asarray(above)]


def assemble_load(mesh: Mesh, f, split_y: float | None = None,
                  f_above=None) -> np.ndarray:
    """Load vector (f, phi_i) with the degree-2 midpoint rule.

    ``f`` maps (m, 2) points to values.  When ``split_y`` is given, elements
    crossed by the horizontal line y = split_y are subdivided so a jump of f
    across that line is integrated exactly; passing the upper branch as
    ``f_above`` makes the side attribution exact even for quadrature points
    landing on the line itself.
    """
    b = np.zeros(mesh.num_vertices)
    pts_all = mesh.vertices[mesh.triangles]

    crossing = np.zeros(mesh.num_triangles, dtype=bool)
    centroid_y = pts_all[:, :, 1].mean(axis=1)
    if split_y is not None:
        ys = pts_all[:, :, 1]
        crossing = (ys.min(axis=1) < split_y) & (ys.max(axis=1) > split_y)

    def branch(cy):
        if f_above is not None and split_y is not None and cy > split_y:
            return f_above
        return f

    # vectorized midpoint rule on the uncrossed elements
    for fn, mask in _branch_masks(crossing, centroid_y, split_y, f, f_above):
        plain = np.flatnonzero(mask)
        if not len(plain):
            continue
        mids = 0.5 * (pts_all[plain] + np.roll(pts_all[plain], -1, axis=1))
        fv = np.asarray(fn(mids.reshape(-1, 2)), dtype=float).reshape(len(plain), 3)
        w = mesh.tri_areas[plain] / 3.0
        # midpoint k sits on edge (k, k+1): phi is 1/2 there for both ends
        contrib = 0.5 * w[:, None] * (fv + np.roll(fv, -1, axis=1))
        np.add.at(b, mesh.triangles[plain].astype(np.int64).ravel(),
                  np.roll(contrib, 1, axis=1).ravel())

    for t in np.flatnonzero(crossing):
        pts = pts_all[t]
        for poly in _split_polygon_by_line_y(pts, split_y):
            fn = branch(poly[:, 1].mean())
            for tri_pts in fan_triangles(poly):
                rule = triangle_rule(tri_pts)
                fv = np.asarray(fn(rule.points), dtype=float)
                lam = _barycentric(pts, rule.points)
                b[mesh.triangles[t]] += lam.T @ (rule.weights * fv)
    return b


def _branch_masks(crossing, centroid_y, split_y, f, f_above):
    if f_above is None or split_y is None:
        return [(f, ~crossing)]
    return [
        (f, ~crossing & (centroid_y <= split_y)),
        (f_above, ~crossing & (centroid_y > split_y)),
    ]


def _barycentric(tri_pts: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of points x (m, 2) w.r.t. a triangle (3, 2)."""
    d1, d2 = tri_pts[1] - tri_pts[0], tri_pts[2] - tri_pts[0]
    det = d1[0] * d2[1] - d1[1] * d2[0]
    r = x - tri_pts[0]
    l1 = (r[:, 0] * d2[1] - r[:, 1] * d2[0]) / det
    l2 = (d1[0] * r[:, 1] - d1[1] * r[:, 0]) / det
    return np.column_stack([1.0 - l1 - l2, l1, l2])
