"""Shared facet/segment kernels for all boundary and interface couplings.

Every Nitsche / multiplier / cohesive / contact formulation in this package
is assembled from the same per-piece trace operators:

* a "piece" is a straight portion of the coupling curve: a boundary facet, a
  fitted interface facet, or the segment cut out of one background element;
* per quadrature point the kernels expose the trace-value row, the jump row
  and the (weighted or arithmetic) normal-flux row over the local dofs.

Because the fitted and cut assemblies consume identical piece data, a level
set aligned with mesh lines reproduces the fitted matrices exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import _barycentric
from .levelset import CUT, INSIDE_1, CutClassification
from .mesh import BOUNDARY_TAGS, Mesh, InterfaceTopology
from .quadrature import segment_rule
from .spaces import FieldSpace, TwoFieldSpace

_OUTWARD = {
    "left": np.array([-1.0, 0.0]),
    "right": np.array([1.0, 0.0]),
    "bottom": np.array([0.0, -1.0]),
    "top": np.array([0.0, 1.0]),
}


@dataclass
class BoundaryPiece:
    facet: int
    tri: int
    p0: np.ndarray
    p1: np.ndarray
    normal: np.ndarray
    h: float
    tag: str


@dataclass
class InterfacePiece:
    """One straight interface portion with its averaging weights.

    ``elem1``/``elem2`` supply the two traces; they coincide for a genuinely
    cut element and differ for fitted facets.  ``h`` is the length scale of
    the coupling penalty: the facet length for fitted pieces, the element
    diameter for cut segments.
    """

    elem1: int
    elem2: int
    p0: np.ndarray
    p1: np.ndarray
    normal: np.ndarray
    h: float
    w1: float
    w2: float

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.p1 - self.p0))

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.p0 + self.p1)


def boundary_pieces(mesh: Mesh, tags=None) -> list[BoundaryPiece]:
    pieces = []
    for fid in mesh.boundary_facets(tags):
        a, b = mesh.facets[fid]
        tag = BOUNDARY_TAGS[mesh.boundary_tag[fid]]
        pieces.append(BoundaryPiece(
            facet=int(fid), tri=int(mesh.facet_tris[fid, 0]),
            p0=mesh.vertices[a], p1=mesh.vertices[b],
            normal=_OUTWARD[tag], h=float(mesh.h_per_facet[fid]), tag=tag,
        ))
    return pieces


def fitted_interface_pieces(mesh: Mesh, topo: InterfaceTopology,
                            w1: float, w2: float) -> list[InterfacePiece]:
    pieces = []
    for k, fid in enumerate(topo.facet_ids):
        a, b = mesh.facets[fid]
        pieces.append(InterfacePiece(
            elem1=int(topo.tri1[k]), elem2=int(topo.tri2[k]),
            p0=mesh.vertices[a], p1=mesh.vertices[b],
            normal=topo.normals[k], h=float(topo.trace_h[k]),
            w1=w1, w2=w2,
        ))
    return pieces


def cut_interface_pieces(mesh: Mesh, cls: CutClassification,
                         weight_of=None, w1: float = 0.5,
                         w2: float = 0.5) -> list[InterfacePiece]:
    """Interface pieces of a cut classification.

    ``weight_of(cell) -> (w1, w2)`` overrides the static weights per cut
    element (used for the geometric, cut-fraction weights).  Facets on which
    the level set aligns with the mesh turn into fitted-style pieces with
    the facet length as penalty scale and the static weights.
    """
    pieces = []
    for cell in cls.cells:
        cw1, cw2 = (w1, w2) if weight_of is None else weight_of(cell)
        pieces.append(InterfacePiece(
            elem1=cell.element, elem2=cell.element,
            p0=cell.seg[0], p1=cell.seg[1],
            normal=cell.normal, h=cell.h, w1=cw1, w2=cw2,
        ))
    for fid in cls.fitted_facets:
        a, b = mesh.facets[fid]
        ta, tb = mesh.facet_tris[fid]
        if cls.status[ta] == INSIDE_1:
            t1, t2 = int(ta), int(tb)
        else:
            t1, t2 = int(tb), int(ta)
        # normal from side 1 to side 2
        edge = mesh.vertices[b] - mesh.vertices[a]
        n = np.array([edge[1], -edge[0]])
        n /= np.linalg.norm(n)
        c1 = mesh.vertices[mesh.triangles[t1]].mean(axis=0)
        mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b])
        if np.dot(n, mid - c1) < 0:
            n = -n
        pieces.append(InterfacePiece(
            elem1=t1, elem2=t2,
            p0=mesh.vertices[a], p1=mesh.vertices[b],
            normal=n, h=float(mesh.h_per_facet[fid]), w1=w1, w2=w2,
        ))
    pieces.sort(key=lambda p: (round(p.midpoint[1], 9), round(p.midpoint[0], 9)))
    return pieces


@dataclass
class PieceOps:
    """Quadrature data and trace rows of one piece over its local dofs."""

    piece: object
    dofs: np.ndarray      # (k,) global dofs
    qp_x: np.ndarray      # (2, 2) quadrature points
    qp_w: np.ndarray      # (2,)
    rows_val: np.ndarray  # (2, k) trace values (boundary) or jump (interface)
    row_flux: np.ndarray  # (k,) weighted normal flux, constant on the piece
    rows_avc: np.ndarray | None = None  # (2, k) conjugate value average
    row_arith: np.ndarray | None = None  # (k,) plain arithmetic flux average


def boundary_ops(mesh: Mesh, space: FieldSpace, pieces, eps: float) -> list[PieceOps]:
    ops = []
    for p in pieces:
        rule = segment_rule(p.p0, p.p1)
        tri_pts = mesh.vertices[mesh.triangles[p.tri]]
        rows_val = _barycentric(tri_pts, rule.points)
        row_flux = eps * (mesh.tri_grads[p.tri] @ p.normal)
        ops.append(PieceOps(
            piece=p, dofs=space.dofs_of(p.tri),
            qp_x=rule.points, qp_w=rule.weights,
            rows_val=rows_val, row_flux=row_flux,
        ))
    return ops


def interface_ops(mesh: Mesh, space: TwoFieldSpace, pieces,
                  eps1: float, eps2: float) -> list[PieceOps]:
    ops = []
    for p in pieces:
        rule = segment_rule(p.p0, p.p1)
        n1 = _barycentric(mesh.vertices[mesh.triangles[p.elem1]], rule.points)
        n2 = _barycentric(mesh.vertices[mesh.triangles[p.elem2]], rule.points)
        jump = np.hstack([n1, -n2])
        avc = np.hstack([p.w2 * n1, p.w1 * n2])
        dn1 = mesh.tri_grads[p.elem1] @ p.normal
        dn2 = mesh.tri_grads[p.elem2] @ p.normal
        flux = np.concatenate([p.w1 * eps1 * dn1, p.w2 * eps2 * dn2])
        arith = np.concatenate([0.5 * dn1, 0.5 * dn2])
        dofs = np.concatenate([space.dofs_of(p.elem1, 1), space.dofs_of(p.elem2, 2)])
        ops.append(PieceOps(
            piece=p, dofs=dofs, qp_x=rule.points, qp_w=rule.weights,
            rows_val=jump, row_flux=flux, rows_avc=avc, row_arith=arith,
        ))
    return ops


def scatter(rows, cols, vals, dofs, local):
    k = len(dofs)
    rows.extend(np.repeat(dofs, k))
    cols.extend(np.tile(dofs, k))
    vals.extend(np.asarray(local, dtype=float).ravel())


def add_coupling_bilinear(rows, cols, vals, ops, c_sym, c_flux, c_jump):
    """Accumulate  c_jump <val_u, val_v> - c_sym(<flux_u, val_v> + sym)
    - c_flux <flux_u, flux_v>  over all pieces.

    The coefficient arguments are arrays over the pieces (or scalars).
    """
    c_sym = np.broadcast_to(np.asarray(c_sym, dtype=float), (len(ops),))
    c_flux = np.broadcast_to(np.asarray(c_flux, dtype=float), (len(ops),))
    c_jump = np.broadcast_to(np.asarray(c_jump, dtype=float), (len(ops),))
    for i, op in enumerate(ops):
        k = len(op.dofs)
        local = np.zeros((k, k))
        fr = op.row_flux
        for q in range(len(op.qp_w)):
            w = op.qp_w[q]
            v = op.rows_val[q]
            if c_jump[i]:
                local += (w * c_jump[i]) * np.outer(v, v)
            if c_sym[i]:
                m = np.outer(v, fr)
                local -= (w * c_sym[i]) * (m + m.T)
        if c_flux[i]:
            local -= (c_flux[i] * op.qp_w.sum()) * np.outer(fr, fr)
        scatter(rows, cols, vals, op.dofs, local)


def add_boundary_rhs(rhs, ops, value_coef, flux_coef, data):
    """rhs += <data, value_coef * v - flux_coef * eps dn v> per piece.

    ``value_coef``/``flux_coef`` are arrays over pieces, ``data`` maps
    points to values.
    """
    value_coef = np.broadcast_to(np.asarray(value_coef, dtype=float), (len(ops),))
    flux_coef = np.broadcast_to(np.asarray(flux_coef, dtype=float), (len(ops),))
    for i, op in enumerate(ops):
        d = np.asarray(data(op.qp_x), dtype=float)
        wd = op.qp_w * d
        rhs[op.dofs] += value_coef[i] * (op.rows_val.T @ wd)
        rhs[op.dofs] -= flux_coef[i] * op.row_flux * wd.sum()


def add_flux_datum_rhs(rhs, ops, g):
    """rhs += <g, conjugate-average of v> over interface pieces."""
    for op in ops:
        gv = np.asarray(g(op.qp_x), dtype=float)
        rhs[op.dofs] += op.rows_avc.T @ (op.qp_w * gv)


def multiplier_columns(ops) -> list[np.ndarray]:
    """Integral of the value/jump rows per piece: the P0 coupling columns."""
    return [op.rows_val.T @ op.qp_w for op in ops]


def chain_pairs(pieces, groups=None):
    """Adjacent piece pairs sharing an endpoint interior to their polyline.

    Endpoints shared by exactly two pieces of the same group are interior;
    polyline ends (and group boundaries, e.g. corners of the square) are
    excluded.  Returns (index_a, index_b, h_vertex) triples with h_vertex
    the mean of the two piece lengths.
    """
    if groups is None:
        groups = [list(range(len(pieces)))]
    pairs = []
    for group in groups:
        incident: dict[tuple, list[int]] = {}
        for idx in group:
            p = pieces[idx]
            for pt in (p.p0, p.p1):
                key = (round(float(pt[0]), 9), round(float(pt[1]), 9))
                incident.setdefault(key, []).append(idx)
        for key in sorted(incident):
            inc = incident[key]
            if len(inc) == 2:
                a, b = inc
                la = float(np.linalg.norm(pieces[a].p1 - pieces[a].p0))
                lb = float(np.linalg.norm(pieces[b].p1 - pieces[b].p0))
                pairs.append((a, b, 0.5 * (la + lb)))
    return pairs


def add_jump_stabilization(rows, cols, vals, pairs, weight, offset: int,
                           sign: float = -1.0):
    """Accumulate  sign * weight * h_v^2 (lam_a - lam_b)(mu_a - mu_b).

    With sign=-1 this is the -j(lam, mu) block of the stabilized saddle
    systems.  ``offset`` positions the multiplier block in the global
    numbering.
    """
    for a, b, hv in pairs:
        w = sign * weight * hv * hv
        for (i, j, s) in ((a, a, 1.0), (a, b, -1.0), (b, a, -1.0), (b, b, 1.0)):
            rows.append(offset + i)
            cols.append(offset + j)
            vals.append(w * s)


def evaluate_j(pairs, weight, lam, mu=None) -> float:
    """The stabilization form j(lam, mu) itself (diagnostics/tests)."""
    mu = lam if mu is None else mu
    total = 0.0
    for a, b, hv in pairs:
        total += weight * hv * hv * (lam[a] - lam[b]) * (mu[a] - mu[b])
    return float(total)


def coupling_samples(ops, u):
    """Per-quadrature-point values of the coupled solution.

    Returns a dict of arrays: position ``x``, weight ``w``, the trace value
    or jump ``val``, the weighted flux (average) ``flux``, the arithmetic
    flux average ``arith`` (None for boundary pieces) and the piece index.
    """
    xs, ws, vs, fl, ar, pid = [], [], [], [], [], []
    for i, op in enumerate(ops):
        ui = u[op.dofs]
        for q in range(len(op.qp_w)):
            xs.append(op.qp_x[q])
            ws.append(op.qp_w[q])
            vs.append(op.rows_val[q] @ ui)
            fl.append(op.row_flux @ ui)
            ar.append(op.row_arith @ ui if op.row_arith is not None else np.nan)
            pid.append(i)
    return {
        "x": np.asarray(xs), "w": np.asarray(ws), "val": np.asarray(vs),
        "flux": np.asarray(fl), "arith": np.asarray(ar),
        "piece": np.asarray(pid, dtype=np.int64),
    }


def field_volume_entries(mesh: Mesh, space: FieldSpace, eps: float,
                         region_of=None):
    """Stiffness triplets for one field; ``region_of(t)`` may clip elements."""
    rows, cols, vals = [], [], []
    for t in space.elements:
        area = mesh.tri_areas[t]
        if region_of is not None:
            poly = region_of(int(t))
            if poly is not None:
                from .quadrature import polygon_area
                area = polygon_area(poly)
        g = mesh.tri_grads[t]
        scatter(rows, cols, vals, space.dofs_of(int(t)), eps * area * (g @ g.T))
    return rows, cols, vals


def field_load(mesh: Mesh, space: FieldSpace, f, region_of=None) -> np.ndarray:
    from .quadrature import fan_triangles, triangle_rule

    b = np.zeros(space.ndof)
    for t in space.elements:
        tri_pts = mesh.vertices[mesh.triangles[t]]
        poly = None if region_of is None else region_of(int(t))
        dofs = space.dofs_of(int(t))
        for tp in ([tri_pts] if poly is None else list(fan_triangles(poly))):
            rule = triangle_rule(tp)
            fv = np.asarray(f(rule.points), dtype=float)
            lam = _barycentric(tri_pts, rule.points)
            b[dofs] += lam.T @ (rule.weights * fv)
    return b


def twofield_volume_entries(mesh: Mesh, space: TwoFieldSpace,
                            eps1: float, eps2: float,
                            cls: CutClassification | None = None):
    """Stiffness triplets for both fields, clipped on cut elements."""
    rows, cols, vals = [], [], []
    for fld, (sub, eps) in enumerate(
            [(space.space1, eps1), (space.space2, eps2)], start=1):
        for t in sub.elements:
            area = mesh.tri_areas[t]
            if cls is not None and cls.status[t] == CUT:
                cell = cls.cell_of(int(t))
                area = cell.area1 if fld == 1 else cell.area2
            g = mesh.tri_grads[t]
            scatter(rows, cols, vals, space.dofs_of(int(t), fld),
                    eps * area * (g @ g.T))
    return rows, cols, vals


def twofield_load(mesh: Mesh, space: TwoFieldSpace, f,
                  cls: CutClassification | None = None,
                  split_y: float | None = None, f_above=None) -> np.ndarray:
    """Load vector over a two-field space, field i integrating over its region."""
    from .quadrature import fan_triangles, triangle_rule

    b = np.zeros(space.ndof)
    for fld, sub in enumerate([space.space1, space.space2], start=1):
        for t in sub.elements:
            tri_pts = mesh.vertices[mesh.triangles[t]]
            if cls is not None and cls.status[t] == CUT:
                cell = cls.cell_of(int(t))
                poly = cell.poly1 if fld == 1 else cell.poly2
            else:
                poly = tri_pts
            polys = [poly]
            if split_y is not None:
                from .assembly import _split_polygon_by_line_y
                polys = _split_polygon_by_line_y(poly, split_y)
            dofs = space.dofs_of(int(t), fld)
            for sub_poly in polys:
                fn = f
                if f_above is not None and split_y is not None \
                        and sub_poly[:, 1].mean() > split_y:
                    fn = f_above
                for tp in fan_triangles(sub_poly):
                    rule = triangle_rule(tp)
                    fv = np.asarray(fn(rule.points), dtype=float)
                    lam = _barycentric(tri_pts, rule.points)
                    b[dofs] += lam.T @ (rule.weights * fv)
    return b
