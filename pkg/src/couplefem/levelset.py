"""Level sets and cut classification for unfitted (CutFEM) discretizations.

The level set is negative inside subdomain 1.  Elements are classified from
the signs of the vertex values; cut elements get a clipped-polygon
decomposition of K into K cap Omega_1 and K cap Omega_2 plus the straight
interface segment between the two edge zero-crossings of the linearly
interpolated level set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCutError
from .mesh import INTERIOR, Mesh
from .quadrature import polygon_area

INSIDE_1 = 1
INSIDE_2 = 2
CUT = 0

_ZERO_SNAP = 1e-12  # vertices with |phi| < snap * h are nudged off the zero set


@dataclass(frozen=True)
class LevelSet:
    """Closed-form signed function; negative inside subdomain 1.

    kinds: "circle" (distance to center minus radius), "half-circle"
    (circle centered at the origin, the arc cap inside the unit square) and
    "vertical-line" (x - x0).
    """

    kind: str
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 0.0
    x0: float = 0.0

    @classmethod
    def circle(cls, center, radius) -> "LevelSet":
        return cls(kind="circle", center=(float(center[0]), float(center[1])),
                   radius=float(radius))

    @classmethod
    def half_circle(cls, radius) -> "LevelSet":
        return cls(kind="half-circle", center=(0.0, 0.0), radius=float(radius))

    @classmethod
    def vertical_line(cls, x0) -> "LevelSet":
        return cls(kind="vertical-line", x0=float(x0))

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == "vertical-line":
            return pts[:, 0] - self.x0
        dx = pts[:, 0] - self.center[0]
        dy = pts[:, 1] - self.center[1]
        return np.sqrt(dx * dx + dy * dy) - self.radius


@dataclass
class CutCell:
    """Clipped geometry of one cut triangle."""

    element: int
    poly1: np.ndarray   # polygon of K cap Omega_1 (phi < 0)
    poly2: np.ndarray
    area1: float
    area2: float
    seg: np.ndarray     # (2, 2) endpoints of Gamma cap K
    normal: np.ndarray  # unit, pointing from Omega_1 into Omega_2
    h: float            # diameter of K (longest edge)


@dataclass
class CutClassification:
    """Element statuses, cut-cell geometry, ghost faces and fitted facets.

    ``fitted_facets`` collects interior facets whose two neighbours are pure
    but lie in different subdomains; they appear when the zero set aligns
    with mesh lines and make the cut assemblies degenerate exactly to their
    fitted counterparts.
    """

    status: np.ndarray
    cut_elements: np.ndarray
    ghost_faces: np.ndarray
    cells: list[CutCell] = field(default_factory=list)
    fitted_facets: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    vertex_values: np.ndarray = field(default=None, repr=False)

    def cell_of(self, element: int) -> CutCell:
        return self._by_element[element]

    def __post_init__(self):
        self._by_element = {c.element: c for c in self.cells}


def split_triangle(pts: np.ndarray, vals: np.ndarray):
    """Split a triangle along the zero set of the vertex-interpolated values.

    Returns (poly_neg, poly_pos, segment).  ``vals`` must not vanish at any
    vertex (callers snap near-zero values first).
    """
    neg, pos, crossings = [], [], []
    for k in range(3):
        a, b = k, (k + 1) % 3
        (neg if vals[a] < 0 else pos).append(pts[a])
        if vals[a] * vals[b] < 0:
            t = vals[a] / (vals[a] - vals[b])
            p = pts[a] + t * (pts[b] - pts[a])
            neg.append(p)
            pos.append(p)
            crossings.append(p)
    if len(crossings) != 2:
        raise DegenerateCutError("triangle is not properly cut by the zero set")
    return np.asarray(neg), np.asarray(pos), np.asarray(crossings)


def classify_cut(mesh: Mesh, phi) -> CutClassification:
    """Classify elements against a level set and build the cut geometry.

    ``phi`` is a LevelSet or any callable mapping (m, 2) points to values.
    Raises DegenerateCutError when the level set vanishes on a whole element.
    """
    vals = np.asarray(phi(mesh.vertices), dtype=float).copy()
    snap = _ZERO_SNAP * mesh.h_max
    near_zero = np.abs(vals) < snap
    tri_vals_raw = near_zero[mesh.triangles]
    if np.any(tri_vals_raw.all(axis=1)):
        bad = int(np.argmax(tri_vals_raw.all(axis=1)))
        raise DegenerateCutError(
            f"level set vanishes on all vertices of triangle {bad}"
        )

    # near-zero vertices sit on the interface: they are neutral for the
    # status (an element is cut only when both strict signs occur, so a zero
    # set aligned with mesh lines yields no cut elements), and they are
    # nudged to +snap for the cut geometry to avoid zero-measure slivers.
    strict_neg = (vals < 0) & ~near_zero
    strict_pos = (vals > 0) & ~near_zero
    tri_neg = strict_neg[mesh.triangles].sum(axis=1)
    tri_pos = strict_pos[mesh.triangles].sum(axis=1)
    vals[near_zero] = snap
    status = np.empty(mesh.num_triangles, dtype=np.int8)
    cut_mask = (tri_neg > 0) & (tri_pos > 0)
    status[(tri_neg > 0) & ~cut_mask] = INSIDE_1
    status[(tri_neg == 0)] = INSIDE_2
    status[cut_mask] = CUT
    cut_elements = np.flatnonzero(cut_mask)

    diam = mesh.tri_diameters()
    cells = []
    for t in cut_elements:
        tri = mesh.triangles[t]
        pts = mesh.vertices[tri]
        v = vals[tri]
        poly1, poly2, seg = split_triangle(pts, v)
        grad = v @ mesh.tri_grads[t]  # gradient of the interpolated level set
        normal = grad / np.linalg.norm(grad)
        cells.append(CutCell(
            element=int(t),
            poly1=poly1, poly2=poly2,
            area1=polygon_area(poly1), area2=polygon_area(poly2),
            seg=seg, normal=normal, h=float(diam[t]),
        ))

    interior = mesh.facet_tris[:, 1] >= 0
    t1 = mesh.facet_tris[:, 0]
    t2 = np.where(interior, mesh.facet_tris[:, 1], 0)
    touches_cut = cut_mask[t1] | cut_mask[t2]
    ghost_faces = np.flatnonzero(interior & touches_cut)

    s1 = status[t1]
    s2 = status[t2]
    pure_pair = interior & (
        ((s1 == INSIDE_1) & (s2 == INSIDE_2)) | ((s1 == INSIDE_2) & (s2 == INSIDE_1))
    )
    fitted_facets = np.flatnonzero(pure_pair)

    return CutClassification(
        status=status,
        cut_elements=cut_elements,
        ghost_faces=ghost_faces,
        cells=cells,
        fitted_facets=fitted_facets,
        vertex_values=vals,
    )


def ghost_faces_brute_force(mesh: Mesh, status: np.ndarray) -> np.ndarray:
    """Reference implementation scanning every interior face (for testing)."""
    out = []
    for fid in range(mesh.num_facets):
        ta, tb = mesh.facet_tris[fid]
        if tb < 0 or mesh.boundary_tag[fid] != INTERIOR:
            continue
        if status[ta] == CUT or status[tb] == CUT:
            out.append(fid)
    return np.asarray(out, dtype=np.int64)
