"""Structured triangulations of the unit square with facet topology.

Vertices, triangles (counterclockwise) and facets are stored in plain numpy
arrays.  Boundary facets carry a tag (left/right/bottom/top of the unit
square), triangles carry a subdomain tag in {1, 2} used by the fitted
interface formulations.  All arrays are built once and treated as read-only
afterwards; construction is single-threaded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateElementError, GeometryMismatchError

BOUNDARY_TAGS = ("left", "right", "bottom", "top")
_TAG_CODE = {name: i for i, name in enumerate(BOUNDARY_TAGS)}
INTERIOR = -1

_GEOM_TOL = 1e-12


@dataclass
class Mesh:
    """Conforming triangulation with precomputed facet topology.

    Fields:
        vertices: (nv, 2) coordinates.
        triangles: (nt, 3) vertex indices, counterclockwise.
        facets: (nf, 2) vertex index pairs, sorted so facets[i, 0] < facets[i, 1].
        facet_tris: (nf, 2) adjacent triangles, second entry -1 on the boundary.
        boundary_tag: (nf,) code into BOUNDARY_TAGS, -1 for interior facets.
        subdomain_tags: (nt,) in {1, 2}; all 1 until an interface is fitted.
        h_per_facet: (nf,) facet lengths.
        h_max: largest facet length (the mesh size).
        tri_areas, tri_grads: per-element area and constant P1 basis gradients.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    facets: np.ndarray
    facet_tris: np.ndarray
    boundary_tag: np.ndarray
    subdomain_tags: np.ndarray
    h_per_facet: np.ndarray
    h_max: float
    tri_areas: np.ndarray = field(repr=False, default=None)
    tri_grads: np.ndarray = field(repr=False, default=None)

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def num_facets(self) -> int:
        return self.facets.shape[0]

    def boundary_facets(self, tags=None) -> np.ndarray:
        """Facet ids on the boundary, optionally restricted to named sides."""
        if tags is None:
            return np.flatnonzero(self.boundary_tag >= 0)
        codes = {_TAG_CODE[t] for t in tags}
        return np.flatnonzero(np.isin(self.boundary_tag, list(codes)))

    def boundary_vertices(self, tags=None) -> np.ndarray:
        """Vertex ids lying on (the selected part of) the boundary."""
        fids = self.boundary_facets(tags)
        return np.unique(self.facets[fids].ravel())

    def tri_diameters(self) -> np.ndarray:
        """Longest edge per triangle."""
        pts = self.vertices[self.triangles]
        e = np.stack([
            pts[:, 1] - pts[:, 0],
            pts[:, 2] - pts[:, 1],
            pts[:, 0] - pts[:, 2],
        ])
        return np.sqrt((e ** 2).sum(axis=2)).max(axis=0)


@dataclass
class InterfaceTopology:
    """A fitted interface: an ordered polyline of mesh facets.

    Normals point from subdomain 1 into subdomain 2.  ``tri1``/``tri2`` are
    the adjacent triangles on the subdomain-1 / subdomain-2 side.
    """

    facet_ids: np.ndarray
    normals: np.ndarray
    trace_h: np.ndarray
    tri1: np.ndarray
    tri2: np.ndarray

    def __len__(self) -> int:
        return len(self.facet_ids)


def _p1_geometry(vertices, triangles):
    """Signed areas and constant P1 gradients; raises on degenerate cells."""
    p = vertices[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    if np.any(det <= _GEOM_TOL):
        bad = int(np.argmin(det))
        raise DegenerateElementError(
            f"triangle {bad} has non-positive area {det[bad] / 2:.3e}"
        )
    area = 0.5 * det
    # gradient of barycentric basis: rows are grad(phi_i)
    grads = np.empty((len(triangles), 3, 2))
    grads[:, 1, 0] = d2[:, 1] / det
    grads[:, 1, 1] = -d2[:, 0] / det
    grads[:, 2, 0] = -d1[:, 1] / det
    grads[:, 2, 1] = d1[:, 0] / det
    grads[:, 0] = -grads[:, 1] - grads[:, 2]
    return area, grads


def _classify_boundary(vertices, a, b):
    xa, ya = vertices[a]
    xb, yb = vertices[b]
    if abs(xa) < _GEOM_TOL and abs(xb) < _GEOM_TOL:
        return _TAG_CODE["left"]
    if abs(xa - 1.0) < _GEOM_TOL and abs(xb - 1.0) < _GEOM_TOL:
        return _TAG_CODE["right"]
    if abs(ya) < _GEOM_TOL and abs(yb) < _GEOM_TOL:
        return _TAG_CODE["bottom"]
    if abs(ya - 1.0) < _GEOM_TOL and abs(yb - 1.0) < _GEOM_TOL:
        return _TAG_CODE["top"]
    raise GeometryMismatchError(
        f"boundary facet ({a}, {b}) does not lie on a side of the unit square"
    )


UNTAGGED = -2  # boundary facet not on the unit-square frame (submeshes only)


def _mesh_from_cells(vertices, triangles, subdomain_tags=None, strict=True) -> Mesh:
    vertices = np.ascontiguousarray(vertices, dtype=float)
    triangles = np.ascontiguousarray(triangles, dtype=np.int32)
    area, grads = _p1_geometry(vertices, triangles)

    edge_index: dict[tuple[int, int], int] = {}
    facet_tris = []
    facets = []
    for t, tri in enumerate(triangles):
        for k in range(3):
            a, b = int(tri[k]), int(tri[(k + 1) % 3])
            key = (a, b) if a < b else (b, a)
            fid = edge_index.get(key)
            if fid is None:
                edge_index[key] = len(facets)
                facets.append(key)
                facet_tris.append([t, -1])
            else:
                facet_tris[fid][1] = t
    facets = np.asarray(facets, dtype=np.int32)
    facet_tris = np.asarray(facet_tris, dtype=np.int32)

    boundary_tag = np.full(len(facets), INTERIOR, dtype=np.int8)
    for fid in np.flatnonzero(facet_tris[:, 1] < 0):
        try:
            boundary_tag[fid] = _classify_boundary(vertices, *facets[fid])
        except GeometryMismatchError:
            if strict:
                raise
            boundary_tag[fid] = UNTAGGED

    dv = vertices[facets[:, 1]] - vertices[facets[:, 0]]
    h_per_facet = np.sqrt((dv ** 2).sum(axis=1))

    if subdomain_tags is None:
        subdomain_tags = np.ones(len(triangles), dtype=np.int8)
    return Mesh(
        vertices=vertices,
        triangles=triangles,
        facets=facets,
        facet_tris=facet_tris,
        boundary_tag=boundary_tag,
        subdomain_tags=np.asarray(subdomain_tags, dtype=np.int8),
        h_per_facet=h_per_facet,
        h_max=float(h_per_facet.max()),
        tri_areas=area,
        tri_grads=grads,
    )


def build_structured_mesh(n: int, split: str = "ll-ur") -> Mesh:
    """Uniform n-by-n triangulation of the unit square (2 n^2 triangles).

    ``split`` selects the cell diagonal: "ll-ur" (default, lower-left to
    upper-right) or "ul-lr".
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if split not in ("ll-ur", "ul-lr"):
        raise ValueError(f"unknown split {split!r}")
    xs = np.linspace(0.0, 1.0, n + 1)
    gx, gy = np.meshgrid(xs, xs, indexing="xy")
    vertices = np.column_stack([gx.ravel(), gy.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    triangles = []
    for j in range(n):
        for i in range(n):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            if split == "ll-ur":
                triangles.append((v00, v10, v11))
                triangles.append((v00, v11, v01))
            else:
                triangles.append((v00, v10, v01))
                triangles.append((v10, v11, v01))
    return _mesh_from_cells(vertices, triangles)


def refine_uniform(mesh: Mesh) -> Mesh:
    """Red refinement: each triangle splits into 4 congruent children.

    Subdomain tags are inherited; boundary tags are rebuilt (children of a
    boundary facet lie on the same side of the square).
    """
    nv = mesh.num_vertices
    mid_of_facet = nv + np.arange(mesh.num_facets)
    midpoints = 0.5 * (mesh.vertices[mesh.facets[:, 0]] + mesh.vertices[mesh.facets[:, 1]])
    vertices = np.vstack([mesh.vertices, midpoints])

    edge_lookup = {}
    for fid, (a, b) in enumerate(mesh.facets):
        edge_lookup[(int(a), int(b))] = mid_of_facet[fid]

    def mid(a, b):
        return edge_lookup[(a, b) if a < b else (b, a)]

    triangles = []
    tags = []
    for t, (v0, v1, v2) in enumerate(mesh.triangles):
        v0, v1, v2 = int(v0), int(v1), int(v2)
        m01, m12, m02 = mid(v0, v1), mid(v1, v2), mid(v0, v2)
        triangles.extend([
            (v0, m01, m02),
            (v1, m12, m01),
            (v2, m02, m12),
            (m01, m12, m02),
        ])
        tags.extend([mesh.subdomain_tags[t]] * 4)
    return _mesh_from_cells(vertices, triangles, np.asarray(tags, dtype=np.int8))


def fit_interface_line(mesh: Mesh, x0: float) -> InterfaceTopology:
    """Collect the facets on the vertical line {x = x0} as a fitted interface.

    Retags ``mesh.subdomain_tags`` in place: triangles left of the line get
    tag 1, right of it tag 2.  Normals point in +x (from subdomain 1 to 2).
    Raises GeometryMismatchError when x0 is not a mesh line, since the fitted
    formulations require matching trace meshes.
    """
    on_line = np.abs(mesh.vertices[:, 0] - x0) < _GEOM_TOL
    f_on = on_line[mesh.facets[:, 0]] & on_line[mesh.facets[:, 1]]
    f_on &= mesh.boundary_tag == INTERIOR
    fids = np.flatnonzero(f_on)
    if len(fids) == 0:
        raise GeometryMismatchError(
            f"x0 = {x0} is not an interior mesh line of this mesh"
        )

    centroids = mesh.vertices[mesh.triangles].mean(axis=1)
    mesh.subdomain_tags[:] = np.where(centroids[:, 0] < x0, 1, 2)

    # order the polyline bottom-to-top
    mids = 0.5 * (mesh.vertices[mesh.facets[fids, 0]] + mesh.vertices[mesh.facets[fids, 1]])
    order = np.argsort(mids[:, 1], kind="stable")
    fids = fids[order]

    tri1 = np.empty(len(fids), dtype=np.int32)
    tri2 = np.empty(len(fids), dtype=np.int32)
    for k, fid in enumerate(fids):
        ta, tb = mesh.facet_tris[fid]
        if centroids[ta, 0] < x0:
            tri1[k], tri2[k] = ta, tb
        else:
            tri1[k], tri2[k] = tb, ta
    normals = np.tile([1.0, 0.0], (len(fids), 1))
    return InterfaceTopology(
        facet_ids=fids,
        normals=normals,
        trace_h=mesh.h_per_facet[fids].copy(),
        tri1=tri1,
        tri2=tri2,
    )


def extract_submesh(mesh: Mesh, tag: int) -> tuple[Mesh, np.ndarray]:
    """Mesh of the triangles with the given subdomain tag.

    Returns the submesh and the array mapping its vertex ids back to the
    parent mesh.  Submesh boundary facets that lie strictly inside the unit
    square (on the interface) get the UNTAGGED code.
    """
    keep = np.flatnonzero(mesh.subdomain_tags == tag)
    tris = mesh.triangles[keep]
    vids = np.unique(tris.ravel())
    remap = np.full(mesh.num_vertices, -1, dtype=np.int64)
    remap[vids] = np.arange(len(vids))
    sub = _mesh_from_cells(mesh.vertices[vids], remap[tris], strict=False)
    return sub, vids
