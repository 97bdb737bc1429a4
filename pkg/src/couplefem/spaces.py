"""Degree-of-freedom layouts for single-field and two-field P1 spaces.

A FieldSpace carries P1 dofs on the vertices of a chosen element set (the
whole mesh, one subdomain, or the active elements of a cut field).  A
TwoFieldSpace stacks two of them; vertices shared by both element sets (on a
fitted interface, or in the cut-element overlap band) then carry one dof per
field, which is what lets the coupled formulations represent a nonzero jump.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .levelset import CUT, INSIDE_1, INSIDE_2, CutClassification
from .mesh import Mesh


@dataclass
class FieldSpace:
    """P1 dofs on the vertices touched by ``elements``."""

    mesh: Mesh
    elements: np.ndarray
    vert_to_dof: np.ndarray = field(init=False, repr=False)
    dof_to_vert: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.elements = np.asarray(self.elements, dtype=np.int64)
        verts = np.unique(self.mesh.triangles[self.elements].ravel())
        self.dof_to_vert = verts.astype(np.int64)
        self.vert_to_dof = np.full(self.mesh.num_vertices, -1, dtype=np.int64)
        self.vert_to_dof[verts] = np.arange(len(verts))
        self._element_set = set(int(t) for t in self.elements)

    @property
    def ndof(self) -> int:
        return len(self.dof_to_vert)

    def has_element(self, t: int) -> bool:
        return int(t) in self._element_set

    def dofs_of(self, t: int) -> np.ndarray:
        return self.vert_to_dof[self.mesh.triangles[t]]

    def dofs_on_vertices(self, verts: np.ndarray) -> np.ndarray:
        d = self.vert_to_dof[np.asarray(verts, dtype=np.int64)]
        return d[d >= 0]


def full_space(mesh: Mesh) -> FieldSpace:
    return FieldSpace(mesh, np.arange(mesh.num_triangles))


@dataclass
class TwoFieldSpace:
    """Two stacked FieldSpaces; field-2 dofs are offset by field 1's count."""

    mesh: Mesh
    space1: FieldSpace
    space2: FieldSpace

    @property
    def offset(self) -> int:
        return self.space1.ndof

    @property
    def ndof(self) -> int:
        return self.space1.ndof + self.space2.ndof

    def dofs_of(self, t: int, fld: int) -> np.ndarray:
        if fld == 1:
            return self.space1.dofs_of(t)
        return self.space2.dofs_of(t) + self.offset

    def split(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return u[: self.offset], u[self.offset:]

    def vertex_values(self, u: np.ndarray, fld: int,
                      fill=np.nan) -> np.ndarray:
        """Scatter one field to a full vertex array (``fill`` elsewhere)."""
        space = self.space1 if fld == 1 else self.space2
        part = u[: self.offset] if fld == 1 else u[self.offset:]
        out = np.full(self.mesh.num_vertices, fill, dtype=float)
        out[space.dof_to_vert] = part
        return out


def fitted_two_field_space(mesh: Mesh) -> TwoFieldSpace:
    """Broken space over the subdomain tags; interface vertices are doubled."""
    e1 = np.flatnonzero(mesh.subdomain_tags == 1)
    e2 = np.flatnonzero(mesh.subdomain_tags == 2)
    return TwoFieldSpace(mesh, FieldSpace(mesh, e1), FieldSpace(mesh, e2))


def cut_two_field_space(mesh: Mesh, cls: CutClassification) -> TwoFieldSpace:
    """Overlapping cut layout: field i lives on {inside_i} union {cut}."""
    e1 = np.flatnonzero((cls.status == INSIDE_1) | (cls.status == CUT))
    e2 = np.flatnonzero((cls.status == INSIDE_2) | (cls.status == CUT))
    return TwoFieldSpace(mesh, FieldSpace(mesh, e1), FieldSpace(mesh, e2))


def dirichlet_dofs_single(space: FieldSpace, tags=None, values=None):
    """Constrained dofs (and their values) on tagged boundary sides."""
    verts = space.mesh.boundary_vertices(tags)
    dofs = space.dofs_on_vertices(verts)
    if values is None:
        vals = np.zeros(len(dofs))
    else:
        vals = np.asarray(values(space.mesh.vertices[space.dof_to_vert[dofs]]),
                          dtype=float)
    return dofs, vals


def dirichlet_dofs_twofield(space: TwoFieldSpace, tags=None,
                            values1=None, values2=None,
                            phi_values: np.ndarray | None = None):
    """Constrained dofs per field on tagged boundary sides.

    For cut layouts pass the classified vertex level-set values: a field is
    then only constrained at boundary vertices inside its own closed
    physical subdomain, never on its fictitious extension.
    """
    verts = space.mesh.boundary_vertices(tags)
    out_dofs, out_vals = [], []
    tol = 1e-10 * space.mesh.h_max  # vertices on the interface belong to both
    for fld, (sub, values) in enumerate(
            [(space.space1, values1), (space.space2, values2)], start=1):
        v = verts
        if phi_values is not None:
            side = (phi_values[verts] <= tol if fld == 1
                    else phi_values[verts] >= -tol)
            v = verts[side]
        dofs = sub.dofs_on_vertices(v)
        coords = space.mesh.vertices[sub.dof_to_vert[dofs]]
        vals = np.zeros(len(dofs)) if values is None else \
            np.asarray(values(coords), dtype=float)
        if fld == 2:
            dofs = dofs + space.offset
        out_dofs.append(dofs)
        out_vals.append(vals)
    return np.concatenate(out_dofs), np.concatenate(out_vals)
