"""Legacy ASCII VTK export of meshes and nodal fields."""

from __future__ import annotations

import numpy as np

from .mesh import Mesh


def vtk_text(mesh: Mesh, point_fields=None, cell_fields=None,
             title: str = "couplefem") -> str:
    """Unstructured-grid VTK (legacy ASCII), triangles as cell type 5.

    ``point_fields``/``cell_fields`` map field names to arrays; NaN entries
    are written verbatim (used to blank a cut field outside its region).
    The title line carries caller metadata (at most 255 characters).
    """
    lines = [
        "# vtk DataFile Version 3.0",
        title[:255],
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.num_vertices} double",
    ]
    for p in mesh.vertices:
        lines.append(f"{p[0]:.17g} {p[1]:.17g} 0")
    nt = mesh.num_triangles
    lines.append(f"CELLS {nt} {4 * nt}")
    for tri in mesh.triangles:
        lines.append(f"3 {tri[0]} {tri[1]} {tri[2]}")
    lines.append(f"CELL_TYPES {nt}")
    lines.extend(["5"] * nt)

    if cell_fields:
        lines.append(f"CELL_DATA {nt}")
        for name, data in cell_fields.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(format(float(v), ".17g") for v in np.asarray(data))
    if point_fields:
        lines.append(f"POINT_DATA {mesh.num_vertices}")
        for name, data in point_fields.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(format(float(v), ".17g") for v in np.asarray(data))
    return "\n".join(lines) + "\n"


def write_vtk(path, mesh: Mesh, point_fields=None, cell_fields=None,
              title: str = "couplefem") -> None:
    with open(path, "w") as fh:
        fh.write(vtk_text(mesh, point_fields, cell_fields, title))


def export_mesh(path, mesh: Mesh) -> None:
    """Mesh with its subdomain tags as cell data."""
    write_vtk(path, mesh,
              cell_fields={"subdomain": mesh.subdomain_tags.astype(float)})
