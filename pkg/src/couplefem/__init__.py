"""Robust coupling formulations for 2D P1 finite elements.

Boundary conditions (Dirichlet / Robin / Neumann), interface transmission
with high-contrast diffusivities, cohesive bond laws and one-sided contact,
each available as a Nitsche method and (where useful) as a stabilized
Lagrange-multiplier saddle system, on fitted meshes and on unfitted cut
meshes with ghost-penalty stabilization.
"""

from .adhesion import (
    AdhesionParameters,
    ContactState,
    KktReport,
    assemble_cohesive,
    assemble_stiff_penalty,
    solve_adhesive_contact,
    solve_boundary_contact,
    verify_kkt,
)
from .assembly import (
    SparseSystem,
    assemble_load,
    assemble_stiffness,
    local_stiffness,
)
from .cutfem import (
    CutStudyReport,
    GhostPenaltyConfig,
    assemble_cut_cohesive,
    assemble_cut_interface,
    assemble_cut_multiplier_robust,
    assemble_cut_poisson,
    assemble_ghost_penalty,
    solve_cut_adhesive_contact,
)
from .errors import (
    DegenerateCutError,
    DegenerateElementError,
    GeometryMismatchError,
    SingularSystemError,
)
from .interface import (
    InterfaceData,
    WeightScheme,
    assemble_multiplier_interface,
    assemble_nitsche_interface,
    jump_and_average,
)
from .levelset import CutClassification, LevelSet, classify_cut
from .mesh import (
    InterfaceTopology,
    Mesh,
    build_structured_mesh,
    extract_submesh,
    fit_interface_line,
    refine_uniform,
)
from .norms import interpolate, scalar_errors, twofield_errors
from .quadrature import QuadratureRule, polygon_rule, segment_rule, triangle_rule
from .robin import (
    RobinParameters,
    assemble_dirichlet_nitsche,
    assemble_robin_classic,
    assemble_robin_multiplier,
    assemble_robin_nitsche,
)
from .solvers import (
    ConditionEstimate,
    NewtonReport,
    estimate_condition,
    semismooth_newton,
    solve_linear,
)
from .spaces import (
    FieldSpace,
    TwoFieldSpace,
    cut_two_field_space,
    fitted_two_field_space,
    full_space,
)
from .vtkio import export_mesh, write_vtk

__version__ = "0.1.0"
