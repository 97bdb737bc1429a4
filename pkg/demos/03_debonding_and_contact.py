"""Debonding (cohesive) interface laws and one-sided contact.

The linear bond law  [u] = -kappa <<eps dn u>>  lets the two sides separate
in proportion to the transmitted traction.  The naive penalty 1/kappa is
ill-conditioned for stiff bonds; the tempered weight S_h caps it.  Adding
the non-penetration constraint  [u] <= 0  turns the problem into a
complementarity system solved by a semismooth Newton method whose two
limiting regimes are linear: full contact (the tied Nitsche system) and no
contact (the cohesive system).
"""

import numpy as np

from couplefem import (
    AdhesionParameters,
    assemble_cohesive,
    assemble_stiff_penalty,
    build_structured_mesh,
    estimate_condition,
    fit_interface_line,
    solve_adhesive_contact,
    solve_boundary_contact,
    solve_linear,
    verify_kkt,
)
from couplefem import manufactured as mf

mesh = build_structured_mesh(8)
topo = fit_interface_line(mesh, 0.5)


def neumann(v):
    return (("right",), lambda p: np.full(len(np.atleast_2d(p)), float(v)))


# --- the bond law, reproduced exactly for a piecewise-linear solution ------
kappa = 0.5
bond = mf.bond_pair(kappa)
p = AdhesionParameters(kappa=kappa, gamma_kappa=100.0)
system, space = assemble_cohesive(mesh, topo, p, dirichlet_tags=("left",),
                                  neumann=neumann(1.0))
u = solve_linear(system)
exact = np.concatenate([bond.extras["u1"](mesh.vertices[space.space1.dof_to_vert]),
                        bond.extras["u2"](mesh.vertices[space.space2.dof_to_vert])])
print(f"cohesive bond law, piecewise-linear test: max error "
      f"{np.max(np.abs(u - exact)):.2e}  (jump = -kappa = {-kappa})")

# --- tempered versus naive penalty: conditioning at a stiff bond -----------
for kap in (1.0, 1e-8):
    pk = AdhesionParameters(kappa=kap, gamma_kappa=100.0)
    naive, _ = assemble_stiff_penalty(mesh, topo, pk)
    temp, _ = assemble_cohesive(mesh, topo, pk)
    print(f"kappa={kap:7.0e}: kappa2 naive {estimate_condition(naive).kappa2:10.3e}"
          f"   tempered {estimate_condition(temp).kappa2:10.3e}")

# --- adhesive contact: the two limiting regimes ----------------------------
for flux, label in ((1.0, "separating load (no contact)"),
                    (-1.0, "compressing load (full contact)")):
    u, space, state, report = solve_adhesive_contact(
        mesh, topo, p, dirichlet_tags=("left",), neumann=neumann(flux))
    kkt = verify_kkt(state, tol=1e-8)
    print(f"{label}: {report.iterations} Newton iterations, "
          f"{state.active.sum()}/{len(state.active)} active points, "
          f"KKT {'ok' if kkt.ok else kkt.failing()}")

# --- boundary contact against an obstacle ----------------------------------
g = lambda pts: np.full(len(np.atleast_2d(pts)), -1.0)
u, state, report = solve_boundary_contact(build_structured_mesh(16), 1.0, 10.0,
                                          g, None, contact_tags=("top",),
                                          dirichlet_tags=("bottom",))
print(f"boundary obstacle u <= -1 on the top side: max(u - g) = "
      f"{state.kkt_residuals['constraint']:.1e}, multiplier range "
      f"[{state.multiplier.min():.2f}, {state.multiplier.max():.2f}]")
