"""Weak boundary conditions on the unit square.

The boundary law  eps dn(u) = kappa^-1 (u0 - u) + g  interpolates between a
Dirichlet condition (kappa = 0) and a Neumann condition (kappa = inf).
This script walks through the three discretizations of the law:

* the classic Robin weak form, whose boundary weight 1/kappa explodes for
  stiff boundaries (small kappa),
* the tempered Nitsche form, whose augmentation weight
  S_h = (kappa + h/gamma_kappa)^-1 is capped at gamma_kappa/h,
* the stabilized P0 Lagrange-multiplier form, which also exposes the
  boundary flux as an unknown.
"""

import numpy as np

from couplefem import (
    RobinParameters,
    assemble_dirichlet_nitsche,
    assemble_robin_classic,
    assemble_robin_multiplier,
    assemble_robin_nitsche,
    build_structured_mesh,
    estimate_condition,
    scalar_errors,
    solve_linear,
)
from couplefem import manufactured as mf

# --- a linear solution is reproduced exactly by every consistent form ------
lin = mf.linear_xy()
u0, g = mf.robin_data(lin, eps=1.0)
mesh = build_structured_mesh(8)
p = RobinParameters(eps=1.0, kappa=1.0, u0=u0, g=g, f=lin.f)
for name, assemble in (("classic", assemble_robin_classic),
                       ("nitsche", assemble_robin_nitsche),
                       ("multiplier", assemble_robin_multiplier)):
    u = solve_linear(assemble(mesh, p))
    err = np.max(np.abs(u[:mesh.num_vertices] - lin.u(mesh.vertices)))
    print(f"P1 exactness, {name:10s}: max error {err:.2e}")

# --- the kappa = 0 limit of the tempered form IS Nitsche's method ----------
m = mf.sin_product()
u0s, gs = mf.robin_data(m, eps=1.0)
p0 = RobinParameters(eps=1.0, kappa=0.0, gamma_kappa=10.0, u0=u0s, g=gs, f=m.f)
robin0 = assemble_robin_nitsche(mesh, p0)
nitsche = assemble_dirichlet_nitsche(mesh, gamma0=10.0, f=m.f, g=m.u)
gap = abs(robin0.matrix - nitsche.matrix).max()
print(f"\nkappa=0 matrix deviation from the Dirichlet Nitsche assembly: {gap:.1e}")

# --- sweep the compliance over sixteen decades -----------------------------
print("\ncompliance sweep at n = 16 (L2 error / condition estimate):")
mq = mf.quadratic_x()
u0q, gq = mf.robin_data(mq, eps=1.0)
print(f"{'kappa':>8} | {'classic':>22} | {'nitsche':>22} | {'multiplier':>22}")
for kappa in (1e-8, 1e-4, 1.0, 1e4, 1e8):
    row = []
    for assemble in (assemble_robin_classic, assemble_robin_nitsche,
                     assemble_robin_multiplier):
        mesh = build_structured_mesh(16)
        pk = RobinParameters(eps=1.0, kappa=kappa, u0=u0q, g=gq, f=mq.f)
        system = assemble(mesh, pk)
        u = solve_linear(system)
        e, _ = scalar_errors(mesh, u[:mesh.num_vertices], mq.u, mq.grad)
        k2 = estimate_condition(system, iters=40).kappa2
        row.append(f"{e:.2e} / {k2:9.2e}")
    print(f"{kappa:8.0e} | {row[0]:>22} | {row[1]:>22} | {row[2]:>22}")

print("""
Reading the table: the error of every form is flat across the sweep, but the
classic matrix conditioning explodes as kappa -> 0 while the tempered forms
stay put.  (As kappa -> inf all three tend to the Neumann operator, whose
smallest eigenvalue vanishes like 1/kappa -- an intrinsic property of the
boundary-value problem, not of any particular discretization.)""")
