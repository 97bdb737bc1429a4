"""Unfitted discretization: cut cells, ghost penalty, conditioning.

The geometry is a level set over a fixed background mesh; elements crossed
by the zero set are integrated over their clipped polygons and the boundary
condition is imposed weakly on the reconstructed segments.  The ghost
penalty acts on the gradient jumps across the faces around the cut band and
makes accuracy and conditioning independent of how the interface slices the
mesh -- including pathological slivers.
"""

import math

from couplefem import (
    GhostPenaltyConfig,
    LevelSet,
    assemble_cut_poisson,
    build_structured_mesh,
    classify_cut,
    scalar_errors,
    solve_linear,
)
from couplefem import manufactured as mf
from couplefem.cli import cut_conditioning_study

# --- convergence on a disk, Dirichlet data on the unfitted boundary --------
r0 = 0.74
m = mf.radial_disk(r0)
print(f"cut Poisson on the disk of radius {r0} (quarter inside the square):")
prev = None
for n in (16, 32, 64):
    mesh = build_structured_mesh(n)
    cls = classify_cut(mesh, LevelSet.half_circle(r0))
    gp = GhostPenaltyConfig.from_classification(cls, gamma_g=0.1)
    system, space = assemble_cut_poisson(mesh, cls, gamma0=10.0, cfg=gp, f=m.f)
    u = solve_linear(system)
    l2, _ = scalar_errors(mesh, u, m.u, m.grad, space=space, cls=cls)
    rate = "" if prev is None else f"  L2 order {math.log2(prev / l2):.2f}"
    print(f"  n={n:3d}: {len(cls.cut_elements):4d} cut cells, "
          f"L2 error {l2:.3e}{rate}")
    prev = l2

# --- conditioning versus cut position ---------------------------------------
print("\nvertical cut at x = 0.5 + delta on n = 16 "
      "(condition estimates with / without ghost penalty):")
offsets = [10.0 ** -k for k in range(1, 9)]
report = cut_conditioning_study(16, offsets, gamma_g=0.1, gamma0=10.0)
for k, delta in enumerate(offsets):
    print(f"  delta={delta:7.0e}: with {report.kappa2_with[k]:9.3e}   "
          f"without {report.kappa2_without[k]:9.3e}")
print(f"\nwith the penalty the spread over the sweep is a factor "
      f"{report.kappa2_with.max() / report.kappa2_with.min():.1f}; without it "
      f"the sliver cut costs {report.kappa2_without[-1] / report.kappa2_without[0]:.1e}x.")
