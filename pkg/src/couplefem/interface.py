"""Fitted interface coupling for Poisson with discontinuous diffusivity.

Two fields, one per subdomain, are tied weakly over the interface.  The
Nitsche method uses weighted averages of the fluxes; the harmonic-robust
weights w1 = eps2/(eps1+eps2), w2 = eps1/(eps1+eps2) together with the
penalty scale omega = 2 eps1 eps2 / (eps1 + eps2) make the energy error
uniform in the contrast.  The multiplier method keeps the interface flux as
an unknown (P0 per facet, lambda ~ minus the weighted flux average) and may
be stabilized with a point-jump penalty on the multiplier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import SparseSystem, make_system
from .coupling import (
    add_coupling_bilinear,
    add_flux_datum_rhs,
    add_jump_stabilization,
    chain_pairs,
    fitted_interface_pieces,
    interface_ops,
    multiplier_columns,
    scatter,
    twofield_load,
    twofield_volume_entries,
)
from .mesh import Mesh, InterfaceTopology
from .spaces import TwoFieldSpace, dirichlet_dofs_twofield, fitted_two_field_space

_ZERO = lambda x: np.zeros(len(np.atleast_2d(x)))  # noqa: E731


@dataclass(frozen=True)
class WeightScheme:
    """Averaging weights (w1 + w2 = 1) and the interface penalty scale.

    The Nitsche penalty on a piece is gamma0 / h * gamma_scale.  Modes:
    "arithmetic" (plain averages, penalty follows the stiff side),
    "harmonic-robust" (contrast-robust weights, penalty scale omega), and
    "geometric-cut" (per-cut-element area fractions, penalty scale 1).
    """

    mode: str
    w1: float
    w2: float
    omega: float
    gamma_scale: float

    @classmethod
    def arithmetic(cls, eps1: float, eps2: float) -> "WeightScheme":
        return cls("arithmetic", 0.5, 0.5,
                   2.0 * eps1 * eps2 / (eps1 + eps2), max(eps1, eps2))

    @classmethod
    def harmonic_robust(cls, eps1: float, eps2: float) -> "WeightScheme":
        om = 2.0 * eps1 * eps2 / (eps1 + eps2)
        return cls("harmonic-robust", eps2 / (eps1 + eps2),
                   eps1 / (eps1 + eps2), om, om)

    @classmethod
    def geometric_cut(cls) -> "WeightScheme":
        return cls("geometric-cut", 0.5, 0.5, 1.0, 1.0)


@dataclass
class InterfaceData:
    """Problem data: flux-jump datum g, source f, diffusivities, penalties."""

    eps1: float = 1.0
    eps2: float = 1.0
    gamma0: float = 100.0
    stab_weight: float = 1e-2
    g: object = None
    f: object = None

    def __post_init__(self):
        if self.eps1 <= 0 or self.eps2 <= 0:
            raise ValueError("diffusivities must be positive")
        if self.gamma0 <= 0:
            raise ValueError("gamma0 must be positive")
        self.g = self.g or _ZERO
        self.f = self.f or _ZERO


def jump_and_average(topo: InterfaceTopology, facet_id: int,
                     u_left: float, u_right: float, w: WeightScheme):
    """(jump, average, conjugate average) of a pair of interface traces."""
    if int(facet_id) not in set(int(f) for f in topo.facet_ids):
        raise ValueError(f"facet {facet_id} is not part of the fitted interface")
    jump = u_left - u_right
    avg = w.w1 * u_left + w.w2 * u_right
    conj = w.w2 * u_left + w.w1 * u_right
    return jump, avg, conj


def _setup(mesh, topo, d, w, dirichlet_tags, dirichlet_values):
    space = fitted_two_field_space(mesh)
    pieces = fitted_interface_pieces(mesh, topo, w.w1, w.w2)
    ops = interface_ops(mesh, space, pieces, d.eps1, d.eps2)
    v1, v2 = dirichlet_values if dirichlet_values else (None, None)
    bc = dirichlet_dofs_twofield(space, dirichlet_tags, v1, v2)
    return space, pieces, ops, bc


def assemble_nitsche_interface(mesh: Mesh, topo: InterfaceTopology,
                               d: InterfaceData, w: WeightScheme,
                               dirichlet_tags=None,
                               dirichlet_values=None) -> tuple[SparseSystem, TwoFieldSpace]:
    """Weighted-average interface Nitsche method.

    a(u,v) - <avg flux(u), [v]> - <[u], avg flux(v)> + gamma <[u],[v]>
    = (f,v) + <g, conjugate-avg(v)>, with gamma = gamma0/h * gamma_scale.
    Zero Dirichlet data is imposed strongly on the outer boundary unless
    ``dirichlet_values`` provides (trace1, trace2) callables.
    """
    space, pieces, ops, bc = _setup(mesh, topo, d, w, dirichlet_tags,
                                    dirichlet_values)
    rows, cols, vals = twofield_volume_entries(mesh, space, d.eps1, d.eps2)
    gamma = np.array([d.gamma0 / p.h * w.gamma_scale for p in pieces])
    add_coupling_bilinear(rows, cols, vals, ops, c_sym=1.0, c_flux=0.0,
                          c_jump=gamma)
    rhs = twofield_load(mesh, space, d.f)
    add_flux_datum_rhs(rhs, ops, d.g)
    system = make_system(rows, cols, vals, rhs, space.ndof).with_dirichlet(*bc)
    return system, space


def assemble_multiplier_interface(mesh: Mesh, topo: InterfaceTopology,
                                  d: InterfaceData, stabilize: bool = True,
                                  w: WeightScheme | None = None,
                                  dirichlet_tags=None,
                                  dirichlet_values=None) -> tuple[SparseSystem, TwoFieldSpace]:
    """Augmented Lagrangian saddle form with a P0 multiplier per facet.

    a(u,v) + <lambda + gamma [u], [v]> = (f,v) + <g, conjugate-avg(v)>
    <[u], mu> - j(lambda, mu) = 0
    with j the point-jump stabilization over interior trace vertices
    (skipped when ``stabilize`` is False; the unstabilized P1 x P0 pair is
    not inf-sup stable).
    """
    if w is None:
        w = WeightScheme.harmonic_robust(d.eps1, d.eps2)
    space, pieces, ops, bc = _setup(mesh, topo, d, w, dirichlet_tags,
                                    dirichlet_values)
    n_p = space.ndof
    n_m = len(pieces)

    rows, cols, vals = twofield_volume_entries(mesh, space, d.eps1, d.eps2)
    gamma = np.array([d.gamma0 / p.h * w.gamma_scale for p in pieces])
    add_coupling_bilinear(rows, cols, vals, ops, c_sym=0.0, c_flux=0.0,
                          c_jump=gamma)
    bcols = multiplier_columns(ops)
    for i, op in enumerate(ops):
        mdof = n_p + i
        for dof, val in zip(op.dofs, bcols[i]):
            rows.extend((dof, mdof))
            cols.extend((mdof, dof))
            vals.extend((val, val))
    if stabilize:
        pairs = chain_pairs(pieces)
        add_jump_stabilization(rows, cols, vals, pairs, d.stab_weight,
                               offset=n_p)

    rhs = np.zeros(n_p + n_m)
    rhs[:n_p] = twofield_load(mesh, space, d.f)
    add_flux_datum_rhs(rhs[:n_p], ops, d.g)
    system = make_system(rows, cols, vals, rhs, n_p + n_m,
                         block_structure=(n_p, n_m)).with_dirichlet(*bc)
    return system, space


def substitution_nitsche_matrix(mesh: Mesh, topo: InterfaceTopology,
                                d: InterfaceData, w: WeightScheme):
    """Nitsche matrix rebuilt by eliminating the multiplier by hand.

    Substitutes lambda = -<<eps dn u>> into the multiplier kernels (coupling
    columns contracted with the flux rows); must reproduce the directly
    assembled Nitsche matrix, which validates that both assemblies realize
    the same augmented Lagrangian.
    """
    space = fitted_two_field_space(mesh)
    pieces = fitted_interface_pieces(mesh, topo, w.w1, w.w2)
    ops = interface_ops(mesh, space, pieces, d.eps1, d.eps2)
    rows, cols, vals = twofield_volume_entries(mesh, space, d.eps1, d.eps2)
    gamma = np.array([d.gamma0 / p.h * w.gamma_scale for p in pieces])
    add_coupling_bilinear(rows, cols, vals, ops, c_sym=0.0, c_flux=0.0,
                          c_jump=gamma)
    bcols = multiplier_columns(ops)
    for i, op in enumerate(ops):
        # <lambda, [v]> with lambda = -flux_row . u, plus the transpose
        m = -np.outer(bcols[i], op.row_flux)
        scatter(rows, cols, vals, op.dofs, m + m.T)
    return make_system(rows, cols, vals, np.zeros(space.ndof), space.ndof).matrix
