"""Weak boundary conditions:  eps dn(u) = kappa^-1 (u0 - u) + g  on the boundary.

Three discretizations of the same boundary law plus the pure-Dirichlet
Nitsche method as the kappa = 0 special case:

* classic Robin weak form (ill-conditioned for small compliance kappa),
* a Nitsche form whose augmentation weight S_h = (kappa + h/gamma_kappa)^-1
  is tempered so it can never exceed gamma_kappa/h,
* a stabilized Lagrange-multiplier form with P0 multipliers per boundary
  facet, robust across the whole compliance range.

kappa = 0 imposes Dirichlet data u0; kappa = inf is the Neumann limit (the
resulting operators are consistent but singular up to constants, as for any
pure Neumann problem; ground one dof before solving).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assembly import SparseSystem, assemble_load, assemble_stiffness, make_system
from .coupling import (
    BOUNDARY_TAGS,
    add_boundary_rhs,
    add_coupling_bilinear,
    add_jump_stabilization,
    boundary_ops,
    boundary_pieces,
    chain_pairs,
    multiplier_columns,
)
from .mesh import Mesh
from .spaces import full_space

_ZERO = lambda x: np.zeros(len(np.atleast_2d(x)))  # noqa: E731


@dataclass
class RobinParameters:
    """Data and coefficients of the boundary law.

    ``kappa`` is the compliance (0 = Dirichlet, math.inf = Neumann) and
    ``gamma_kappa`` the free penalty parameter; the tempered augmentation
    weight per facet is S_h = (kappa + h/gamma_kappa)^-1 <= gamma_kappa/h.
    """

    eps: float = 1.0
    kappa: float = 1.0
    gamma_kappa: float = 10.0
    u0: object = None
    g: object = None
    f: object = None

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.gamma_kappa <= 0:
            raise ValueError("gamma_kappa must be positive")
        self.u0 = self.u0 or _ZERO
        self.g = self.g or _ZERO
        self.f = self.f or _ZERO

    def s_h(self, h: float) -> float:
        if math.isinf(self.kappa):
            return 0.0
        return 1.0 / (self.kappa + h / self.gamma_kappa)

    def nitsche_coefficients(self, h: float) -> tuple[float, float, float]:
        """(c_sym, c_flux, c_jump) of the tempered Nitsche form.

        c_sym = 1 - kappa S_h multiplies the flux/value cross terms,
        c_flux = kappa (1 - kappa S_h) the flux-flux term and
        c_jump = S_h the boundary penalty; all limits are algebraic:
        kappa = 0 gives (1, 0, gamma_kappa/h), kappa = inf (0, h/gamma_kappa, 0).
        """
        if math.isinf(self.kappa):
            return 0.0, h / self.gamma_kappa, 0.0
        s = self.s_h(h)
        c_sym = 1.0 - self.kappa * s
        return c_sym, self.kappa * c_sym, s

    def rhs_coefficients(self, h: float) -> tuple[float, float, float, float]:
        """(a_u0, a_g, b_u0, b_g): value and flux weights of the data terms.

        The right-hand side is  <a_u0 u0 + a_g g, v> - <b_u0 u0 + b_g g,
        eps dn v>  per facet.
        """
        if math.isinf(self.kappa):
            return 0.0, 1.0, 0.0, h / self.gamma_kappa
        s = self.s_h(h)
        c_sym = 1.0 - self.kappa * s
        return s, self.kappa * s, c_sym, self.kappa * c_sym


def assemble_dirichlet_nitsche(mesh: Mesh, eps: float = 1.0, gamma0: float = 10.0,
                               f=None, g=None, tags=None) -> SparseSystem:
    """Nitsche's method for u = g:  a(u,v) - <eps dn u, v> - <eps dn v, u>
    + gamma0 <h^-1 u, v> = (f, v) - <eps dn v, g> + gamma0 <h^-1 v, g>."""
    f = f or _ZERO
    g = g or _ZERO
    space = full_space(mesh)
    pieces = boundary_pieces(mesh, tags)
    ops = boundary_ops(mesh, space, pieces, eps)

    base = assemble_stiffness(mesh, eps)
    rows, cols, vals = [], [], []
    c_jump = np.array([gamma0 / p.h for p in pieces])
    add_coupling_bilinear(rows, cols, vals, ops, c_sym=1.0, c_flux=0.0,
                          c_jump=c_jump)
    rhs = assemble_load(mesh, f)
    add_boundary_rhs(rhs, ops, value_coef=c_jump, flux_coef=1.0, data=g)
    extra = make_system(rows, cols, vals, np.zeros(mesh.num_vertices),
                        mesh.num_vertices)
    return SparseSystem(matrix=(base.matrix + extra.matrix).tocsr(), rhs=rhs)


def assemble_robin_classic(mesh: Mesh, p: RobinParameters) -> SparseSystem:
    """Standard Robin weak form  a(u,v) + kappa^-1 <u,v> = (f,v)
    + <kappa^-1 u0 + g, v>;  requires kappa > 0 (degenerates as kappa -> 0)."""
    if p.kappa == 0:
        raise ValueError("classic Robin form is ill-posed at kappa = 0 "
                         "(use the Nitsche or multiplier form)")
    space = full_space(mesh)
    pieces = boundary_pieces(mesh)
    ops = boundary_ops(mesh, space, pieces, p.eps)

    base = assemble_stiffness(mesh, p.eps)
    rhs = assemble_load(mesh, p.f)
    if math.isinf(p.kappa):
        return SparseSystem(matrix=base.matrix, rhs=rhs)

    rows, cols, vals = [], [], []
    kinv = 1.0 / p.kappa
    add_coupling_bilinear(rows, cols, vals, ops, c_sym=0.0, c_flux=0.0,
                          c_jump=kinv)
    add_boundary_rhs(rhs, ops, value_coef=kinv, flux_coef=0.0, data=p.u0)
    add_boundary_rhs(rhs, ops, value_coef=1.0, flux_coef=0.0, data=p.g)
    extra = make_system(rows, cols, vals, np.zeros(mesh.num_vertices),
                        mesh.num_vertices)
    return SparseSystem(matrix=(base.matrix + extra.matrix).tocsr(), rhs=rhs)


def assemble_robin_nitsche(mesh: Mesh, p: RobinParameters) -> SparseSystem:
    """Tempered Nitsche form of the general boundary condition.

    Identical, term by term, to the Dirichlet Nitsche system at kappa = 0
    (with gamma0 = gamma_kappa and g = u0) and to a consistent Neumann form
    at kappa = inf.
    """
    space = full_space(mesh)
    pieces = boundary_pieces(mesh)
    ops = boundary_ops(mesh, space, pieces, p.eps)

    coeffs = np.array([p.nitsche_coefficients(pc.h) for pc in pieces])
    rcoef = np.array([p.rhs_coefficients(pc.h) for pc in pieces])

    base = assemble_stiffness(mesh, p.eps)
    rows, cols, vals = [], [], []
    add_coupling_bilinear(rows, cols, vals, ops, c_sym=coeffs[:, 0],
                          c_flux=coeffs[:, 1], c_jump=coeffs[:, 2])
    rhs = assemble_load(mesh, p.f)
    add_boundary_rhs(rhs, ops, value_coef=rcoef[:, 0], flux_coef=rcoef[:, 2],
                     data=p.u0)
    add_boundary_rhs(rhs, ops, value_coef=rcoef[:, 1], flux_coef=rcoef[:, 3],
                     data=p.g)
    extra = make_system(rows, cols, vals, np.zeros(mesh.num_vertices),
                        mesh.num_vertices)
    return SparseSystem(matrix=(base.matrix + extra.matrix).tocsr(), rhs=rhs)


def assemble_robin_multiplier(mesh: Mesh, p: RobinParameters,
                              stab_weight: float = 1e-2) -> SparseSystem:
    """Robust saddle form with a P0 multiplier per boundary facet.

    The multiplier approximates the boundary flux eps dn u.  P1 x P0 on a
    matching trace mesh is not assumed inf-sup stable, so the multiplier
    block carries the face-jump stabilization j(.,.) (point jumps along
    each side of the square; corners separate the polylines, so fluxes may
    jump there freely).
    """
    space = full_space(mesh)
    pieces = boundary_pieces(mesh)
    ops = boundary_ops(mesh, space, pieces, p.eps)
    n_p = space.ndof
    n_m = len(pieces)

    coeffs = np.array([p.nitsche_coefficients(pc.h) for pc in pieces])
    rcoef = np.array([p.rhs_coefficients(pc.h) for pc in pieces])
    c_b = coeffs[:, 0]          # 1 - kappa S_h, the multiplier coupling
    c_mm = coeffs[:, 1]         # kappa (1 - kappa S_h), the multiplier mass

    base = assemble_stiffness(mesh, p.eps)
    rows, cols, vals = [], [], []
    rows.extend(base.matrix.tocoo().row)
    cols.extend(base.matrix.tocoo().col)
    vals.extend(base.matrix.tocoo().data)
    # penalty <S_h u, v>
    add_coupling_bilinear(rows, cols, vals, ops, c_sym=0.0, c_flux=0.0,
                          c_jump=coeffs[:, 2])

    bcols = multiplier_columns(ops)
    for i, op in enumerate(ops):
        mdof = n_p + i
        for dof, val in zip(op.dofs, -c_b[i] * bcols[i]):
            rows.append(dof)
            cols.append(mdof)
            vals.append(val)
            rows.append(mdof)
            cols.append(dof)
            vals.append(val)
        rows.append(mdof)
        cols.append(mdof)
        vals.append(-c_mm[i] * pieces[i].h)

    groups = [[i for i, pc in enumerate(pieces) if pc.tag == t]
              for t in BOUNDARY_TAGS]
    pairs = chain_pairs(pieces, groups)
    add_jump_stabilization(rows, cols, vals, pairs, stab_weight, offset=n_p)

    rhs = np.zeros(n_p + n_m)
    rhs[:n_p] = assemble_load(mesh, p.f)
    add_boundary_rhs(rhs[:n_p], ops, value_coef=rcoef[:, 0], flux_coef=0.0,
                     data=p.u0)
    add_boundary_rhs(rhs[:n_p], ops, value_coef=rcoef[:, 1], flux_coef=0.0,
                     data=p.g)
    # multiplier rows: -(1 - kappa S_h)<u0, mu> - kappa (1 - kappa S_h)<g, mu>,
    # with the kappa = inf limit of the second coefficient being h/gamma_kappa
    for i, op in enumerate(ops):
        u0v = np.asarray(p.u0(op.qp_x), dtype=float)
        gv = np.asarray(p.g(op.qp_x), dtype=float)
        rhs[n_p + i] -= c_b[i] * float(op.qp_w @ u0v)
        rhs[n_p + i] -= c_mm[i] * float(op.qp_w @ gv)
    return make_system(rows, cols, vals, rhs, n_p + n_m,
                       block_structure=(n_p, n_m))
