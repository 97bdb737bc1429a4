"""Cohesive (debonding) interface laws and adhesive / boundary contact.

The linear bond law  [u] = -kappa <<eps dn u>>  is discretized either
naively (stiff penalty 1/kappa, ill-conditioned for small kappa) or with
the tempered weight S_h = (h/gamma_kappa + kappa)^-1, which caps the
penalty at gamma_kappa/h.  The one-sided contact variant augments the bond
law with the Kuhn-Tucker conditions  [u] <= 0, lambda <= 0,
lambda [u] = 0  where lambda = <<eps dn u>> + kappa^-1 [u]; it is solved by
a semismooth Newton method on the max-bracket reformulation, with the
bracket evaluated at the segment quadrature points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .assembly import SparseSystem, assemble_load, assemble_stiffness, make_system
from .coupling import (
    add_coupling_bilinear,
    boundary_ops,
    boundary_pieces,
    coupling_samples,
    fitted_interface_pieces,
    interface_ops,
    scatter,
    twofield_load,
    twofield_volume_entries,
)
from .interface import WeightScheme
from .mesh import Mesh, InterfaceTopology
from .solvers import semismooth_newton, solve_linear
from .spaces import dirichlet_dofs_twofield, fitted_two_field_space, full_space

_ZERO = lambda x: np.zeros(len(np.atleast_2d(x)))  # noqa: E731

_NEWTON_DEFAULTS = {"tol": 1e-10, "max_iter": 30}


@dataclass
class AdhesionParameters:
    """Bond compliance kappa and the tempered penalty machinery.

    Per facet of length h:  S_h = (h/gamma_kappa + kappa)^-1,
    gamma = gamma_kappa/h + 1/kappa (contact) and gamma1 = kappa +
    h/gamma_kappa; S_h * gamma1 = 1 by construction.
    """

    kappa: float = 0.5
    gamma_kappa: float = 100.0
    eps1: float = 1.0
    eps2: float = 1.0
    f: object = None

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.gamma_kappa <= 0:
            raise ValueError("gamma_kappa must be positive")
        self.f = self.f or _ZERO

    def s_h(self, h: float) -> float:
        if math.isinf(self.kappa):
            return 0.0
        return 1.0 / (self.kappa + h / self.gamma_kappa)

    def gamma1(self, h: float) -> float:
        return self.kappa + h / self.gamma_kappa

    def gamma(self, h: float) -> float:
        if self.kappa <= 0:
            raise ValueError("contact gamma needs kappa > 0")
        return self.gamma_kappa / h + 1.0 / self.kappa

    def cohesive_coefficients(self, h: float) -> tuple[float, float, float]:
        """(c_sym, c_flux, c_jump); algebraic limits at kappa = 0 and inf."""
        if math.isinf(self.kappa):
            return 0.0, h / self.gamma_kappa, 0.0
        s = self.s_h(h)
        c_sym = 1.0 - self.kappa * s
        return c_sym, self.kappa * c_sym, s


@dataclass
class ContactState:
    """Quadrature-point record of a contact solve.

    ``multiplier`` is the reconstruction lambda = <<eps dn u>> +
    kappa^-1 [u] for interface contact, and the projected
    -gamma [gap - gamma^-1 eps dn u]_+ for boundary contact.
    """

    x: np.ndarray
    gap: np.ndarray           # [u] at the quadrature points (or u - g)
    multiplier: np.ndarray
    active: np.ndarray
    piece: np.ndarray
    kkt_residuals: dict = field(default_factory=dict)

    def compute_kkt(self):
        lam_jump = self.multiplier * self.gap
        self.kkt_residuals = {
            "constraint": float(np.max(self.gap, initial=0.0)),
            "multiplier_sign": float(np.max(self.multiplier, initial=0.0)),
            "complementarity": float(np.max(np.abs(lam_jump), initial=0.0)),
        }
        return self


@dataclass
class KktCondition:
    name: str
    violation: float
    location: tuple[float, float]
    passed: bool


@dataclass
class KktReport:
    conditions: list[KktCondition]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failing(self) -> list[str]:
        return [c.name for c in self.conditions if not c.passed]


def verify_kkt(state: ContactState, tol: float = 1e-8) -> KktReport:
    """Check the three Kuhn-Tucker conditions pointwise at quadrature points."""
    def worst(values):
        idx = int(np.argmax(values)) if len(values) else 0
        loc = tuple(state.x[idx]) if len(values) else (np.nan, np.nan)
        return float(np.max(values, initial=0.0)), loc

    conds = []
    v, loc = worst(state.gap)
    conds.append(KktCondition("constraint", max(v, 0.0), loc, v <= tol))
    v, loc = worst(state.multiplier)
    conds.append(KktCondition("multiplier_sign", max(v, 0.0), loc, v <= tol))
    v, loc = worst(np.abs(state.multiplier * state.gap))
    conds.append(KktCondition("complementarity", v, loc, v <= tol))
    return KktReport(conds)


def _apply_neumann(mesh, space, rhs, neumann):
    """rhs += <g_N, v> over tagged outer boundary facets (fitted layout)."""
    if neumann is None:
        return
    tags, g_n = neumann
    for p in boundary_pieces(mesh, tags):
        fld = int(mesh.subdomain_tags[p.tri])
        ops = boundary_ops(mesh, space.space1 if fld == 1 else space.space2,
                           [p], 1.0)
        op = ops[0]
        dofs = op.dofs if fld == 1 else op.dofs + space.offset
        gv = np.asarray(g_n(op.qp_x), dtype=float)
        rhs[dofs] += op.rows_val.T @ (op.qp_w * gv)


def assemble_stiff_penalty(mesh: Mesh, topo: InterfaceTopology,
                           p: AdhesionParameters, dirichlet_tags=None,
                           neumann=None):
    """Naive bond coupling  a(u,v) + kappa^-1 <[u],[v]>  (for comparison).

    SPD but ill-conditioned for small kappa; kappa = inf decouples the
    subdomains entirely.
    """
    if p.kappa == 0:
        raise ValueError("stiff penalty needs kappa > 0")
    space = fitted_two_field_space(mesh)
    pieces = fitted_interface_pieces(mesh, topo, 0.5, 0.5)
    ops = interface_ops(mesh, space, pieces, p.eps1, p.eps2)
    rows, cols, vals = twofield_volume_entries(mesh, space, p.eps1, p.eps2)
    s = 0.0 if math.isinf(p.kappa) else 1.0 / p.kappa
    add_coupling_bilinear(rows, cols, vals, ops, c_sym=0.0, c_flux=0.0,
                          c_jump=s)
    rhs = twofield_load(mesh, space, p.f)
    _apply_neumann(mesh, space, rhs, neumann)
    bc = dirichlet_dofs_twofield(space, dirichlet_tags)
    system = make_system(rows, cols, vals, rhs, space.ndof).with_dirichlet(*bc)
    return system, space


def assemble_cohesive(mesh: Mesh, topo: InterfaceTopology,
                      p: AdhesionParameters, w: WeightScheme | None = None,
                      dirichlet_tags=None, neumann=None):
    """Tempered Nitsche discretization of the linear bond law.

    At kappa = 0 the matrix coincides entrywise with the interface Nitsche
    matrix at gamma = gamma_kappa/h; at kappa = inf the only surviving
    coupling is -(h/gamma_kappa) <avg flux(u), avg flux(v)>.
    """
    if w is None:
        w = WeightScheme.arithmetic(p.eps1, p.eps2)
    space = fitted_two_field_space(mesh)
    pieces = fitted_interface_pieces(mesh, topo, w.w1, w.w2)
    ops = interface_ops(mesh, space, pieces, p.eps1, p.eps2)
    coeffs = np.array([p.cohesive_coefficients(pc.h) for pc in pieces])
    rows, cols, vals = twofield_volume_entries(mesh, space, p.eps1, p.eps2)
    add_coupling_bilinear(rows, cols, vals, ops, c_sym=coeffs[:, 0],
                          c_flux=coeffs[:, 1], c_jump=coeffs[:, 2])
    rhs = twofield_load(mesh, space, p.f)
    _apply_neumann(mesh, space, rhs, neumann)
    bc = dirichlet_dofs_twofield(space, dirichlet_tags)
    system = make_system(rows, cols, vals, rhs, space.ndof).with_dirichlet(*bc)
    return system, space


def _interface_contact_core(space, ops, volume_triplets, rhs_full, p,
                            dirichlet, newton):
    """Semismooth Newton on the augmented contact residual (interface case).

    Residual against v:  a(u,v) + kappa^-1 <[u],[v]>
    + gamma <[(1 - (gamma kappa)^-1)[u] - gamma^-1 avg]_+ , same(v)>
    - gamma^-1 <avg(u) + kappa^-1 [u], avg(v) + kappa^-1 [v]>  - (f, v),
    with gamma = gamma_kappa/h + 1/kappa per piece.
    """
    opts = dict(_NEWTON_DEFAULTS, **(newton or {}))
    n = space.ndof
    rows, cols, vals = list(volume_triplets[0]), list(volume_triplets[1]), \
        list(volume_triplets[2])
    kinv = 1.0 / p.kappa

    qp_rows_P, qp_rows_R, qp_w, qp_gamma, qp_dofs = [], [], [], [], []
    for op in ops:
        gm = p.gamma(op.piece.h)
        for q in range(len(op.qp_w)):
            J = op.rows_val[q]
            R = op.row_flux + kinv * J
            qp_rows_P.append(J - R / gm)
            qp_rows_R.append(R)
            qp_w.append(op.qp_w[q])
            qp_gamma.append(gm)
            qp_dofs.append(op.dofs)

    # linear part: volume + kappa^-1 jump mass - gamma^-1 R x R
    for J, R, wq, gm, dofs in zip(_qp_jump_rows(ops), qp_rows_R, qp_w,
                                  qp_gamma, qp_dofs):
        local = wq * kinv * np.outer(J, J) - (wq / gm) * np.outer(R, R)
        scatter(rows, cols, vals, dofs, local)

    M_lin = make_system(rows, cols, vals, np.zeros(n), n).matrix
    cdofs, cvals = dirichlet
    free = np.setdiff1d(np.arange(n), cdofs)
    x_fix = np.zeros(n)
    x_fix[cdofs] = cvals

    def full(xf):
        x = x_fix.copy()
        x[free] = xf
        return x

    def residual(xf):
        x = full(xf)
        r = M_lin @ x - rhs_full
        for Pr, wq, gm, dofs in zip(qp_rows_P, qp_w, qp_gamma, qp_dofs):
            b = Pr @ x[dofs]
            if b > 0:
                r[dofs] += (wq * gm * b) * Pr
        return r[free]

    def jacobian(xf):
        x = full(xf)
        jr, jc, jv = [], [], []
        jm = M_lin.tocoo()
        jr.extend(jm.row)
        jc.extend(jm.col)
        jv.extend(jm.data)
        for Pr, wq, gm, dofs in zip(qp_rows_P, qp_w, qp_gamma, qp_dofs):
            if Pr @ x[dofs] > 0:
                scatter(jr, jc, jv, dofs, (wq * gm) * np.outer(Pr, Pr))
        J = make_system(jr, jc, jv, np.zeros(n), n).matrix.tocsc()
        return J[free][:, free]

    def active(xf):
        x = full(xf)
        return np.array([Pr @ x[dofs] > 0
                         for Pr, dofs in zip(qp_rows_P, qp_dofs)])

    # initial guess: the all-active (full contact) linear problem
    jr, jc, jv = [], [], []
    jm = M_lin.tocoo()
    jr.extend(jm.row)
    jc.extend(jm.col)
    jv.extend(jm.data)
    for Pr, wq, gm, dofs in zip(qp_rows_P, qp_w, qp_gamma, qp_dofs):
        scatter(jr, jc, jv, dofs, (wq * gm) * np.outer(Pr, Pr))
    sys0 = make_system(jr, jc, jv, rhs_full, n).with_dirichlet(cdofs, cvals)
    x0 = solve_linear(sys0)

    xf, report = semismooth_newton(residual, jacobian, x0[free],
                                   tol=opts["tol"], max_iter=opts["max_iter"],
                                   active_set=active)
    return full(xf), report


def _qp_jump_rows(ops):
    for op in ops:
        for q in range(len(op.qp_w)):
            yield op.rows_val[q]


def solve_adhesive_contact(mesh: Mesh, topo: InterfaceTopology,
                           p: AdhesionParameters, w: WeightScheme | None = None,
                           newton=None, dirichlet_tags=None, neumann=None):
    """Adhesive contact on a fitted interface; see _interface_contact_core."""
    if w is None:
        w = WeightScheme.arithmetic(p.eps1, p.eps2)
    space = fitted_two_field_space(mesh)
    pieces = fitted_interface_pieces(mesh, topo, w.w1, w.w2)
    ops = interface_ops(mesh, space, pieces, p.eps1, p.eps2)
    triplets = twofield_volume_entries(mesh, space, p.eps1, p.eps2)
    rhs = twofield_load(mesh, space, p.f)
    _apply_neumann(mesh, space, rhs, neumann)
    bc = dirichlet_dofs_twofield(space, dirichlet_tags)
    u, report = _interface_contact_core(space, ops, triplets, rhs, p, bc, newton)
    state = contact_state_from_ops(ops, u, p)
    return u, space, state, report


def contact_state_from_ops(ops, u, p: AdhesionParameters) -> ContactState:
    """Quadrature-point state of an interface contact solution."""
    s = coupling_samples(ops, u)
    kinv = 1.0 / p.kappa
    lam = s["flux"] + kinv * s["val"]
    active = []
    for op in ops:
        gm = p.gamma(op.piece.h)
        ui = u[op.dofs]
        for q in range(len(op.qp_w)):
            J = op.rows_val[q]
            R = op.row_flux + kinv * J
            active.append(float((J - R / gm) @ ui) > 0)
    return ContactState(x=s["x"], gap=s["val"], multiplier=lam,
                        active=np.asarray(active), piece=s["piece"]).compute_kkt()


def solve_boundary_contact(mesh: Mesh, eps: float = 1.0, gamma0: float = 10.0,
                           g=None, f=None, newton=None,
                           contact_tags=("top",), dirichlet_tags=("bottom",)):
    """One-sided boundary contact u <= g via the nonlinear Nitsche residual.

    a(u,v) + <gamma [u - g - gamma^-1 eps dn u]_+ , v - gamma^-1 eps dn v>
    - <gamma^-1 eps dn u, eps dn v> = (f, v),  gamma = gamma0 eps / h.
    Homogeneous Dirichlet on ``dirichlet_tags``, natural elsewhere.
    """
    g = g or _ZERO
    f = f or _ZERO
    opts = dict(_NEWTON_DEFAULTS, **(newton or {}))
    space = full_space(mesh)
    pieces = boundary_pieces(mesh, contact_tags)
    ops = boundary_ops(mesh, space, pieces, eps)
    n = space.ndof

    base = assemble_stiffness(mesh, eps)
    rhs_full = assemble_load(mesh, f)
    cdofs = space.dofs_on_vertices(mesh.boundary_vertices(dirichlet_tags))
    cvals = np.zeros(len(cdofs))
    free = np.setdiff1d(np.arange(n), cdofs)

    qp = []
    for op in ops:
        gm = gamma0 * eps / op.piece.h
        for q in range(len(op.qp_w)):
            N = op.rows_val[q]
            FR = op.row_flux
            gv = float(np.asarray(g(op.qp_x[q:q + 1]), dtype=float)[0])
            qp.append((N - FR / gm, FR, gv, op.qp_w[q], gm, op.dofs, op.qp_x[q]))

    rows, cols, vals = [], [], []
    co = base.matrix.tocoo()
    rows.extend(co.row)
    cols.extend(co.col)
    vals.extend(co.data)
    for Pr, FR, gv, wq, gm, dofs, _x in qp:
        scatter(rows, cols, vals, dofs, -(wq / gm) * np.outer(FR, FR))
    M_lin = make_system(rows, cols, vals, np.zeros(n), n).matrix

    def full(xf):
        x = np.zeros(n)
        x[free] = xf
        return x

    def bracket(x):
        return [(Pr @ x[dofs] - gv, Pr, wq, gm, dofs)
                for Pr, FR, gv, wq, gm, dofs, _x in qp]

    def residual(xf):
        x = full(xf)
        r = M_lin @ x - rhs_full
        for b, Pr, wq, gm, dofs in bracket(x):
            if b > 0:
                r[dofs] += (wq * gm * b) * Pr
        return r[free]

    def jacobian(xf):
        x = full(xf)
        jr, jc, jv = [], [], []
        co2 = M_lin.tocoo()
        jr.extend(co2.row)
        jc.extend(co2.col)
        jv.extend(co2.data)
        for b, Pr, wq, gm, dofs in bracket(x):
            if b > 0:
                scatter(jr, jc, jv, dofs, (wq * gm) * np.outer(Pr, Pr))
        return make_system(jr, jc, jv, np.zeros(n), n).matrix.tocsc()[free][:, free]

    def active(xf):
        x = full(xf)
        return np.array([b > 0 for b, *_ in bracket(x)])

    jr, jc, jv = [], [], []
    co2 = M_lin.tocoo()
    jr.extend(co2.row)
    jc.extend(co2.col)
    jv.extend(co2.data)
    rhs0 = rhs_full.copy()
    for Pr, FR, gv, wq, gm, dofs, _x in qp:
        scatter(jr, jc, jv, dofs, (wq * gm) * np.outer(Pr, Pr))
        rhs0[dofs] += (wq * gm * gv) * Pr
    sys0 = SparseSystem(
        matrix=make_system(jr, jc, jv, rhs0, n).matrix, rhs=rhs0,
    ).with_dirichlet(cdofs, cvals)
    x0 = solve_linear(sys0)

    xf, report = semismooth_newton(residual, jacobian, x0[free],
                                   tol=opts["tol"], max_iter=opts["max_iter"],
                                   active_set=active)
    u = full(xf)

    gaps, lams, act, xs, pid = [], [], [], [], []
    i = 0
    for op in ops:
        gm = gamma0 * eps / op.piece.h
        ui = u[op.dofs]
        for q in range(len(op.qp_w)):
            trace = float(op.rows_val[q] @ ui)
            gv = float(np.asarray(g(op.qp_x[q:q + 1]), dtype=float)[0])
            b = trace - gv - float(op.row_flux @ ui) / gm
            gaps.append(trace - gv)
            lams.append(-gm * max(b, 0.0))
            act.append(b > 0)
            xs.append(op.qp_x[q])
            pid.append(i)
        i += 1
    state = ContactState(x=np.asarray(xs), gap=np.asarray(gaps),
                         multiplier=np.asarray(lams),
                         active=np.asarray(act),
                         piece=np.asarray(pid, dtype=np.int64)).compute_kkt()
    return u, state, report
