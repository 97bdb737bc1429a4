"""Manufactured solutions used by the studies and the test suite.

All callables take (m, 2) point arrays.  Interface families come as pairs
(one field per subdomain) with matching traces and continuous flux, so the
interface data g vanishes unless stated otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Manufactured:
    u: object
    grad: object
    f: object
    extras: dict = field(default_factory=dict)


def sin_product() -> Manufactured:
    """u = sin(pi x) sin(pi y), zero trace on the unit square."""
    def u(p):
        return np.sin(np.pi * p[:, 0]) * np.sin(np.pi * p[:, 1])

    def grad(p):
        sx, cx = np.sin(np.pi * p[:, 0]), np.cos(np.pi * p[:, 0])
        sy, cy = np.sin(np.pi * p[:, 1]), np.cos(np.pi * p[:, 1])
        return np.pi * np.column_stack([cx * sy, sx * cy])

    def f(p):
        return 2.0 * np.pi ** 2 * u(p)

    return Manufactured(u=u, grad=grad, f=f)


def linear_xy(a: float = 1.0, b: float = 1.0, c: float = 0.0) -> Manufactured:
    """u = a x + b y + c (harmonic, reproduced exactly by P1)."""
    def u(p):
        return a * p[:, 0] + b * p[:, 1] + c

    def grad(p):
        return np.tile([a, b], (len(p), 1))

    def f(p):
        return np.zeros(len(p))

    return Manufactured(u=u, grad=grad, f=f)


def quadratic_x() -> Manufactured:
    """u = x^2, f = -2.  All boundary and volume data of this solution are
    integrated exactly by the assembly rules, which keeps the large-kappa
    Robin sweeps free of quadrature-incompatibility amplification."""
    def u(p):
        return p[:, 0] ** 2

    def grad(p):
        return np.column_stack([2.0 * p[:, 0], np.zeros(len(p))])

    def f(p):
        return np.full(len(p), -2.0)

    return Manufactured(u=u, grad=grad, f=f)


def square_normal(p: np.ndarray) -> np.ndarray:
    """Outward unit normal of the unit square at boundary points."""
    n = np.zeros_like(p)
    n[np.abs(p[:, 0]) < 1e-12, 0] = -1.0
    n[np.abs(p[:, 0] - 1.0) < 1e-12, 0] = 1.0
    n[np.abs(p[:, 1]) < 1e-12, 1] = -1.0
    n[np.abs(p[:, 1] - 1.0) < 1e-12, 1] = 1.0
    return n


def robin_data(m: Manufactured, eps: float):
    """Boundary data (u0, g) consistent with eps dn u = kappa^-1(u0 - u) + g
    for every compliance kappa:  u0 = trace of u and g = eps dn u.

    Both data stay O(1) across the whole kappa sweep, so the manufactured
    solution is the same for all kappa and no large-number cancellation
    enters the right-hand side.
    """
    def u0(p):
        return np.asarray(m.u(p))

    def g(p):
        dn = (np.asarray(m.grad(p)) * square_normal(p)).sum(axis=1)
        return eps * dn

    return u0, g


def interface_column(eps1: float, eps2: float, x0: float = 0.5) -> Manufactured:
    """Piecewise u_i = x(1-x)/eps_i (+ constant), continuous with continuous
    flux (1-2x); f = 2 on both sides, g = 0.

    extras: per-side callables u1/u2, grad1/grad2 and the Dirichlet traces
    at x = 0 (zero) and x = 1 (the matching constant c2).
    """
    c2 = 0.25 * (1.0 / eps1 - 1.0 / eps2)

    def u1(p):
        x = p[:, 0]
        return x * (1 - x) / eps1

    def u2(p):
        x = p[:, 0]
        return x * (1 - x) / eps2 + c2

    def grad1(p):
        return np.column_stack([(1 - 2 * p[:, 0]) / eps1, np.zeros(len(p))])

    def grad2(p):
        return np.column_stack([(1 - 2 * p[:, 0]) / eps2, np.zeros(len(p))])

    def u(p):
        return np.where(p[:, 0] < x0, u1(p), u2(p))

    def grad(p):
        return np.where((p[:, 0] < x0)[:, None], grad1(p), grad2(p))

    def f(p):
        return np.full(len(p), 2.0)

    return Manufactured(u=u, grad=grad, f=f, extras={
        "u1": u1, "u2": u2, "grad1": grad1, "grad2": grad2, "c2": c2,
    })


def radial_disk(r0: float) -> Manufactured:
    """u = 1 - (x^2+y^2)/r0^2: zero on the circle of radius r0 around the
    origin, zero normal flux on the x/y axes; f = 4/r0^2."""
    def u(p):
        return 1.0 - (p[:, 0] ** 2 + p[:, 1] ** 2) / r0 ** 2

    def grad(p):
        return -2.0 * p / r0 ** 2

    def f(p):
        return np.full(len(p), 4.0 / r0 ** 2)

    return Manufactured(u=u, grad=grad, f=f)


def radial_pair(eps1: float, eps2: float, center, r0: float) -> Manufactured:
    """u_i = |x-c|^2/eps_i (+ constant): continuous across the circle of
    radius r0 around c with continuous flux 2(x-c); f = -4 on both sides."""
    c = np.asarray(center, dtype=float)
    c2 = r0 ** 2 * (1.0 / eps1 - 1.0 / eps2)

    def r2(p):
        return ((p - c) ** 2).sum(axis=1)

    def u1(p):
        return r2(p) / eps1

    def u2(p):
        return r2(p) / eps2 + c2

    def grad1(p):
        return 2.0 * (p - c) / eps1

    def grad2(p):
        return 2.0 * (p - c) / eps2

    def f(p):
        return np.full(len(p), -4.0)

    def u(p):
        inside = r2(p) < r0 ** 2
        return np.where(inside, u1(p), u2(p))

    return Manufactured(u=u, grad=None, f=f, extras={
        "u1": u1, "u2": u2, "grad1": grad1, "grad2": grad2, "c2": c2,
    })


def cut_column(xbar: float) -> Manufactured:
    """u = cos(pi x / (2 xbar)): zero at x = xbar, natural on the other
    sides of the square; for the fictitious-domain strip {x < xbar}."""
    k = np.pi / (2.0 * xbar)

    def u(p):
        return np.cos(k * p[:, 0])

    def grad(p):
        return np.column_stack([-k * np.sin(k * p[:, 0]), np.zeros(len(p))])

    def f(p):
        return k ** 2 * np.cos(k * p[:, 0])

    return Manufactured(u=u, grad=grad, f=f)


def bond_pair(kappa: float, flux: float = 1.0) -> Manufactured:
    """Linear debonding solution u1 = flux x, u2 = flux x + kappa flux.

    Satisfies the bond law [u] = -kappa <<dn u>> across x = 0.5 with unit
    diffusivities; drive it with zero volume load, u = 0 at x = 0 and the
    Neumann flux datum on the right side.
    """
    def u1(p):
        return flux * p[:, 0]

    def u2(p):
        return flux * p[:, 0] + kappa * flux

    def grad(p):
        return np.column_stack([np.full(len(p), flux), np.zeros(len(p))])

    def f(p):
        return np.zeros(len(p))

    def u(p):
        return np.where(p[:, 0] < 0.5, u1(p), u2(p))

    return Manufactured(u=u, grad=grad, f=f, extras={
        "u1": u1, "u2": u2, "grad1": grad, "grad2": grad, "flux": flux,
    })
