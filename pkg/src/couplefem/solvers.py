"""Linear solves, semismooth Newton, and condition-number estimation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import SparseSystem, reduced_form
from .errors import SingularSystemError

_DENSE_PIVOT_SCAN = 2000  # locate the offending pivot only for small systems


def _factorize(A: sp.csc_matrix):
    try:
        return spla.splu(A.tocsc())
    except RuntimeError as exc:  # SuperLU reports exact singularity this way
        raise SingularSystemError(
            "sparse factorization failed: " + str(exc),
            pivot_index=_locate_zero_pivot(A),
        ) from None


def _locate_zero_pivot(A: sp.csc_matrix) -> int | None:
    n = A.shape[0]
    if n > _DENSE_PIVOT_SCAN:
        return None
    import warnings

    import scipy.linalg as la

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # the matrix is singular by premise
        lu, piv = la.lu_factor(A.toarray(), check_finite=False)
    d = np.abs(np.diag(lu))
    bad = np.flatnonzero(d < 1e-300)
    return int(bad[0]) if len(bad) else None


def solve_linear(system: SparseSystem, method: str = "direct") -> np.ndarray:
    """Direct sparse solve (indefinite-capable LU) with one refinement step.

    ``method="cg"`` switches to conjugate gradients and is admissible only
    for SPD systems (saddle-point systems are rejected).  Constrained dofs
    are eliminated symmetrically and re-inserted in the returned vector.
    """
    A, b, free, out = reduced_form(system)
    if method == "cg":
        if system.block_structure is not None:
            raise ValueError("cg is only admissible for SPD systems, not saddle form")
        try:
            x, info = spla.cg(A, b, rtol=1e-12, atol=0.0, maxiter=10 * A.shape[0])
        except TypeError:  # scipy < 1.12 spells the tolerance differently
            x, info = spla.cg(A, b, tol=1e-12, atol=0.0, maxiter=10 * A.shape[0])
        if info != 0:
            raise SingularSystemError(f"cg failed to converge (info={info})")
    elif method == "direct":
        lu = _factorize(A)
        x = lu.solve(b)
        x += lu.solve(b - A @ x)  # one step of iterative refinement
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("solve produced non-finite values")
    out[free] = x
    return out


@dataclass
class NewtonReport:
    """Record of a semismooth Newton run."""

    iterations: int
    residual_history: list[float] = field(default_factory=list)
    converged: bool = False
    active_set_history: list[int] = field(default_factory=list)


def semismooth_newton(residual, jacobian, x0, tol: float = 1e-10,
                      max_iter: int = 30, active_set=None):
    """Newton iteration with a generalized derivative for [.]_+/- kinks.

    ``residual(x)`` and ``jacobian(x)`` must be consistent: the jacobian is
    the exact generalized derivative on each smooth branch (derivative 0 at
    the kink).  ``active_set(x)``, when given, returns the boolean activity
    pattern; for the piecewise-linear residuals here a repeated pattern with
    small residual means convergence, so the loop terminates as soon as a
    pattern recurs.  Non-convergence is reported, not raised.
    """
    x = np.asarray(x0, dtype=float).copy()
    report = NewtonReport(iterations=0)
    seen: set[bytes] = set()
    for it in range(max_iter + 1):
        r = np.asarray(residual(x), dtype=float)
        rnorm = float(np.max(np.abs(r))) if r.size else 0.0
        report.residual_history.append(rnorm)
        repeated = False
        if active_set is not None:
            mask = np.asarray(active_set(x), dtype=bool)
            report.active_set_history.append(int(mask.sum()))
            key = mask.tobytes()
            repeated = key in seen
            seen.add(key)
        if rnorm <= tol:
            report.converged = True
            break
        if repeated or it == max_iter:
            break
        J = jacobian(x)
        if sp.issparse(J):
            dx = -_factorize(J.tocsc()).solve(r)
        else:
            dx = -np.linalg.solve(np.asarray(J, dtype=float), r)
        x = x + dx
        report.iterations = it + 1
    return x, report


@dataclass
class ConditionEstimate:
    """Spectral condition estimate from power / inverse iteration."""

    lambda_max: float
    lambda_min_abs: float

    @property
    def kappa2(self) -> float:
        if self.lambda_min_abs == 0.0:
            return np.inf
        return max(self.lambda_max / self.lambda_min_abs, 1.0)


def estimate_condition(system: SparseSystem, iters: int = 50,
                       seed: int = 0) -> ConditionEstimate:
    """Largest and smallest |eigenvalue| of the (reduced) symmetric matrix.

    Power iteration for lambda_max, inverse iteration through a sparse
    factorization for the smallest magnitude; both start from a fixed-seed
    random vector, so repeated calls give identical estimates.
    """
    A, _, _, _ = reduced_form(system)
    n = A.shape[0]
    rng = np.random.default_rng(seed)

    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam_max = 0.0
    for _ in range(iters):
        w = A @ v
        lam_max = float(np.linalg.norm(w))
        if lam_max == 0.0:
            break
        v = w / lam_max

    lu = _factorize(A)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam_min = 0.0
    for _ in range(iters):
        w = lu.solve(v)
        growth = float(np.linalg.norm(w))
        if not np.isfinite(growth) or growth == 0.0:
            return ConditionEstimate(lambda_max=lam_max, lambda_min_abs=0.0)
        lam_min = 1.0 / growth
        v = w / growth
    return ConditionEstimate(lambda_max=lam_max, lambda_min_abs=lam_min)
