import numpy as np
import pytest
import scipy.sparse as sp

from couplefem import (
    SingularSystemError,
    SparseSystem,
    build_structured_mesh,
    estimate_condition,
    semismooth_newton,
    solve_linear,
)
from couplefem import assemble_dirichlet_nitsche
from couplefem import manufactured as mf


def _system(A, b, blocks=None):
    return SparseSystem(matrix=sp.csr_matrix(np.asarray(A, dtype=float)),
                        rhs=np.asarray(b, dtype=float), block_structure=blocks)


def test_identity_solve():
    b = np.array([3.0, -1.0, 2.0])
    x = solve_linear(_system(np.eye(3), b))
    assert np.allclose(x, b, atol=1e-14)


def test_saddle_2x2():
    x = solve_linear(_system([[1.0, 1.0], [1.0, 0.0]], [1.0, 0.0], blocks=(1, 1)))
    assert np.allclose(x, [0.0, 1.0], atol=1e-14)


def test_residual_contract_on_nitsche_system():
    mesh = build_structured_mesh(32)
    m = mf.sin_product()
    system = assemble_dirichlet_nitsche(mesh, f=m.f, g=m.u)
    x = solve_linear(system)
    r = system.matrix @ x - system.rhs
    assert np.max(np.abs(r)) <= 1e-10 * (1.0 + np.max(np.abs(system.rhs)))


def test_singular_reports_pivot():
    A = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(SingularSystemError) as exc:
        solve_linear(_system(A, [1.0, 1.0]))
    assert exc.value.pivot_index in (1, None)


def test_cg_spd_only():
    mesh = build_structured_mesh(8)
    m = mf.sin_product()
    system = assemble_dirichlet_nitsche(mesh, gamma0=10.0, f=m.f, g=m.u)
    x_cg = solve_linear(system, method="cg")
    x_lu = solve_linear(system)
    assert np.max(np.abs(x_cg - x_lu)) < 1e-8
    with pytest.raises(ValueError):
        solve_linear(_system([[1.0, 1.0], [1.0, 0.0]], [1.0, 0.0], blocks=(1, 1)),
                     method="cg")


def test_dirichlet_lifting():
    # -u'' = 0 in 1D-like strip with u(0)=1, u(1)=3: solution is affine
    mesh = build_structured_mesh(4)
    from couplefem import assemble_stiffness
    S = assemble_stiffness(mesh)
    dofs = np.concatenate([mesh.boundary_vertices(("left",)),
                           mesh.boundary_vertices(("right",))])
    vals = np.where(mesh.vertices[dofs, 0] < 0.5, 1.0, 3.0)
    system = SparseSystem(matrix=S.matrix, rhs=np.zeros(mesh.num_vertices))
    x = solve_linear(system.with_dirichlet(dofs, vals))
    assert np.allclose(x, 1.0 + 2.0 * mesh.vertices[:, 0], atol=1e-12)


def test_semismooth_scalar_bracket():
    # r(x) = x + [x - 1]_+ has its root at 0; start in the active branch
    def residual(x):
        return np.array([x[0] + max(x[0] - 1.0, 0.0)])

    def jacobian(x):
        return np.array([[1.0 + (1.0 if x[0] > 1.0 else 0.0)]])

    def active(x):
        return np.array([x[0] > 1.0])

    x, rep = semismooth_newton(residual, jacobian, np.array([5.0]),
                               tol=1e-12, active_set=active)
    assert rep.converged
    assert abs(x[0]) < 1e-12
    # the active set empties after one switch and stays empty
    assert rep.active_set_history[0] == 1
    assert rep.active_set_history[1:] == [0] * (len(rep.active_set_history) - 1)


def test_semismooth_linear_one_iteration():
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    b = np.array([1.0, -1.0])
    x, rep = semismooth_newton(lambda x: A @ x - b, lambda x: A,
                               np.zeros(2), tol=1e-12)
    assert rep.converged
    assert rep.iterations == 1
    assert np.allclose(A @ x, b, atol=1e-12)


def test_semismooth_nonconvergence_reported():
    # jacobian deliberately wrong: no convergence, reported not raised
    r = lambda x: np.array([np.tanh(x[0]) + 2.0])
    j = lambda x: np.array([[1.0]])
    x, rep = semismooth_newton(r, j, np.array([0.0]), tol=1e-12, max_iter=5)
    assert not rep.converged
    assert len(rep.residual_history) == 6


def test_condition_identity():
    est = estimate_condition(_system(np.eye(10), np.zeros(10)))
    assert est.kappa2 == pytest.approx(1.0, abs=1e-6)


def test_condition_diagonal():
    est = estimate_condition(_system(np.diag([1.0, 1e4]), np.zeros(2)))
    assert est.kappa2 == pytest.approx(1e4, rel=1e-2)


def test_condition_deterministic():
    mesh = build_structured_mesh(8)
    m = mf.sin_product()
    system = assemble_dirichlet_nitsche(mesh, f=m.f, g=m.u)
    a = estimate_condition(system, iters=25)
    b = estimate_condition(system, iters=25)
    assert a.lambda_max == b.lambda_max
    assert a.lambda_min_abs == b.lambda_min_abs
