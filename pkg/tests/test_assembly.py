import numpy as np
import pytest
import scipy.linalg

from adini.assembly import (
    LinearSystem,
    NoConvergenceError,
    NotSPDError,
    SymBandMatrix,
    assemble,
    cg_solve,
    cholesky_solve,
    exact_local_stiffness,
    local_load,
    local_stiffness,
)
from adini.fields import PolynomialField, ZeroField, biharmonic_rhs, solution_poly4, solution_sine2
from adini.mesh import build_dofmap, build_mesh
from adini.quadrature import square_rule
from adini.reference import REFERENCE_CELL, CellGeometry


def affine_dofs(cell, a, b, c):
    P = cell.vertices()
    return np.column_stack([a * P[:, 0] + b * P[:, 1] + c, np.full(4, a), np.full(4, b)]).ravel()


def dense_system(A):
    A = np.asarray(A, dtype=float)
    n = len(A)
    dm = build_dofmap(build_mesh(1, 1, 1, 1))
    sys = LinearSystem(SymBandMatrix.from_dense(A), np.zeros(n), dm)
    return sys


def solve_dense(solver, A, b, **kw):
    # solvers return DiscreteFields; bypass the length check through a stub dofmap
    sys = dense_system(A)
    sys.rhs = np.asarray(b, dtype=float)
    sys.dofmap = _StubMap(len(b))
    return solver(sys, **kw).values


class _StubMap:
    def __init__(self, n):
        self.n_free = n


def test_affine_kernel(rng):
    for cell in (REFERENCE_CELL, CellGeometry(0.4, 0.1, 0.3, 1.7)):
        S = local_stiffness(cell)
        for _ in range(5):
            d = affine_dofs(cell, *rng.uniform(-1, 1, 3))
            assert np.abs(S @ d).max() < 1e-11


def test_symmetry_and_spectrum():
    S = local_stiffness(REFERENCE_CELL)
    assert np.abs(S - S.T).max() == 0.0
    lam = np.linalg.eigvalsh(S)
    small = np.abs(lam) < 1e-9 * lam.max()
    assert small.sum() == 3
    assert np.all(lam[~small] > 0)


def test_quadrature_matches_exact():
    for hx, hy in ((1.0, 1.0), (0.125, 0.0625), (1.7, 0.2)):
        Q = local_stiffness(CellGeometry(0, 0, hx, hy))
        E = exact_local_stiffness(hx, hy)
        assert np.abs(Q - E).max() <= 1e-12 * np.abs(E).max()


def test_scaling():
    h = 0.3
    S1 = exact_local_stiffness(h, h)
    S2 = local_stiffness(CellGeometry(0, 0, h / 2, h / 2))
    vv = np.ix_([0, 3, 6, 9], [0, 3, 6, 9])
    np.testing.assert_allclose(S2[vv] / S1[vv], 4.0, rtol=1e-10)


def test_load_examples():
    basis = None
    assert np.all(local_load(REFERENCE_CELL, basis, ZeroField()) == 0.0)
    F = local_load(REFERENCE_CELL, basis, PolynomialField([[1.0]]))
    assert F @ affine_dofs(REFERENCE_CELL, 0, 0, 1) == pytest.approx(4.0, abs=1e-14)
    F = local_load(REFERENCE_CELL, basis, PolynomialField([[0.0], [1.0]]))
    # reflect xi -> -xi: vertices 0<->1 and 2<->3, d/dx DOFs change sign
    perm = np.array([3, 4, 5, 0, 1, 2, 9, 10, 11, 6, 7, 8])
    sign = np.tile([1.0, -1.0, 1.0], 4)
    np.testing.assert_allclose(sign * F[perm], -F, atol=1e-15)


def test_empty_and_small_systems(sine2):
    f = biharmonic_rhs(sine2)
    m = build_mesh(1, 1, 1, 1)
    sys = assemble(m, build_dofmap(m), f)
    assert sys.matrix.n == 0
    assert cholesky_solve(sys).values.shape == (0,)

    m = build_mesh(1, 1, 2, 2)
    sys = assemble(m, build_dofmap(m), f)
    A = sys.matrix.to_dense()
    assert A.shape == (3, 3)
    np.testing.assert_allclose(A, np.diag([172.8, 6.4, 6.4]), rtol=1e-13, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(A) > 0)


def test_bandwidth():
    for n in (3, 6, 9):
        m = build_mesh(1, 1, n, n)
        sys = assemble(m, build_dofmap(m), ZeroField())
        assert sys.matrix.bandwidth <= 3 * (n + 2) + 2


def test_band_storage_roundtrip(rng):
    B = rng.uniform(-1, 1, (7, 7))
    A = B + B.T
    A[np.abs(np.subtract.outer(range(7), range(7))) > 2] = 0
    M = SymBandMatrix.from_dense(A)
    assert M.bandwidth == 2
    np.testing.assert_array_equal(M.to_dense(), A)
    x = rng.uniform(-1, 1, 7)
    np.testing.assert_allclose(M @ x, A @ x, atol=1e-14)


def test_cholesky_closed_form():
    A = np.array([[4.0, 2.0], [2.0, 3.0]])
    # A @ [1, 2] = [8, 8]; the rhs [8, 7] has solution [5/4, 3/2]
    np.testing.assert_allclose(solve_dense(cholesky_solve, A, [8.0, 8.0]), [1.0, 2.0], atol=1e-15)
    np.testing.assert_allclose(solve_dense(cholesky_solve, A, [8.0, 7.0]), [1.25, 1.5], atol=1e-15)
    U = scipy.linalg.cholesky_banded(SymBandMatrix.from_dense(A).bands)
    np.testing.assert_allclose(U, [[0.0, 1.0], [2.0, np.sqrt(2.0)]], atol=1e-15)


def test_identity_and_diagonal():
    b = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(solve_dense(cholesky_solve, np.eye(3), b), b)
    sys = dense_system(np.eye(3))
    sys.rhs, sys.dofmap = b, _StubMap(3)
    np.testing.assert_array_equal(cg_solve(sys).values, b)
    assert sys.stats["iterations"] == 1
    x = solve_dense(cg_solve, np.diag([1.0, 10.0, 100.0]), np.ones(3))
    np.testing.assert_allclose(x, [1.0, 0.1, 0.01], rtol=1e-14)


def test_not_spd():
    with pytest.raises(NotSPDError):
        solve_dense(cholesky_solve, [[1.0, 2.0], [2.0, 1.0]], [1.0, 1.0])


def test_cg_no_convergence(sine2):
    m = build_mesh(1, 1, 8, 8)
    sys = assemble(m, build_dofmap(m), biharmonic_rhs(sine2))
    with pytest.raises(NoConvergenceError) as exc:
        cg_solve(sys, max_iter=3)
    assert exc.value.residual > 0


@pytest.mark.parametrize("n", [4, 8, 16])
@pytest.mark.parametrize("factory", [solution_sine2, solution_poly4])
def test_solver_cross_validation(n, factory):
    m = build_mesh(1, 1, n, n)
    dm = build_dofmap(m)
    f = biharmonic_rhs(factory())
    x1 = cholesky_solve(assemble(m, dm, f)).values
    x2 = cg_solve(assemble(m, dm, f), tol=1e-12).values
    assert np.abs(x1 - x2).max() <= 1e-8


@pytest.mark.parametrize("n", [8, 32])
def test_galerkin_residual(sine2, n):
    m = build_mesh(1, 1, n, n)
    f = biharmonic_rhs(sine2)
    sys = assemble(m, build_dofmap(m), f)
    x = cholesky_solve(sys).values
    r = square_rule(6)
    X, Y = m.quadrature_points(r)
    f_norm = np.sqrt(np.sum(f(X, Y) ** 2 @ (m.hx * m.hy * r.weights)))
    assert np.abs(sys.matrix @ x - sys.rhs).max() <= 1e-9 * f_norm
    assert sys.stats["pivot_min"] > 0
    assert sys.stats["residual"] <= 1e-10


def test_quadrature_assembly_agrees(sine2):
    m = build_mesh(1, 1, 4, 4)
    dm = build_dofmap(m)
    f = biharmonic_rhs(sine2)
    A = assemble(m, dm, f).matrix.to_dense()
    B = assemble(m, dm, f, stiffness_rule=square_rule(4)).matrix.to_dense()
    assert np.abs(A - B).max() <= 1e-12 * np.abs(A).max()
