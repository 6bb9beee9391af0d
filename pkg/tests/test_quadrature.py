import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adini.quadrature import gauss_rule_1d, integrate_on_cell, square_rule, tensor_rule
from adini.reference import CellGeometry
from adini.mesh import build_mesh


def moment(k):
    return 2.0 / (k + 1) if k % 2 == 0 else 0.0


def test_one_point():
    r = gauss_rule_1d(1)
    assert r.points.tolist() == [0.0]
    assert r.weights.tolist() == [2.0]


def test_two_point():
    r = gauss_rule_1d(2)
    np.testing.assert_allclose(r.points, [-0.5773502691896257, 0.5773502691896257], atol=1e-15)
    np.testing.assert_allclose(r.weights, [1.0, 1.0], atol=1e-15)


def test_three_point_against_companion_matrix():
    # roots of P3 = (5t^3 - 3t)/2 via numpy's companion-matrix root finder
    roots = np.sort(np.roots([2.5, 0.0, -1.5, 0.0]).real)
    r = gauss_rule_1d(3)
    np.testing.assert_allclose(r.points, roots, atol=1e-15)
    np.testing.assert_allclose(r.points, [-0.7745966692414834, 0.0, 0.7745966692414834], atol=1e-15)
    np.testing.assert_allclose(r.weights, [5 / 9, 8 / 9, 5 / 9], atol=1e-15)


@pytest.mark.parametrize("n", range(1, 17))
def test_rule_invariants(n):
    r = gauss_rule_1d(n)
    assert abs(r.weights.sum() - 2.0) < 1e-14
    assert np.all(r.weights > 0)
    assert np.all(np.diff(r.points) > 0)
    np.testing.assert_array_equal(r.points, -r.points[::-1])
    for k in range(2 * n):
        assert abs(r.weights @ r.points ** k - moment(k)) < 1e-13
    ref_x, ref_w = np.polynomial.legendre.leggauss(n)
    np.testing.assert_allclose(r.points, ref_x, atol=1e-14)
    np.testing.assert_allclose(r.weights, ref_w, atol=1e-14)


@pytest.mark.parametrize("n", [0, 17, -1, 2.5])
def test_out_of_range(n):
    with pytest.raises(ValueError):
        gauss_rule_1d(n)


def test_tensor_rule_examples():
    one = tensor_rule(gauss_rule_1d(1), gauss_rule_1d(1))
    assert one.points.tolist() == [[0.0, 0.0]] and one.weights.tolist() == [4.0]
    two = tensor_rule(gauss_rule_1d(2), gauss_rule_1d(2))
    assert len(two.weights) == 4
    np.testing.assert_allclose(two.weights, 1.0, atol=1e-15)
    three = square_rule(3)
    assert abs(three.weights @ (three.xi ** 2 * three.eta ** 2) - 4 / 9) < 1e-15


def test_tensor_weight_is_product():
    rx, ry = gauss_rule_1d(3), gauss_rule_1d(5)
    r = tensor_rule(rx, ry)
    assert len(r.weights) == 15
    assert r.weights[1 * 5 + 3] == rx.weights[1] * ry.weights[3]
    assert tuple(r.points[1 * 5 + 3]) == (rx.points[1], ry.points[3])


@settings(max_examples=40, deadline=None)
@given(nx=st.integers(1, 8), ny=st.integers(1, 8), seed=st.integers(0, 2 ** 32 - 1))
def test_tensor_exactness(nx, ny, seed):
    rng = np.random.default_rng(seed)
    c = rng.uniform(-1, 1, size=(2 * nx, 2 * ny))
    r = tensor_rule(gauss_rule_1d(nx), gauss_rule_1d(ny))
    got = r.weights @ np.polynomial.polynomial.polyval2d(r.xi, r.eta, c)
    exact = np.array([moment(k) for k in range(2 * nx)]) @ c @ np.array([moment(k) for k in range(2 * ny)])
    assert abs(got - exact) <= 1e-12 * max(1.0, abs(exact))


def test_cell_integration():
    r = square_rule(4)
    cell = CellGeometry(0.5, 0.5, 0.5, 0.5)
    assert integrate_on_cell(r, cell, lambda x, y: 1.0) == pytest.approx(1.0, abs=1e-15)
    assert integrate_on_cell(r, cell, lambda x, y: x) == pytest.approx(0.25 * cell.area * 2, rel=1e-14)


@pytest.mark.parametrize("hx,hy", [(0.1, 2.0), (1e-3, 0.7), (3.0, 3.0)])
def test_cell_area(hx, hy):
    cell = CellGeometry(0.3, -1.0, hx, hy)
    got = integrate_on_cell(square_rule(2), cell, lambda x, y: np.ones_like(x))
    assert abs(got - 4 * hx * hy) <= 1e-14 * 4 * hx * hy


def test_sin_squared_over_mesh():
    mesh = build_mesh(1, 1, 4, 4)
    r = square_rule(6)
    total = sum(
        integrate_on_cell(r, mesh.cell(k), lambda x, y: np.sin(np.pi * x) ** 2 * np.sin(np.pi * y) ** 2)
        for k in range(mesh.n_cells)
    )
    assert abs(total - 0.25) < 1e-10
