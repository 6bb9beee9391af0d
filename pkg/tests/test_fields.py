from math import pi

import numpy as np
import pytest
import sympy as sp

from adini.fields import (
    PolynomialField,
    UnsupportedDerivativeError,
    ZeroField,
    biharmonic_rhs,
    get_solution,
    solution_poly4,
    solution_sine2,
    weak_form_check,
)
from adini.mesh import build_mesh
from adini.quadrature import square_rule

DERIVS = [(a, l - a) for l in range(1, 5) for a in range(l + 1)]


@pytest.mark.parametrize("name", ["sine2", "poly4"])
@pytest.mark.parametrize("L", [(1.0, 1.0), (2.0, 0.5)])
def test_finite_differences(name, L, rng):
    w = get_solution(name, *L)
    x = rng.uniform(0.05, 0.95, 50) * L[0]
    y = rng.uniform(0.05, 0.95, 50) * L[1]
    s = 1e-5
    for a, b in DERIVS:
        exact = w(x, y, a, b)
        if a:
            fd = (w(x + s, y, a - 1, b) - w(x - s, y, a - 1, b)) / (2 * s)
        else:
            fd = (w(x, y + s, a, b - 1) - w(x, y - s, a, b - 1)) / (2 * s)
        scale = np.abs(exact).max() + 1
        assert np.max(np.abs(fd - exact)) / scale <= 1e-7, (a, b)


def test_sine2_against_sympy(rng):
    X, Y = sp.symbols("x y")
    expr = sp.sin(sp.pi * X) ** 2 * sp.sin(sp.pi * Y) ** 2
    w = solution_sine2()
    pts = rng.uniform(0, 1, (5, 2))
    for a, b in [(0, 0)] + DERIVS:
        d = sp.lambdify((X, Y), sp.diff(expr, X, a, Y, b) if a + b else expr)
        for px, py in pts:
            assert abs(float(w(px, py, a, b)) - float(d(px, py))) < 1e-9


def test_sine2_center():
    w = solution_sine2(2.0, 3.0)
    assert float(w(1.0, 1.5)) == pytest.approx(1.0)
    assert abs(float(w(1.0, 1.5, 1, 0))) < 1e-14 and abs(float(w(1.0, 1.5, 0, 1))) < 1e-14
    assert abs(float(solution_sine2()(0.25, 0.25, 2, 2))) < 1e-10


def test_sine2_third_derivative_norms():
    w = solution_sine2()
    m = build_mesh(1, 1, 8, 8)
    r = square_rule(8)
    X, Y = m.quadrature_points(r)
    jw = m.hx * m.hy * r.weights
    for a, b in ((2, 1), (1, 2)):
        assert np.sum(w(X, Y, a, b) ** 2 @ jw) == pytest.approx(pi ** 6, rel=1e-10)


def test_poly4_examples():
    w = solution_poly4()
    assert float(w(0.5, 0.5)) == pytest.approx(1.0)
    assert float(w(0.5, 0.5, 4, 0)) == pytest.approx(384.0)
    t = np.linspace(0, 1, 101)
    for a, b in ((0, 0), (1, 0), (0, 1)):
        for x, y in ((t, 0 * t), (t, 0 * t + 1), (0 * t, t), (0 * t + 1, t)):
            assert np.all(w(x, y, a, b) == 0.0)


def test_sine2_boundary():
    w = solution_sine2()
    t = np.linspace(0, 1, 25)
    for a, b in ((0, 0), (1, 0), (0, 1)):
        for x, y in ((t, 0 * t), (t, 0 * t + 1), (0 * t, t), (0 * t + 1, t)):
            assert np.max(np.abs(w(x, y, a, b))) < 1e-12


def test_rhs_examples():
    assert np.all(biharmonic_rhs(PolynomialField([[1.0, 2.0], [3.0, 0.0]]))(0.3, 0.7) == 0)
    x4 = PolynomialField(np.array([[0.0], [0], [0], [0], [1.0]]))
    assert float(biharmonic_rhs(x4)(0.3, -2.0)) == 24.0
    # f(1/2, 1/2) for sine2 by symbolic differentiation is 24 pi^4
    X, Y = sp.symbols("x y")
    expr = sp.sin(sp.pi * X) ** 2 * sp.sin(sp.pi * Y) ** 2
    bil = sp.diff(expr, X, 4) + 2 * sp.diff(expr, X, 2, Y, 2) + sp.diff(expr, Y, 4)
    assert sp.simplify(bil.subs({X: sp.Rational(1, 2), Y: sp.Rational(1, 2)}) - 24 * sp.pi ** 4) == 0
    assert float(biharmonic_rhs(solution_sine2())(0.5, 0.5)) == pytest.approx(2337.818184816058, rel=1e-13)


def test_rhs_point_values_only():
    f = biharmonic_rhs(solution_sine2())
    with pytest.raises(UnsupportedDerivativeError):
        f(0.5, 0.5, 1, 0)


def test_field_order_limit():
    with pytest.raises(UnsupportedDerivativeError):
        solution_sine2()(0.1, 0.1, 3, 2)


def test_unknown_solution():
    with pytest.raises(KeyError, match="poly4"):
        get_solution("foo")


@pytest.mark.parametrize("factory", [solution_sine2, solution_poly4])
def test_bad_domain(factory):
    with pytest.raises(ValueError):
        factory(0.0, 1.0)


def test_weak_form():
    r = square_rule(6)
    w = solution_sine2()
    f = biharmonic_rhs(w)
    lhs, rhs = weak_form_check(w, f, w, r, build_mesh(1, 1, 16, 16))
    assert abs(lhs - rhs) <= 1e-8 * abs(lhs)
    assert weak_form_check(w, f, ZeroField(), r, build_mesh(1, 1, 4, 4)) == (0.0, 0.0)
    p = solution_poly4()
    lhs, rhs = weak_form_check(p, biharmonic_rhs(p), p, r, build_mesh(1, 1, 4, 4))
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)
    assert rhs > 0


@pytest.mark.parametrize("name", ["sine2", "poly4"])
def test_nondegenerate(name):
    w = get_solution(name)
    m = build_mesh(1, 1, 8, 8)
    r = square_rule(6)
    X, Y = m.quadrature_points(r)
    jw = m.hx * m.hy * r.weights
    total = np.sum((w(X, Y, 2, 1) ** 2 + w(X, Y, 1, 2) ** 2) @ jw)
    assert total > 0.1
