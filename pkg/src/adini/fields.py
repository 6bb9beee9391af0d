"""Manufactured solutions with closed-form derivatives, and their biharmonic loads."""

from __future__ import annotations

from math import comb, pi

import numpy as np
from numpy.polynomial import polynomial as npoly

MAX_ORDER = 4


class UnsupportedDerivativeError(NotImplementedError):
    pass


class AnalyticField:
    """Scalar field evaluated as ``field(x, y, a, b)`` = d^(a+b) / dx^a dy^b.

    Subclasses implement ``_eval``. Arguments broadcast like numpy arrays.
    """

    max_order = MAX_ORDER

    def __init__(self, name: str, domain: tuple[float, float] | None = None):
        self.name = name
        self.domain = domain

    def __call__(self, x, y, a: int = 0, b: int = 0):
        if a < 0 or b < 0 or a + b > self.max_order:
            raise UnsupportedDerivativeError(
                f"{self.name}: derivative ({a}, {b}) not available (max total order {self.max_order})"
            )
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return self._eval(x, y, a, b)

    def _eval(self, x, y, a, b):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


class SeparableField(AnalyticField):
    """w(x, y) = g(x) * k(y) where ``gx(t, n)`` / ``gy(t, n)`` return n-th derivatives."""

    def __init__(self, name, gx, gy, domain=None):
        super().__init__(name, domain)
        self.gx = gx
        self.gy = gy

    def _eval(self, x, y, a, b):
        return self.gx(x, a) * self.gy(y, b)


class PolynomialField(AnalyticField):
    """Polynomial given by a dense coefficient array ``c[i, j]`` of x**i * y**j."""

    max_order = 8

    def __init__(self, coeffs, name="poly", domain=None):
        super().__init__(name, domain)
        self.coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))

    def _eval(self, x, y, a, b):
        c = self.coeffs
        if a:
            c = npoly.polyder(c, a, axis=0) if a < c.shape[0] else np.zeros((1, c.shape[1]))
        if b:
            c = npoly.polyder(c, b, axis=1) if b < c.shape[1] else np.zeros((c.shape[0], 1))
        return npoly.polyval2d(x, y, c)


class ZeroField(AnalyticField):
    def __init__(self, domain=None):
        super().__init__("zero", domain)

    def _eval(self, x, y, a, b):
        return np.zeros_like(x)


def _sin2(L):
    k = pi / L

    def g(t, n):
        # sin^2(kt) = (1 - cos(2kt)) / 2
        if n == 0:
            return np.sin(k * t) ** 2
        return -0.5 * (2 * k) ** n * np.cos(2 * k * t + n * pi / 2)

    return g


def solution_sine2(Lx: float = 1.0, Ly: float = 1.0) -> SeparableField:
    """w = sin^2(pi x / Lx) * sin^2(pi y / Ly)."""
    if Lx <= 0 or Ly <= 0:
        raise ValueError("domain lengths must be positive")
    return SeparableField("sine2", _sin2(Lx), _sin2(Ly), domain=(Lx, Ly))


def _bump(L):
    # (t (L - t))^2 / (L/2)^4 has maximum 1 at t = L/2
    p = npoly.polymul([0.0, L, -1.0], [0.0, L, -1.0]) / (L / 2) ** 4

    def g(t, n):
        return npoly.polyval(t, npoly.polyder(p, n)) if n < len(p) else np.zeros_like(t)

    return g


def solution_poly4(Lx: float = 1.0, Ly: float = 1.0) -> SeparableField:
    """w = [x (Lx - x)]^2 [y (Ly - y)]^2, normalized to maximum 1."""
    if Lx <= 0 or Ly <= 0:
        raise ValueError("domain lengths must be positive")
    return SeparableField("poly4", _bump(Lx), _bump(Ly), domain=(Lx, Ly))


SOLUTIONS = {
    "sine2": solution_sine2,
    "poly4": solution_poly4,
}


def get_solution(name: str, Lx: float = 1.0, Ly: float = 1.0) -> AnalyticField:
    try:
        factory = SOLUTIONS[name]
    except KeyError:
        raise KeyError(f"unknown solution {name!r}; available: {', '.join(sorted(SOLUTIONS))}") from None
    return factory(Lx, Ly)


class BiharmonicRHS(AnalyticField):
    """f = w_xxxx + 2 w_xxyy + w_yyyy; only point values are available."""

    max_order = 0

    def __init__(self, w: AnalyticField):
        super().__init__(f"bilaplacian({w.name})", w.domain)
        self.w = w

    def _eval(self, x, y, a, b):
        w = self.w
        return w(x, y, 4, 0) + 2.0 * w(x, y, 2, 2) + w(x, y, 0, 4)


def biharmonic_rhs(w: AnalyticField) -> BiharmonicRHS:
    return BiharmonicRHS(w)


def weak_form_check(w, f, v, rule, mesh) -> tuple[float, float]:
    """Return (integral of Hess w : Hess v, integral of f v) over the mesh cells."""
    X, Y = mesh.quadrature_points(rule)
    jw = mesh.hx * mesh.hy * rule.weights
    hess = sum(comb(2, a) * w(X, Y, a, 2 - a) * v(X, Y, a, 2 - a) for a in range(3))
    lhs = float(np.sum((hess @ jw)))
    rhs = float(np.sum((f(X, Y) * v(X, Y)) @ jw))
    return lhs, rhs
