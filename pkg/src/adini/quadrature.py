"""Gauss-Legendre rules on [-1, 1] and tensor-product rules on the square."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_POINTS = 16


@dataclass(frozen=True)
class QuadRule1D:
    points: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class QuadRule2D:
    """Tensor-product rule; ``points`` has shape (nq, 2) holding (xi, eta)."""

    points: np.ndarray
    weights: np.ndarray

    @property
    def xi(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def eta(self) -> np.ndarray:
        return self.points[:, 1]


def _legendre(n: int, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return P_n(t) and P_n'(t) by the three-term recurrence."""
    p0 = np.ones_like(t)
    p1 = t.copy()
    if n == 0:
        return p0, np.zeros_like(t)
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * t * p1 - (k - 1) * p0) / k
    dp = n * (t * p1 - p0) / (t * t - 1.0)
    return p1, dp


@lru_cache(maxsize=None)
def _gauss_nodes(n: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    k = np.arange(n)
    # Chebyshev nodes as starting guesses, descending order
    t = np.cos(np.pi * (2 * k + 1) / (2 * n))
    if n == 1:
        return (0.0,), (2.0,)
    for _ in range(100):
        p, dp = _legendre(n, t)
        step = p / dp
        t = t - step
        if np.max(np.abs(step)) < 1e-15:
            break
    _, dp = _legendre(n, t)
    w = 2.0 / ((1.0 - t * t) * dp * dp)
    t = t[::-1]
    w = w[::-1]
    # enforce exact symmetry about 0
    t = 0.5 * (t - t[::-1])
    w = 0.5 * (w + w[::-1])
    if n % 2:
        t[n // 2] = 0.0
    return tuple(t), tuple(w)


def gauss_rule_1d(n: int) -> QuadRule1D:
    """n-point Gauss-Legendre rule on [-1, 1], points ascending.

    Exact for polynomials of degree <= 2n - 1.
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_POINTS:
        raise ValueError(f"number of Gauss points must be an integer in 1..{MAX_POINTS}, got {n!r}")
    pts, wts = _gauss_nodes(int(n))
    return QuadRule1D(np.array(pts), np.array(wts))


def tensor_rule(rx: QuadRule1D, ry: QuadRule1D) -> QuadRule2D:
    xi, eta = np.meshgrid(rx.points, ry.points, indexing="ij")
    w = np.outer(rx.weights, ry.weights)
    return QuadRule2D(np.column_stack([xi.ravel(), eta.ravel()]), w.ravel())


@lru_cache(maxsize=None)
def square_rule(n: int) -> QuadRule2D:
    """n x n Gauss rule on the reference square [-1, 1]^2."""
    r = gauss_rule_1d(n)
    return tensor_rule(r, r)


def integrate_on_cell(rule: QuadRule2D, cell, integrand) -> float:
    """Integrate ``integrand(x, y)`` over a rectangular cell.

    ``cell`` provides ``xc, yc, hx, hy`` (center and half-lengths). The
    integrand is called once with arrays of physical quadrature points.
    """
    x = cell.xc + cell.hx * rule.xi
    y = cell.yc + cell.hy * rule.eta
    vals = np.broadcast_to(np.asarray(integrand(x, y), dtype=float), x.shape)
    return float(cell.hx * cell.hy * np.dot(rule.weights, vals))
