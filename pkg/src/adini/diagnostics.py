"""Measured quantities: broken norms, the interpolation expansion, the
cross term and its dominant part, the consistency functional, the error
identity for (-f, w - w_h), and lower-bound ratios.

Fields are sampled at the quadrature points of every cell; differences
of analytic and discrete fields are formed pointwise on those samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .fields import AnalyticField
from .mesh import DiscreteField, DofMap, Mesh, interpolate_global
from .quadrature import QuadRule2D, square_rule
from .reference import (
    ADINI_EXPONENTS,
    CellGeometry,
    LocalPoly12,
    LocalPolyP4,
    dense_derivative,
    dense_eval,
    dense_integral,
    dense_product,
    interpolate_local,
    monomial_table,
)

NORM_ORDER = 6


class DegenerateSolutionError(ValueError):
    pass


class IdentityViolationError(RuntimeError):
    pass


class Samples(dict):
    """Map (a, b) -> physical derivative values, each of shape (n_cells, nq)."""

    def _combine(self, other, op):
        return Samples({k: op(self[k], other[k]) for k in self.keys() & other.keys()})

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __neg__(self):
        return Samples({k: -v for k, v in self.items()})

    def __rmul__(self, s):
        return Samples({k: s * v for k, v in self.items()})


def _multi_indices(orders):
    return [(a, l - a) for l in orders for a in range(l, -1, -1)]


def sample(u, mesh: Mesh, rule: QuadRule2D, orders=(0, 1, 2)) -> Samples:
    """Sample an AnalyticField, a DiscreteField or ``None`` (zero) on all cells."""
    keys = _multi_indices(orders)
    nq = len(rule.weights)
    if u is None:
        z = np.zeros((mesh.n_cells, nq))
        return Samples({k: z for k in keys})
    if isinstance(u, DiscreteField):
        C = u.cell_coeffs()
        return Samples({
            (a, b): C @ monomial_table(ADINI_EXPONENTS, rule.xi, rule.eta, a, b) / (mesh.hx ** a * mesh.hy ** b)
            for a, b in keys
        })
    X, Y = mesh.quadrature_points(rule)
    return Samples({(a, b): u(X, Y, a, b) for a, b in keys})


def _jw(mesh, rule):
    return mesh.hx * mesh.hy * rule.weights


def inner_l2(A: Samples, B: Samples, mesh, rule) -> float:
    return float(np.sum((A[0, 0] * B[0, 0]) @ _jw(mesh, rule)))


def bilinear_ah(A: Samples, B: Samples, mesh, rule) -> float:
    """Broken form sum_K int (u_xx v_xx + 2 u_xy v_xy + u_yy v_yy)."""
    integrand = A[2, 0] * B[2, 0] + 2.0 * A[1, 1] * B[1, 1] + A[0, 2] * B[0, 2]
    return float(np.sum(integrand @ _jw(mesh, rule)))


def seminorm(A: Samples, order: int, mesh, rule) -> float:
    jw = _jw(mesh, rule)
    total = sum(comb(order, a) * np.sum((A[a, order - a] ** 2) @ jw) for a in range(order + 1))
    return float(np.sqrt(total))


def broken_norm(u_exact, u_h, order: int, mesh: Mesh, rule: QuadRule2D | None = None) -> float:
    """Broken H^order seminorm of ``u_exact - u_h`` (order 0 is the L2 norm).

    Mixed derivatives carry binomial weights, so order 2 is the energy norm.
    """
    if not 0 <= order <= 4:
        raise ValueError(f"norm order must be in 0..4, got {order}")
    rule = rule or square_rule(NORM_ORDER)
    diff = sample(u_exact, mesh, rule, (order,)) - sample(u_h, mesh, rule, (order,))
    return seminorm(diff, order, mesh, rule)


@dataclass(frozen=True)
class ErrorReport:
    h: float
    err_L2: float
    err_H1_broken: float
    err_energy_broken: float
    n_free: int
    quad_order: int = NORM_ORDER


def error_report(w: AnalyticField, w_h: DiscreteField, rule: QuadRule2D | None = None) -> ErrorReport:
    rule = rule or square_rule(NORM_ORDER)
    mesh = w_h.mesh
    diff = sample(w, mesh, rule) - sample(w_h, mesh, rule)
    return ErrorReport(
        h=mesh.h,
        err_L2=seminorm(diff, 0, mesh, rule),
        err_H1_broken=seminorm(diff, 1, mesh, rule),
        err_energy_broken=seminorm(diff, 2, mesh, rule),
        n_free=w_h.dofmap.n_free,
        quad_order=int(round(np.sqrt(len(rule.weights)))),
    )


# -- local expansion ----------------------------------------------------------

def _quad_integral(c: np.ndarray, rule: QuadRule2D) -> float:
    return float(rule.weights @ dense_eval(c, rule.xi, rule.eta))


def lemma41_expansion_check(u: LocalPolyP4, v: LocalPoly12, cell: CellGeometry,
                            rule: QuadRule2D | None = None) -> tuple[float, float]:
    """Both sides of the expansion of (Hess(u - Pi u), Hess v)_K for u in P4, v in Q_Ad.

    lhs = (Hess(u - Pi_K u), Hess v)_K
    rhs = -(hy^2/3) int u_xxyy v_xx - (hx^2/3) int u_xxyy v_yy
    All derivatives are physical; ``u`` and ``v`` are given in reference coordinates.
    """
    rule = rule or square_rule(4)
    hx, hy = cell.hx, cell.hy
    e = u.dense()
    pi_u = interpolate_local(u).dense()
    e[: pi_u.shape[0], : pi_u.shape[1]] -= pi_u
    vd = v.dense()

    def integral(c1, c2):
        return hx * hy * _quad_integral(dense_product(c1, c2), rule)

    lhs = 0.0
    for a, b, s in ((2, 0, 1.0 / hx ** 4), (1, 1, 2.0 / (hx * hy) ** 2), (0, 2, 1.0 / hy ** 4)):
        lhs += s * integral(dense_derivative(e, a, b), dense_derivative(vd, a, b))
    uxxyy = dense_derivative(u.dense(), 2, 2) / (hx * hy) ** 2
    vxx = dense_derivative(vd, 2, 0) / hx ** 2
    vyy = dense_derivative(vd, 0, 2) / hy ** 2
    rhs = -(hy ** 2 / 3.0) * integral(uxxyy, vxx) - (hx ** 2 / 3.0) * integral(uxxyy, vyy)
    return lhs, rhs


def mixed_term(u: LocalPolyP4, v: LocalPoly12, cell: CellGeometry) -> float:
    """(d_xy (u - Pi u), d_xy v)_K, which vanishes for u in P4 and v in Q_Ad."""
    e = u.dense()
    pi_u = interpolate_local(u).dense()
    e[: pi_u.shape[0], : pi_u.shape[1]] -= pi_u
    prod = dense_product(dense_derivative(e, 1, 1), dense_derivative(v.dense(), 1, 1))
    return cell.hx * cell.hy * dense_integral(prod) / (cell.hx * cell.hy) ** 2


# -- global quantities --------------------------------------------------------

@dataclass(frozen=True)
class ExpansionReport:
    h: float
    cross: float
    dominant: float

    @property
    def ratio(self) -> float:
        return self.cross / self.dominant


def dominant_term(w: AnalyticField, mesh: Mesh, rule: QuadRule2D | None = None) -> float:
    """sum_K (hy^2/3) ||w_xxy||_K^2 + (hx^2/3) ||w_xyy||_K^2 from analytic derivatives."""
    rule = rule or square_rule(NORM_ORDER)
    X, Y = mesh.quadrature_points(rule)
    jw = _jw(mesh, rule)
    gxxy = np.sum((w(X, Y, 2, 1) ** 2) @ jw)
    gxyy = np.sum((w(X, Y, 1, 2) ** 2) @ jw)
    return float(mesh.hy ** 2 / 3.0 * gxxy + mesh.hx ** 2 / 3.0 * gxyy)


def cross_term(w: AnalyticField, mesh: Mesh, dofmap: DofMap, rule: QuadRule2D | None = None,
               interpolant: DiscreteField | None = None) -> ExpansionReport:
    """a_h(w - Pi_h w, Pi_h w) against its leading part."""
    rule = rule or square_rule(NORM_ORDER)
    pi_w = interpolant if interpolant is not None else interpolate_global(w, mesh, dofmap)
    P = sample(pi_w, mesh, rule, (2,))
    W = sample(w, mesh, rule, (2,))
    cross = bilinear_ah(W - P, P, mesh, rule)
    dominant = dominant_term(w, mesh, rule)
    if dominant <= 0.0:
        raise DegenerateSolutionError(
            f"{getattr(w, 'name', w)}: third mixed derivatives vanish, no lower bound mechanism"
        )
    return ExpansionReport(mesh.h, cross, dominant)


def consistency_error(w: AnalyticField, f, v_h: DiscreteField, mesh: Mesh | None = None,
                      rule: QuadRule2D | None = None) -> float:
    """Signed a_h(w, v_h) - (f, v_h)."""
    mesh = mesh or v_h.mesh
    rule = rule or square_rule(NORM_ORDER)
    V = sample(v_h, mesh, rule, (0, 2))
    W = sample(w, mesh, rule, (2,))
    X, Y = mesh.quadrature_points(rule)
    F = Samples({(0, 0): f(X, Y)})
    return bilinear_ah(W, V, mesh, rule) - inner_l2(F, V, mesh, rule)


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    t1: float
    t2: float
    t3: float
    t4: float
    t5: float

    @property
    def terms(self) -> tuple[float, ...]:
        return (self.t1, self.t2, self.t3, self.t4, self.t5)

    @property
    def residual(self) -> float:
        return abs(self.lhs - sum(self.terms))

    @property
    def tolerance(self) -> float:
        return 1e-8 * (1.0 + abs(self.lhs))

    @property
    def t5_dominates(self) -> bool:
        return all(abs(self.t5) > abs(t) for t in self.terms[:4])


def identity_check(w: AnalyticField, f, w_h: DiscreteField, mesh: Mesh | None = None,
                   rule: QuadRule2D | None = None, raise_on_violation: bool = True) -> IdentityReport:
    """Evaluate every term of the decomposition of (-f, w - w_h).

    t1 = a_h(w, Pi w - w_h) - (f, Pi w - w_h)
    t2 = a_h(w - Pi w, w - Pi w)
    t3 = a_h(w - Pi w, w_h - Pi w)
    t4 = 2 (f, Pi w - w)
    t5 = 2 a_h(w - Pi w, Pi w)

    ``w_h`` must be the Galerkin solution for ``f``; the identity uses the
    discrete equations and does not hold for other discrete fields.
    """
    mesh = mesh or w_h.mesh
    rule = rule or square_rule(NORM_ORDER)
    pi_w = interpolate_global(w, mesh, w_h.dofmap)
    W = sample(w, mesh, rule, (0, 2))
    P = sample(pi_w, mesh, rule, (0, 2))
    Wh = sample(w_h, mesh, rule, (0, 2))
    X, Y = mesh.quadrature_points(rule)
    F = Samples({(0, 0): f(X, Y)})
    a = lambda A, B: bilinear_ah(A, B, mesh, rule)  # noqa: E731
    l2 = lambda A, B: inner_l2(A, B, mesh, rule)  # noqa: E731
    E = W - P
    rep = IdentityReport(
        lhs=-l2(F, W - Wh),
        t1=a(W, P - Wh) - l2(F, P - Wh),
        t2=a(E, E),
        t3=a(E, Wh - P),
        t4=2.0 * l2(F, P - W),
        t5=2.0 * a(E, P),
    )
    if raise_on_violation and rep.residual > rep.tolerance:
        raise IdentityViolationError(
            f"identity residual {rep.residual:.3e} exceeds {rep.tolerance:.3e}; check assembly and solver"
        )
    return rep


# -- rates --------------------------------------------------------------------

def observed_orders(hs, errs) -> list[float | None]:
    """log2-style rates between consecutive levels; None on the first level."""
    out: list[float | None] = [None]
    for (h0, e0), (h1, e1) in zip(zip(hs, errs), zip(hs[1:], errs[1:])):
        if e0 > 0 and e1 > 0:
            out.append(float(np.log(e0 / e1) / np.log(h0 / h1)))
        else:
            out.append(float("nan"))
    return out


def _ratios(reports, attr):
    if len(reports) < 2 or len({r.h for r in reports}) < 2:
        raise ValueError("need at least two reports at distinct mesh sizes")
    return [(r.h, getattr(r, attr) / r.h ** 2) for r in reports]


def lower_bound_ratio(reports) -> list[tuple[float, float]]:
    """(h, err_L2 / h^2) per level. Stabilizing ratios witness an h^2 lower bound."""
    return _ratios(reports, "err_L2")


def h1_lower_bound(reports) -> list[tuple[float, float]]:
    """(h, err_H1 / h^2) per level for the broken H1 seminorm."""
    return _ratios(reports, "err_H1_broken")


def ratio_variation(ratios) -> float:
    """Relative change of the ratio between the two finest levels."""
    (_, r0), (_, r1) = ratios[-2], ratios[-1]
    return abs(r1 - r0) / abs(r0) if r0 else float("inf")


__all__ = [
    "DegenerateSolutionError",
    "ErrorReport",
    "ExpansionReport",
    "IdentityReport",
    "IdentityViolationError",
    "Samples",
    "bilinear_ah",
    "broken_norm",
    "consistency_error",
    "cross_term",
    "dominant_term",
    "error_report",
    "h1_lower_bound",
    "identity_check",
    "inner_l2",
    "lemma41_expansion_check",
    "lower_bound_ratio",
    "mixed_term",
    "observed_orders",
    "ratio_variation",
    "sample",
    "seminorm",
]
