"""Seeded property suites behind ``adini verify``.

Each suite returns a list of :class:`Check` results; a check passes when
its worst observed residual is within its tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import diagnostics as diag
from .assembly import cholesky_solve, assemble
from .fields import PolynomialField, biharmonic_rhs, solution_sine2
from .mesh import build_dofmap, build_mesh, interpolate_global
from .quadrature import MAX_POINTS, gauss_rule_1d, square_rule, tensor_rule
from .reference import (
    ADINI_EXPONENTS,
    P4_EXPONENTS,
    REFERENCE_CELL,
    CellGeometry,
    LocalPoly12,
    LocalPolyP4,
    build_nodal_basis,
    dense_derivative,
    dense_eval,
    dof_matrix,
    interpolate_local,
    p4_project,
)


@dataclass(frozen=True)
class Check:
    name: str
    worst: float
    tol: float
    upper: bool = True  # pass when worst <= tol; otherwise when worst >= tol

    @property
    def passed(self) -> bool:
        return bool(self.worst <= self.tol) if self.upper else bool(self.worst >= self.tol)

    def line(self) -> str:
        rel = "<=" if self.upper else ">="
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.worst:.3e} ({rel} {self.tol:.1e})"


def random_cell(rng) -> CellGeometry:
    hx, hy = rng.uniform(0.1, 2.0, size=2)
    xc, yc = rng.uniform(-1.0, 1.0, size=2)
    return CellGeometry(xc, yc, hx, hy)


def suite_basis(rng, trials):
    basis = build_nodal_basis()
    D = dof_matrix()
    dual = D @ basis.coeffs.T
    off = np.abs(dual - np.eye(12)).max()
    worst_rep = 0.0
    worst_struct = 0.0
    for _ in range(trials):
        v = LocalPoly12(rng.uniform(-1, 1, 12))
        worst_rep = max(worst_rep, np.abs(interpolate_local(v).coeffs - v.coeffs).max())
        c = v.dense()
        # second derivatives stay in span{1, xi, eta, xi eta} (pure) or add xi^2, eta^2 (mixed)
        for a, b, allowed in (
            (2, 0, {(0, 0), (1, 0), (0, 1), (1, 1)}),
            (0, 2, {(0, 0), (1, 0), (0, 1), (1, 1)}),
            (1, 1, {(0, 0), (1, 0), (0, 1), (2, 0), (0, 2)}),
        ):
            d = dense_derivative(c, a, b)
            for (i, j), val in np.ndenumerate(d):
                if (i, j) not in allowed:
                    worst_struct = max(worst_struct, abs(val))
    return [
        Check("DOF duality, max |D C^T - I|", off, 1e-12),
        Check("DOF matrix condition number", float(np.linalg.cond(D)), 1e3),
        Check("reproduction of Q_Ad", worst_rep, 1e-12),
        Check("second-derivative structure", worst_struct, 0.0),
    ]


def suite_interp(rng, trials):
    quartics = {
        "xi^4": ((4, 0), {(2, 0): 2.0, (0, 0): -1.0}),
        "eta^4": ((0, 4), {(0, 2): 2.0, (0, 0): -1.0}),
        "xi^2 eta^2": ((2, 2), {(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0}),
    }
    checks = []
    for label, (mono, expected) in quartics.items():
        u = LocalPolyP4(np.array([1.0 if e == mono else 0.0 for e in P4_EXPONENTS]))
        want = np.array([expected.get(e, 0.0) for e in ADINI_EXPONENTS])
        checks.append(Check(f"Pi_K {label}", np.abs(interpolate_local(u).coeffs - want).max(), 1e-12))

    worst = 0.0
    for _ in range(trials):
        cell = random_cell(rng)
        c = np.zeros((4, 4))
        for i in range(4):
            for j in range(4 - i):
                c[i, j] = rng.uniform(-1, 1)
        v = PolynomialField(c)
        pv = interpolate_local(v, cell)
        xi, eta = rng.uniform(-1, 1, size=(2, 5))
        x, y = cell.to_physical(xi, eta)
        for a, b in ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0)):
            got = pv(xi, eta, a, b) / (cell.hx ** a * cell.hy ** b)
            exact = v(x, y, a, b)
            worst = max(worst, float(np.max(np.abs(got - exact) / (1 + np.abs(exact)))))
    checks.append(Check("chain rule, random cubics", worst, 1e-12))

    w = solution_sine2()
    errs = {}
    for n in (8, 16):
        m = build_mesh(1, 1, n, n)
        pi_w = interpolate_global(w, m, build_dofmap(m))
        errs[n] = [diag.broken_norm(w, pi_w, l, m) for l in (1, 2, 3)]
    for k, l in enumerate((1, 2, 3)):
        order = np.log2(errs[8][k] / errs[16][k])
        checks.append(Check(f"interpolation order, H^{l} (expect {4 - l})", abs(order - (4 - l)), 0.3))
    return checks


def suite_expansion(rng, trials):
    u = LocalPolyP4(np.array([1.0 if e == (2, 2) else 0.0 for e in P4_EXPONENTS]))
    v = LocalPoly12(np.array([1.0 if e == (2, 0) else 0.0 for e in ADINI_EXPONENTS]))
    lhs, rhs = diag.lemma41_expansion_check(u, v, REFERENCE_CELL)
    checks = [Check("frozen case u=xi^2 eta^2, v=xi^2 -> -32/3", max(abs(lhs + 32 / 3), abs(rhs + 32 / 3)), 1e-12)]
    worst = 0.0
    worst_mixed = 0.0
    for _ in range(trials):
        cell = random_cell(rng)
        u = LocalPolyP4(rng.uniform(-1, 1, 15))
        v = LocalPoly12(rng.uniform(-1, 1, 12))
        lhs, rhs = diag.lemma41_expansion_check(u, v, cell)
        worst = max(worst, abs(lhs - rhs) / (1 + abs(lhs)))
        worst_mixed = max(worst_mixed, abs(diag.mixed_term(u, v, cell)))
    checks.append(Check(f"expansion identity, {trials} random trials", worst, 1e-11))
    checks.append(Check("mixed Hessian term vanishes", worst_mixed, 1e-12))
    return checks


def commuting_residual(w, n: int = 8, rule_order: int = 6, check_order: int = 10) -> float:
    """max over cells and order-4 derivatives of |d^4 P_K w - avg_K d^4 w| / (1 + |avg|)."""
    m = build_mesh(w.domain[0], w.domain[1], n, n)
    prule, crule = square_rule(rule_order), square_rule(check_order)
    X, Y = m.quadrature_points(crule)
    cw = crule.weights / crule.weights.sum()
    fourth = [(4 - j, j) for j in range(5)]
    avg = {ab: w(X, Y, *ab) @ cw for ab in fourth}
    worst = 0.0
    for k in range(m.n_cells):
        cell = m.cell(k)
        P = p4_project(w, cell, prule)
        c = P.dense()
        for a, b in fourth:
            got = float(dense_eval(dense_derivative(c, a, b), 0.0, 0.0)) / (cell.hx ** a * cell.hy ** b)
            worst = max(worst, abs(got - avg[a, b][k]) / (1 + abs(avg[a, b][k])))
    return worst


def suite_commuting(rng, trials):
    worst_rep = 0.0
    for _ in range(trials):
        cell = random_cell(rng)
        u = LocalPolyP4(rng.uniform(-1, 1, 15))
        # the same polynomial in physical coordinates
        field = _physical(u, cell)
        worst_rep = max(worst_rep, np.abs(p4_project(field, cell, square_rule(6)).coeffs - u.coeffs).max())
    return [
        Check("P_K reproduces P4", worst_rep, 1e-10),
        Check("commuting property, sine2 on 8x8", commuting_residual(solution_sine2()), 1e-9),
    ]


def _physical(u: LocalPolyP4, cell: CellGeometry) -> PolynomialField:
    """Physical-coordinate polynomial equal to reference polynomial ``u`` on ``cell``."""
    c = u.dense()
    out = np.zeros_like(c)
    px = [np.array([1.0])]
    py = [np.array([1.0])]
    for _ in range(c.shape[0]):
        px.append(npoly.polymul(px[-1], [-cell.xc / cell.hx, 1 / cell.hx]))
        py.append(npoly.polymul(py[-1], [-cell.yc / cell.hy, 1 / cell.hy]))
    for (i, j), cij in np.ndenumerate(c):
        if cij:
            out[: i + 1, : j + 1] += cij * np.outer(px[i], py[j])
    return PolynomialField(out)


def identity_level(n: int = 8):
    w = solution_sine2()
    f = biharmonic_rhs(w)
    m = build_mesh(1, 1, n, n)
    dm = build_dofmap(m)
    w_h = cholesky_solve(assemble(m, dm, f))
    return diag.identity_check(w, f, w_h, raise_on_violation=False)


def suite_identity(rng, trials):
    rep = identity_level(8)
    return [Check("error identity on 8x8 sine2, residual / (1 + |lhs|)", rep.residual / (1 + abs(rep.lhs)), 1e-8)]


def suite_quadrature(rng, trials):
    worst_exact = 0.0
    worst_sum = 0.0
    min_weight = np.inf
    for n in range(1, MAX_POINTS + 1):
        r = gauss_rule_1d(n)
        worst_sum = max(worst_sum, abs(r.weights.sum() - 2.0))
        min_weight = min(min_weight, r.weights.min())
        for k in range(2 * n):
            exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
            worst_exact = max(worst_exact, abs(r.weights @ r.points ** k - exact))
    worst_2d = 0.0
    for _ in range(trials):
        nx, ny = rng.integers(1, 9, size=2)
        rule = tensor_rule(gauss_rule_1d(int(nx)), gauss_rule_1d(int(ny)))
        c = rng.uniform(-1, 1, size=(2 * nx, 2 * ny))
        mx = np.array([2.0 / (k + 1) if k % 2 == 0 else 0.0 for k in range(2 * nx)])
        my = np.array([2.0 / (k + 1) if k % 2 == 0 else 0.0 for k in range(2 * ny)])
        exact = mx @ c @ my
        got = rule.weights @ dense_eval(c, rule.xi, rule.eta)
        worst_2d = max(worst_2d, abs(got - exact) / max(1.0, abs(exact)))
    return [
        Check("1D exactness up to degree 2n-1", worst_exact, 1e-13),
        Check("1D weights sum to 2", worst_sum, 1e-14),
        Check("weights positive (min weight)", float(min_weight), 1e-12, upper=False),
        Check("tensor rule exactness", worst_2d, 1e-12),
    ]


SUITES = {
    "basis": suite_basis,
    "interp": suite_interp,
    "expansion": suite_expansion,
    "commuting": suite_commuting,
    "identity": suite_identity,
    "quadrature": suite_quadrature,
}


def run_suite(name: str, seed: int = 0, trials: int = 200) -> list[Check]:
    try:
        suite = SUITES[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; available: {', '.join(SUITES)}") from None
    return suite(np.random.default_rng(seed), trials)

