"""Walk through the Adini element on the reference square.

Prints the nodal basis, shows what the interpolant does to quartic
monomials, and checks the local error expansion on one stretched cell.
"""

import numpy as np

from adini.diagnostics import lemma41_expansion_check, mixed_term
from adini.reference import (
    ADINI_EXPONENTS,
    P4_EXPONENTS,
    CellGeometry,
    LocalPoly12,
    LocalPolyP4,
    build_nodal_basis,
    interpolate_local,
)


def poly_str(coeffs, exponents):
    terms = []
    for c, (i, j) in zip(coeffs, exponents):
        if abs(c) < 1e-14:
            continue
        mono = "".join(s for s in (f"x^{i}" if i > 1 else "x" * i, f"y^{j}" if j > 1 else "y" * j))
        terms.append(f"{c:+.4g}{'*' + mono if mono else ''}")
    return " ".join(terms) or "0"


basis = build_nodal_basis()
labels = ["u", "u_x", "u_y"]
print("nodal basis (x, y stand for xi, eta):")
for k in range(12):
    print(f"  phi_{k:<2d} ({labels[k % 3]:>3} at vertex {k // 3}): {poly_str(basis.coeffs[k], ADINI_EXPONENTS)}")

print("\ninterpolating quartic monomials:")
for e in ((4, 0), (0, 4), (2, 2), (3, 1)):
    u = LocalPolyP4(np.array([1.0 if x == e else 0.0 for x in P4_EXPONENTS]))
    print(f"  Pi x^{e[0]} y^{e[1]} = {poly_str(interpolate_local(u).coeffs, ADINI_EXPONENTS)}")

rng = np.random.default_rng(7)
cell = CellGeometry(0.0, 0.0, 0.3, 1.2)
u = LocalPolyP4(rng.uniform(-1, 1, 15))
v = LocalPoly12(rng.uniform(-1, 1, 12))
lhs, rhs = lemma41_expansion_check(u, v, cell)
print(f"\nexpansion on a {2 * cell.hx:g} x {2 * cell.hy:g} cell:")
print(f"  (Hess(u - Pi u), Hess v) = {lhs:.15g}")
print(f"  closed form              = {rhs:.15g}")
print(f"  mixed-derivative part    = {mixed_term(u, v, cell):.2e}")
