"""Adini shape space on the reference square [-1, 1]^2.

Polynomials are stored as monomial coefficient vectors in the reference
coordinates (xi, eta). For arithmetic they are expanded into dense 2D
arrays ``c[i, j]`` multiplying ``xi**i * eta**j``, which is the layout
used by :mod:`numpy.polynomial.polynomial`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np
from numpy.polynomial import polynomial as npoly

# Graded lexicographic order over P3, then the two Adini extras.
ADINI_EXPONENTS: tuple[tuple[int, int], ...] = (
    (0, 0),
    (1, 0), (0, 1),
    (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3),
    (3, 1), (1, 3),
)

P4_EXPONENTS: tuple[tuple[int, int], ...] = tuple(
    (d - j, j) for d in range(5) for j in range(d + 1)
)

# Counterclockwise from (-1, -1). Local DOF 3*v + c is component c
# (value, d/dxi, d/deta) at vertex v.
VERTICES: tuple[tuple[float, float], ...] = ((-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0))


class UnisolvenceError(RuntimeError):
    """The DOF matrix of the shape space is numerically singular."""


@dataclass(frozen=True)
class CellGeometry:
    """Axis-aligned rectangle with center (xc, yc) and HALF-lengths hx, hy."""

    xc: float
    yc: float
    hx: float
    hy: float

    def __post_init__(self):
        if not (self.hx > 0 and self.hy > 0):
            raise ValueError("cell half-lengths must be positive")

    @property
    def area(self) -> float:
        return 4.0 * self.hx * self.hy

    def to_physical(self, xi, eta):
        return self.xc + self.hx * np.asarray(xi), self.yc + self.hy * np.asarray(eta)

    def to_reference(self, x, y):
        return (np.asarray(x) - self.xc) / self.hx, (np.asarray(y) - self.yc) / self.hy

    def vertices(self) -> np.ndarray:
        """Physical vertex coordinates in local DOF order, shape (4, 2)."""
        v = np.array(VERTICES)
        return np.column_stack([self.xc + self.hx * v[:, 0], self.yc + self.hy * v[:, 1]])

    def dof_scale(self) -> np.ndarray:
        """Factors taking (value, d/dx, d/dy) DOFs to (value, d/dxi, d/deta)."""
        return np.tile([1.0, self.hx, self.hy], 4)


REFERENCE_CELL = CellGeometry(0.0, 0.0, 1.0, 1.0)


# -- dense polynomial helpers -------------------------------------------------

def to_dense(coeffs, exponents) -> np.ndarray:
    deg = max(max(i, j) for i, j in exponents)
    c = np.zeros((deg + 1, deg + 1))
    for ck, (i, j) in zip(coeffs, exponents):
        c[i, j] += ck
    return c


def from_dense(c: np.ndarray, exponents) -> np.ndarray:
    """Read coefficients off a dense array; raises if c has terms outside ``exponents``."""
    out = np.array([c[i, j] if i < c.shape[0] and j < c.shape[1] else 0.0 for i, j in exponents])
    rest = c.copy()
    for i, j in exponents:
        if i < c.shape[0] and j < c.shape[1]:
            rest[i, j] = 0.0
    if np.any(rest != 0.0):
        raise ValueError("polynomial has monomials outside the target space")
    return out


def dense_derivative(c: np.ndarray, a: int = 0, b: int = 0) -> np.ndarray:
    if a:
        c = npoly.polyder(c, a, axis=0) if a < c.shape[0] else np.zeros((1, c.shape[1]))
    if b:
        c = npoly.polyder(c, b, axis=1) if b < c.shape[1] else np.zeros((c.shape[0], 1))
    return c


def dense_eval(c: np.ndarray, xi, eta):
    return npoly.polyval2d(np.asarray(xi, dtype=float), np.asarray(eta, dtype=float), c)


def _moments(n: int) -> np.ndarray:
    """Integrals of t^k over [-1, 1] for k < n."""
    k = np.arange(n)
    return np.where(k % 2 == 0, 2.0 / (k + 1), 0.0)


def dense_integral(c: np.ndarray) -> float:
    """Exact integral over the reference square."""
    return float(_moments(c.shape[0]) @ c @ _moments(c.shape[1]))


def dense_product(c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    n0 = c1.shape[0] + c2.shape[0] - 1
    n1 = c1.shape[1] + c2.shape[1] - 1
    out = np.zeros((n0, n1))
    for i in range(c1.shape[0]):
        for j in range(c1.shape[1]):
            if c1[i, j]:
                out[i:i + c2.shape[0], j:j + c2.shape[1]] += c1[i, j] * c2
    return out


def monomial_table(exponents, xi, eta, a: int = 0, b: int = 0) -> np.ndarray:
    """Derivative (a, b) of each monomial at the given points, shape (nmono, npts)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    rows = []
    for i, j in exponents:
        if i < a or j < b:
            rows.append(np.zeros_like(xi))
            continue
        coef = (factorial(i) // factorial(i - a)) * (factorial(j) // factorial(j - b))
        rows.append(coef * xi ** (i - a) * eta ** (j - b))
    return np.array(rows)


# -- local polynomials --------------------------------------------------------

@dataclass(frozen=True)
class _LocalPoly:
    coeffs: np.ndarray
    exponents = ()

    def dense(self) -> np.ndarray:
        return to_dense(self.coeffs, self.exponents)

    def __call__(self, xi, eta, a: int = 0, b: int = 0):
        """Reference-frame derivative d^(a+b)/dxi^a deta^b at (xi, eta)."""
        return dense_eval(dense_derivative(self.dense(), a, b), xi, eta)

    def reference_dofs(self) -> np.ndarray:
        """The 12 Adini DOFs (value, d/dxi, d/deta per vertex) of this polynomial."""
        c = self.dense()
        cx, cy = dense_derivative(c, 1, 0), dense_derivative(c, 0, 1)
        out = []
        for X, Y in VERTICES:
            out += [dense_eval(c, X, Y), dense_eval(cx, X, Y), dense_eval(cy, X, Y)]
        return np.array(out, dtype=float)


@dataclass(frozen=True)
class LocalPoly12(_LocalPoly):
    """Member of Q_Ad in reference coordinates (coefficients over ADINI_EXPONENTS)."""

    exponents = ADINI_EXPONENTS

    @classmethod
    def from_dense(cls, c: np.ndarray) -> "LocalPoly12":
        return cls(from_dense(c, ADINI_EXPONENTS))


@dataclass(frozen=True)
class LocalPolyP4(_LocalPoly):
    """Polynomial of total degree <= 4 in reference coordinates (over P4_EXPONENTS)."""

    exponents = P4_EXPONENTS

    @classmethod
    def from_dense(cls, c: np.ndarray) -> "LocalPolyP4":
        return cls(from_dense(c, P4_EXPONENTS))


# -- nodal basis --------------------------------------------------------------

def dof_matrix(exponents=ADINI_EXPONENTS) -> np.ndarray:
    """D[i, m] = DOF i applied to monomial m."""
    rows = []
    for X, Y in VERTICES:
        for a, b in ((0, 0), (1, 0), (0, 1)):
            rows.append(monomial_table(exponents, X, Y, a, b)[:, 0])
    return np.array(rows)


@dataclass(frozen=True)
class ReferenceBasis:
    """Row k of ``coeffs`` holds the monomial coefficients of shape function k."""

    coeffs: np.ndarray
    exponents: tuple = ADINI_EXPONENTS

    def dense(self, k: int) -> np.ndarray:
        self._check(k)
        return to_dense(self.coeffs[k], self.exponents)

    def tabulate(self, xi, eta, a: int = 0, b: int = 0) -> np.ndarray:
        """Derivative (a, b) of all 12 shape functions at points, shape (12, npts)."""
        return self.coeffs @ monomial_table(self.exponents, xi, eta, a, b)

    def eval(self, k: int, xi, eta, a: int = 0, b: int = 0):
        self._check(k)
        return self.coeffs[k] @ monomial_table(self.exponents, xi, eta, a, b)

    def _check(self, k):
        if not 0 <= k < 12:
            raise ValueError(f"shape function index must be in 0..11, got {k}")


@lru_cache(maxsize=1)
def build_nodal_basis() -> ReferenceBasis:
    D = dof_matrix()
    if np.linalg.cond(D) > 1e8:
        raise UnisolvenceError("Adini DOF matrix is singular")
    # D @ coeffs.T = I
    coeffs = np.linalg.solve(D, np.eye(12)).T
    coeffs[np.abs(coeffs) < 1e-14] = 0.0
    coeffs.setflags(write=False)
    return ReferenceBasis(coeffs)


def eval_shape(basis: ReferenceBasis, k: int, point, derivative=(0, 0)) -> float:
    xi, eta = point
    a, b = derivative
    if a + b > 4:
        raise ValueError("derivative order above 4 is not supported")
    if abs(xi) > 1 + 1e-12 or abs(eta) > 1 + 1e-12:
        raise ValueError("point lies outside the reference square")
    return float(basis.eval(k, xi, eta, a, b)[0])


def interpolate_local(v, cell: CellGeometry = REFERENCE_CELL, basis: ReferenceBasis | None = None) -> LocalPoly12:
    """Canonical Adini interpolant, returned in reference coordinates.

    ``v`` is either a reference-frame polynomial (``LocalPoly12``/``LocalPolyP4``,
    in which case ``cell`` is irrelevant) or a physical field callable as
    ``v(x, y, a, b)``; for the latter, physical gradients are scaled by the
    half-lengths to give reference derivatives.
    """
    basis = basis or build_nodal_basis()
    if isinstance(v, _LocalPoly):
        dofs = v.reference_dofs()
    else:
        P = cell.vertices()
        x, y = P[:, 0], P[:, 1]
        dofs = np.column_stack([v(x, y, 0, 0), v(x, y, 1, 0), v(x, y, 0, 1)]).ravel()
        dofs = dofs * cell.dof_scale()
    return LocalPoly12(basis.coeffs.T @ dofs)


def p4_project(v, cell: CellGeometry, rule) -> LocalPolyP4:
    """Degree-4 polynomial sharing all cell averages of derivatives of order <= 4 with v.

    Averages of physical derivatives are converted to reference ones
    (factor hx**a * hy**b) and the moment system is solved from order 4 down.
    """
    x, y = cell.to_physical(rule.xi, rule.eta)
    w = rule.weights / rule.weights.sum()
    target = {}
    for a, b in P4_EXPONENTS:
        target[a, b] = cell.hx ** a * cell.hy ** b * float(w @ v(x, y, a, b))
    c = np.zeros((5, 5))
    m = _moments(5) / 2.0  # averages of t^k over [-1, 1]
    for order in range(4, -1, -1):
        for a in range(order, -1, -1):
            b = order - a
            d = dense_derivative(c, a, b)
            known = float(m[: d.shape[0]] @ d @ m[: d.shape[1]])
            c[a, b] = (target[a, b] - known) / (factorial(a) * factorial(b))
    return LocalPolyP4.from_dense(c)


# -- exact rational forms -----------------------------------------------------

def _solve_exact(A, B):
    """Gauss-Jordan elimination over the rationals: returns X with A X = B."""
    n = len(A)
    M = [[Fraction(v) for v in A[i]] + [Fraction(v) for v in B[i]] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                fac = M[r][col]
                M[r] = [a - fac * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


@lru_cache(maxsize=1)
def exact_basis_coeffs() -> tuple[tuple[Fraction, ...], ...]:
    """Rational shape-function coefficients; row k matches ``build_nodal_basis().coeffs[k]``."""
    D = [[int(round(v)) for v in row] for row in dof_matrix()]
    eye = [[int(i == j) for j in range(12)] for i in range(12)]
    X = _solve_exact(D, eye)  # columns are shape functions
    return tuple(tuple(X[m][k] for m in range(12)) for k in range(12))


def _exact_moment(k: int) -> Fraction:
    return Fraction(2, k + 1) if k % 2 == 0 else Fraction(0)


@lru_cache(maxsize=None)
def exact_hessian_gram(a: int, b: int) -> tuple[tuple[Fraction, ...], ...]:
    """G[k][l] = integral over [-1,1]^2 of d^(a,b) phi_k * d^(a,b) phi_l, exactly."""
    C = exact_basis_coeffs()
    fall = lambda i, n: factorial(i) // factorial(i - n) if i >= n else 0  # noqa: E731
    # derivative of each monomial as (coef, i - a, j - b)
    dm = [(fall(i, a) * fall(j, b), i - a, j - b) for i, j in ADINI_EXPONENTS]
    M = [[Fraction(0)] * 12 for _ in range(12)]
    for m, (cm, im, jm) in enumerate(dm):
        for n, (cn, in_, jn) in enumerate(dm):
            if cm and cn:
                M[m][n] = cm * cn * _exact_moment(im + in_) * _exact_moment(jm + jn)
    G = [[sum(C[k][m] * M[m][n] * C[l][n] for m in range(12) for n in range(12) if M[m][n])
          for l in range(12)] for k in range(12)]
    return tuple(tuple(row) for row in G)
