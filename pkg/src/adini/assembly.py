"""Stiffness and load for a_h(u, v) = (Hess_h u, Hess_h v), and SPD solvers."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .mesh import DiscreteField, DofMap, Mesh
from .quadrature import QuadRule2D, square_rule
from .reference import CellGeometry, ReferenceBasis, build_nodal_basis, exact_hessian_gram

log = logging.getLogger(__name__)

ASSEMBLY_ORDER = 4
LOAD_ORDER = 6


class NotSPDError(np.linalg.LinAlgError):
    pass


class NoConvergenceError(RuntimeError):
    def __init__(self, msg, residual):
        super().__init__(msg)
        self.residual = residual


@dataclass
class SymBandMatrix:
    """Symmetric banded matrix in LAPACK upper storage: ``bands[b + i - j, j] = A[i, j]``."""

    bands: np.ndarray

    @property
    def n(self) -> int:
        return self.bands.shape[1]

    @property
    def bandwidth(self) -> int:
        return self.bands.shape[0] - 1

    @classmethod
    def from_dense(cls, A) -> "SymBandMatrix":
        A = np.asarray(A)
        n = A.shape[0]
        nz = np.nonzero(A)
        b = int(np.max(np.abs(nz[0] - nz[1]), initial=0))
        bands = np.zeros((b + 1, n), dtype=A.dtype)
        for d in range(b + 1):
            bands[b - d, d:] = np.diagonal(A, d)
        return cls(bands)

    def diagonal(self) -> np.ndarray:
        return self.bands[-1].copy()

    def matvec(self, x: np.ndarray) -> np.ndarray:
        b = self.bandwidth
        y = self.bands[b] * x
        for d in range(1, b + 1):
            u = self.bands[b - d, d:]
            y[:-d] += u * x[d:]
            y[d:] += u * x[:-d]
        return y

    __matmul__ = matvec

    def to_dense(self) -> np.ndarray:
        b, n = self.bandwidth, self.n
        A = np.zeros((n, n), dtype=self.bands.dtype)
        for d in range(b + 1):
            A += np.diag(self.bands[b - d, d:], d)
            if d:
                A += np.diag(self.bands[b - d, d:], -d)
        return A


@dataclass
class LinearSystem:
    """Galerkin system on the free DOFs.

    ``matrix_ext`` holds the same matrix in extended precision; when present
    it is used to compute residuals for iterative refinement.
    """

    matrix: SymBandMatrix
    rhs: np.ndarray
    dofmap: DofMap
    stats: dict = field(default_factory=dict)
    matrix_ext: SymBandMatrix | None = None


def local_stiffness(cell: CellGeometry, basis: ReferenceBasis | None = None,
                    rule: QuadRule2D | None = None) -> np.ndarray:
    """12x12 element matrix of the full Hessian product.

    Acts on physical-frame DOFs (value, d/dx, d/dy per vertex).
    """
    basis = basis or build_nodal_basis()
    rule = rule or square_rule(ASSEMBLY_ORDER)
    hx, hy = cell.hx, cell.hy
    w = rule.weights * hx * hy
    Bxx = basis.tabulate(rule.xi, rule.eta, 2, 0) / hx ** 2
    Bxy = basis.tabulate(rule.xi, rule.eta, 1, 1) / (hx * hy)
    Byy = basis.tabulate(rule.xi, rule.eta, 0, 2) / hy ** 2
    S = (Bxx * w) @ Bxx.T + 2.0 * (Bxy * w) @ Bxy.T + (Byy * w) @ Byy.T
    s = cell.dof_scale()
    S = s[:, None] * S * s[None, :]
    return 0.5 * (S + S.T)


def exact_local_stiffness(hx: float, hy: float, dtype=np.float64) -> np.ndarray:
    """Element matrix from exactly integrated reference Hessian products.

    Rational entries are rounded once into ``dtype``; same frame as
    :func:`local_stiffness`.
    """
    hx, hy = dtype(hx), dtype(hy)
    G = {ab: np.array(exact_hessian_gram(*ab), dtype=dtype) for ab in ((2, 0), (1, 1), (0, 2))}
    S = hx * hy * (G[2, 0] / hx ** 4 + 2 * G[1, 1] / (hx * hy) ** 2 + G[0, 2] / hy ** 4)
    s = np.tile(np.array([1, hx, hy], dtype=dtype), 4)
    return s[:, None] * S * s[None, :]


def local_load(cell: CellGeometry, basis: ReferenceBasis | None, f, rule: QuadRule2D | None = None) -> np.ndarray:
    """Entries (f, phi_k) over the cell, in the physical DOF frame."""
    basis = basis or build_nodal_basis()
    rule = rule or square_rule(LOAD_ORDER)
    x, y = cell.to_physical(rule.xi, rule.eta)
    phi = basis.tabulate(rule.xi, rule.eta)
    F = cell.hx * cell.hy * (phi @ (rule.weights * f(x, y)))
    return cell.dof_scale() * F


def _load_all_cells(mesh: Mesh, f, rule: QuadRule2D) -> np.ndarray:
    basis = build_nodal_basis()
    X, Y = mesh.quadrature_points(rule)
    phi = basis.tabulate(rule.xi, rule.eta)  # (12, nq)
    F = mesh.hx * mesh.hy * (f(X, Y) * rule.weights) @ phi.T  # (n_cells, 12)
    return F * np.tile([1.0, mesh.hx, mesh.hy], 4)


def _band_assemble(S: np.ndarray, idx: np.ndarray, n: int) -> SymBandMatrix:
    rows = np.repeat(idx, 12, axis=1).ravel()
    cols = np.tile(idx, (1, 12)).ravel()
    vals = np.broadcast_to(S.ravel(), (idx.shape[0], 144)).ravel()
    keep = (rows >= 0) & (cols >= 0) & (rows <= cols)
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    b = int((cols - rows).max(initial=0))
    bands = np.zeros((b + 1, n), dtype=S.dtype)
    # np.add.at accumulates in cell order, so the result is reproducible
    np.add.at(bands, (b + rows - cols, cols), vals)
    return SymBandMatrix(bands)


def assemble(mesh: Mesh, dofmap: DofMap, f, stiffness_rule: QuadRule2D | None = None,
             load_rule: QuadRule2D | None = None, extended: bool = True) -> LinearSystem:
    """Galerkin system on the free DOFs (constrained rows and columns dropped).

    With no ``stiffness_rule`` the element matrix is integrated exactly;
    otherwise it is computed by that quadrature rule.
    """
    n = dofmap.n_free
    if n == 0:
        return LinearSystem(SymBandMatrix(np.zeros((1, 0))), np.zeros(0), dofmap)
    load_rule = load_rule or square_rule(LOAD_ORDER)
    idx = dofmap.cell_free
    # uniform mesh: every cell has the same element matrix
    if stiffness_rule is None:
        S = exact_local_stiffness(mesh.hx, mesh.hy)
    else:
        S = local_stiffness(mesh.cell(0), rule=stiffness_rule)
    A = _band_assemble(S, idx, n)
    A_ext = None
    if extended:
        A_ext = _band_assemble(exact_local_stiffness(mesh.hx, mesh.hy, np.longdouble), idx, n)
    F = _load_all_cells(mesh, f, load_rule)
    rhs = np.zeros(n)
    ok = idx >= 0
    np.add.at(rhs, idx[ok], F[ok])
    return LinearSystem(A, rhs, dofmap, matrix_ext=A_ext)


def _rel_residual(A: SymBandMatrix, x, b) -> float:
    nb = np.linalg.norm(b)
    r = np.linalg.norm(A @ x - b)
    return float(r / nb) if nb > 0 else float(r)


def _refine(U, A_ext: SymBandMatrix, x, b, max_steps: int = 4):
    """Iterative refinement with residuals computed in extended precision."""
    b_ext = b.astype(np.longdouble)
    best = np.inf
    for step in range(max_steps):
        r = (b_ext - A_ext @ x.astype(np.longdouble)).astype(np.float64)
        rn = float(np.linalg.norm(r))
        if rn >= 0.5 * best:
            return x, step
        best = rn
        x = x + scipy.linalg.cho_solve_banded((U, False), r)
    return x, max_steps


def cholesky_solve(system: LinearSystem, tol: float = 1e-10) -> DiscreteField:
    """Banded Cholesky factorization, two triangular solves, then refinement."""
    A, b = system.matrix, system.rhs
    if A.n == 0:
        system.stats.update(solver="cholesky", pivot_min=np.inf, residual=0.0, refinement_steps=0)
        return DiscreteField(np.zeros(0), system.dofmap)
    try:
        U = scipy.linalg.cholesky_banded(A.bands, lower=False)
    except np.linalg.LinAlgError as exc:
        raise NotSPDError(f"stiffness matrix is not positive definite: {exc}") from exc
    pivots = U[-1] ** 2
    x = scipy.linalg.cho_solve_banded((U, False), b)
    if system.matrix_ext is not None:
        x, steps = _refine(U, system.matrix_ext, x, b)
    else:
        steps = 0
        if _rel_residual(A, x, b) > tol:
            x = x + scipy.linalg.cho_solve_banded((U, False), b - A @ x)
            steps = 1
    res = _rel_residual(A, x, b)
    if res > tol:
        log.warning("cholesky residual %.3e exceeds %.1e", res, tol)
    system.stats.update(solver="cholesky", pivot_min=float(pivots.min()), residual=res,
                        refinement_steps=steps)
    return DiscreteField(x, system.dofmap, info=dict(system.stats))


def cg_solve(system: LinearSystem, tol: float = 1e-12, max_iter: int | None = None) -> DiscreteField:
    """Jacobi-preconditioned conjugate gradients, stopped on relative residual."""
    A, b = system.matrix, system.rhs
    n = A.n
    max_iter = max_iter or max(100, 20 * n)
    x = np.zeros(n)
    nb = np.linalg.norm(b)
    if n == 0 or nb == 0:
        system.stats.update(solver="cg", iterations=0, residual=0.0)
        return DiscreteField(x, system.dofmap)
    dinv = 1.0 / A.diagonal()
    r = b.copy()
    z = dinv * r
    p = z.copy()
    rz = r @ z
    res = 1.0
    for it in range(1, max_iter + 1):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        res = np.linalg.norm(r) / nb
        if res <= tol:
            break
        z = dinv * r
        rz, rz_old = r @ z, rz
        p = z + (rz / rz_old) * p
    else:
        raise NoConvergenceError(f"CG did not converge in {max_iter} iterations", res)
    res = _rel_residual(A, x, b)
    system.stats.update(solver="cg", iterations=it, residual=res)
    return DiscreteField(x, system.dofmap, info=dict(system.stats))


SOLVERS = {"cholesky": cholesky_solve, "cg": cg_solve}
