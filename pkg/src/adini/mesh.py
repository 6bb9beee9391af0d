"""Uniform rectangular meshes and the global Adini space.

Nodes are numbered lexicographically by (y, x): node (i, j) has index
``j * (nx + 1) + i``; cell (i, j) has index ``j * nx + i``. Global DOF
``3 * node + c`` is the value (c=0), d/dx (c=1) or d/dy (c=2) at a node.
All three DOFs vanish on boundary nodes; free DOFs keep the node order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .fields import AnalyticField
from .reference import CellGeometry, build_nodal_basis, monomial_table, ADINI_EXPONENTS


class BoundaryDataWarning(UserWarning):
    """Interpolated data does not vanish at the boundary nodes."""


@dataclass(frozen=True)
class Mesh:
    Lx: float
    Ly: float
    nx: int
    ny: int

    @property
    def hx(self) -> float:
        return self.Lx / (2 * self.nx)

    @property
    def hy(self) -> float:
        return self.Ly / (2 * self.ny)

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(0.0, self.Lx, self.nx + 1)
        y = np.linspace(0.0, self.Ly, self.ny + 1)
        X, Y = np.meshgrid(x, y)
        return np.column_stack([X.ravel(), Y.ravel()])

    @cached_property
    def cells(self) -> np.ndarray:
        """Vertex indices per cell, counterclockwise from the lower-left corner."""
        j, i = np.divmod(np.arange(self.n_cells), self.nx)
        ll = j * (self.nx + 1) + i
        return np.column_stack([ll, ll + 1, ll + self.nx + 2, ll + self.nx + 1])

    @cached_property
    def centers(self) -> np.ndarray:
        j, i = np.divmod(np.arange(self.n_cells), self.nx)
        return np.column_stack([(2 * i + 1) * self.hx, (2 * j + 1) * self.hy])

    def cell(self, k: int) -> CellGeometry:
        if not 0 <= k < self.n_cells:
            raise ValueError(f"cell index {k} out of range 0..{self.n_cells - 1}")
        xc, yc = self.centers[k]
        return CellGeometry(float(xc), float(yc), self.hx, self.hy)

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        j, i = np.divmod(np.arange(self.n_nodes), self.nx + 1)
        return (i == 0) | (i == self.nx) | (j == 0) | (j == self.ny)

    def quadrature_points(self, rule) -> tuple[np.ndarray, np.ndarray]:
        """Physical quadrature points of every cell, each of shape (n_cells, nq)."""
        X = self.centers[:, :1] + self.hx * rule.xi[None, :]
        Y = self.centers[:, 1:] + self.hy * rule.eta[None, :]
        return X, Y


def build_mesh(Lx: float, Ly: float, nx: int, ny: int) -> Mesh:
    if not (Lx > 0 and Ly > 0):
        raise ValueError("domain lengths must be positive")
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ValueError("cell counts must be positive integers")
    return Mesh(float(Lx), float(Ly), int(nx), int(ny))


@dataclass(frozen=True)
class DofMap:
    mesh: Mesh
    node_dofs: np.ndarray      # (n_nodes, 3) global DOF indices
    boundary: np.ndarray       # (n_dofs,) True where constrained
    free_index: np.ndarray     # (n_dofs,) free index or -1
    cell_dofs: np.ndarray      # (n_cells, 12) global DOF indices, local order
    cell_free: np.ndarray      # (n_cells, 12) free index or -1

    @property
    def n_dofs(self) -> int:
        return len(self.boundary)

    @property
    def n_free(self) -> int:
        return int(np.count_nonzero(~self.boundary))

    @property
    def free_dofs(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)


def build_dofmap(mesh: Mesh) -> DofMap:
    node_dofs = 3 * np.arange(mesh.n_nodes)[:, None] + np.arange(3)[None, :]
    boundary = np.repeat(mesh.boundary_nodes, 3)
    free_index = np.full(boundary.shape, -1)
    free_index[~boundary] = np.arange(np.count_nonzero(~boundary))
    cell_dofs = node_dofs[mesh.cells].reshape(mesh.n_cells, 12)
    return DofMap(mesh, node_dofs, boundary, free_index, cell_dofs, free_index[cell_dofs])


@dataclass
class DiscreteField:
    """Element of W_h given by its free DOF values (constrained DOFs are zero)."""

    values: np.ndarray
    dofmap: DofMap
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.dofmap.n_free,):
            raise ValueError(f"expected {self.dofmap.n_free} free values, got shape {self.values.shape}")

    @property
    def mesh(self) -> Mesh:
        return self.dofmap.mesh

    def full_vector(self) -> np.ndarray:
        u = np.zeros(self.dofmap.n_dofs)
        u[self.dofmap.free_dofs] = self.values
        return u

    def cell_dofs(self) -> np.ndarray:
        """Physical-frame local DOFs, shape (n_cells, 12)."""
        return self.full_vector()[self.dofmap.cell_dofs]

    def cell_coeffs(self) -> np.ndarray:
        """Reference-frame monomial coefficients on every cell, shape (n_cells, 12)."""
        m = self.mesh
        scale = np.tile([1.0, m.hx, m.hy], 4)
        return (self.cell_dofs() * scale) @ build_nodal_basis().coeffs

    def __add__(self, other):
        return DiscreteField(self.values + other.values, self.dofmap)

    def __sub__(self, other):
        return DiscreteField(self.values - other.values, self.dofmap)

    def __mul__(self, s):
        return DiscreteField(s * self.values, self.dofmap)

    __rmul__ = __mul__


def zero_field(dofmap: DofMap) -> DiscreteField:
    return DiscreteField(np.zeros(dofmap.n_free), dofmap)


def interpolate_global(w, mesh: Mesh, dofmap: DofMap, tol: float = 1e-10) -> DiscreteField:
    """Nodal interpolant: value and gradient of ``w`` at every free node."""
    P = mesh.nodes
    x, y = P[:, 0], P[:, 1]
    nodal = np.column_stack([w(x, y, 0, 0), w(x, y, 1, 0), w(x, y, 0, 1)])
    bad = np.abs(nodal[mesh.boundary_nodes]).max(initial=0.0)
    if bad > tol:
        warnings.warn(
            f"interpolated field is {bad:.3e} at boundary nodes; constrained DOFs are set to zero",
            BoundaryDataWarning,
            stacklevel=2,
        )
    return DiscreteField(nodal.ravel()[dofmap.free_dofs], dofmap)


def eval_discrete(u: DiscreteField, cell: int, point, derivative=(0, 0)):
    """Physical derivative (a, b) of ``u`` at reference point (xi, eta) of a cell."""
    m = u.mesh
    if not 0 <= cell < m.n_cells:
        raise ValueError(f"cell index {cell} out of range 0..{m.n_cells - 1}")
    xi, eta = point
    a, b = derivative
    coeffs = u.cell_coeffs()[cell]
    vals = coeffs @ monomial_table(ADINI_EXPONENTS, xi, eta, a, b)
    vals = vals / (m.hx ** a * m.hy ** b)
    return float(vals[0]) if np.ndim(xi) == 0 and np.ndim(eta) == 0 else vals


def locate_cell(mesh: Mesh, x, y) -> np.ndarray:
    i = np.clip(np.floor(np.asarray(x) / (2 * mesh.hx)).astype(int), 0, mesh.nx - 1)
    j = np.clip(np.floor(np.asarray(y) / (2 * mesh.hy)).astype(int), 0, mesh.ny - 1)
    return j * mesh.nx + i


class DiscreteAsField(AnalyticField):
    """Piecewise evaluation of a discrete field at physical points."""

    max_order = 4

    def __init__(self, u: DiscreteField):
        super().__init__("discrete", (u.mesh.Lx, u.mesh.Ly))
        self.u = u
        self._coeffs = u.cell_coeffs()

    def _eval(self, x, y, a, b):
        m = self.u.mesh
        k = locate_cell(m, x, y)
        xi = (x - m.centers[k, 0]) / m.hx
        eta = (y - m.centers[k, 1]) / m.hy
        flat = monomial_table(ADINI_EXPONENTS, xi.ravel(), eta.ravel(), a, b)
        vals = np.einsum("pm,mp->p", self._coeffs[k.ravel()], flat)
        return (vals / (m.hx ** a * m.hy ** b)).reshape(x.shape)
