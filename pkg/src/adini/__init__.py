"""Adini nonconforming element for the clamped biharmonic problem on uniform
rectangular meshes, with diagnostics measuring the interpolation expansion,
the error identity for (-f, w - w_h) and the h^2 lower bound of the L2 error.
"""

from .assembly import assemble, cg_solve, cholesky_solve, local_load, local_stiffness
from .diagnostics import (
    broken_norm,
    consistency_error,
    cross_term,
    error_report,
    h1_lower_bound,
    identity_check,
    lemma41_expansion_check,
    lower_bound_ratio,
)
from .fields import biharmonic_rhs, get_solution, solution_poly4, solution_sine2, weak_form_check
from .mesh import DiscreteField, build_dofmap, build_mesh, eval_discrete, interpolate_global
from .quadrature import gauss_rule_1d, integrate_on_cell, tensor_rule
from .reference import CellGeometry, build_nodal_basis, eval_shape, interpolate_local, p4_project
from .study import StudyConfig, run_study

__version__ = "0.1.0"
