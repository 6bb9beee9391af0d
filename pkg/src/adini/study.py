"""Convergence studies under uniform refinement and their CSV/table output."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass

import numpy as np

from . import diagnostics as diag
from .assembly import SOLVERS, assemble
from .fields import SOLUTIONS, biharmonic_rhs, get_solution
from .mesh import build_dofmap, build_mesh, interpolate_global
from .quadrature import square_rule

log = logging.getLogger(__name__)

CSV_HEADER = (
    "level,n,h,n_free,err_L2,err_H1,err_energy,order_L2,order_H1,order_energy,"
    "ratio_L2_over_h2,cross_term,dominant_term,consistency_over_h2,identity_residual"
)

SOLVER_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class StudyConfig:
    solution: str = "sine2"
    Lx: float = 1.0
    Ly: float = 1.0
    n0: int = 8
    levels: int = 4
    csv_path: str | None = None
    solver: str = "cholesky"
    norm_order: int = diag.NORM_ORDER
    load_order: int = 6

    def __post_init__(self):
        if self.solution not in SOLUTIONS:
            raise KeyError(f"unknown solution {self.solution!r}; available: {', '.join(sorted(SOLUTIONS))}")
        if self.n0 < 2:
            raise ValueError("n0 must be at least 2")
        if not 1 <= self.levels <= 6:
            raise ValueError("levels must be in 1..6")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; available: {', '.join(SOLVERS)}")


@dataclass
class StudyRow:
    level: int
    n: int
    h: float
    n_free: int
    err_L2: float
    err_H1: float
    err_energy: float
    order_L2: float | None
    order_H1: float | None
    order_energy: float | None
    ratio_L2_over_h2: float
    cross_term: float
    dominant_term: float
    consistency_over_h2: float
    identity_residual: float
    # per-level hard checks, not written to CSV
    pivot_min: float = float("nan")
    solver_residual: float = float("nan")
    identity_ok: bool = True
    identity: diag.IdentityReport | None = None
    consistency: float = float("nan")
    interp_energy: float = float("nan")

    @property
    def ok(self) -> bool:
        return self.pivot_min > 0 and self.solver_residual <= SOLVER_RESIDUAL_TOL and self.identity_ok


CSV_FIELDS = CSV_HEADER.split(",")


def run_level(config: StudyConfig, level: int) -> StudyRow:
    n = config.n0 * 2 ** level
    w = get_solution(config.solution, config.Lx, config.Ly)
    f = biharmonic_rhs(w)
    mesh = build_mesh(config.Lx, config.Ly, n, n)
    dofmap = build_dofmap(mesh)
    nrule = square_rule(config.norm_order)
    system = assemble(mesh, dofmap, f, load_rule=square_rule(config.load_order))
    w_h = SOLVERS[config.solver](system)
    rep = diag.error_report(w, w_h, nrule)
    pi_w = interpolate_global(w, mesh, dofmap)
    expansion = diag.cross_term(w, mesh, dofmap, nrule, interpolant=pi_w)
    cons = diag.consistency_error(w, f, pi_w, mesh, nrule)
    pi_energy = diag.broken_norm(None, pi_w, 2, mesh, nrule)
    ident = diag.identity_check(w, f, w_h, mesh, nrule, raise_on_violation=False)
    log.info("level %d (n=%d): err_L2=%.3e residual=%.1e", level, n, rep.err_L2, ident.residual)
    return StudyRow(
        level=level,
        n=n,
        h=mesh.h,
        n_free=dofmap.n_free,
        err_L2=rep.err_L2,
        err_H1=rep.err_H1_broken,
        err_energy=rep.err_energy_broken,
        order_L2=None,
        order_H1=None,
        order_energy=None,
        ratio_L2_over_h2=rep.err_L2 / mesh.h ** 2,
        cross_term=expansion.cross,
        dominant_term=expansion.dominant,
        consistency_over_h2=abs(cons) / (pi_energy * mesh.h ** 2),
        identity_residual=ident.residual,
        pivot_min=system.stats.get("pivot_min", np.inf),
        solver_residual=system.stats["residual"],
        identity_ok=ident.residual <= ident.tolerance,
        identity=ident,
        consistency=cons,
        interp_energy=pi_energy,
    )


def run_study(config: StudyConfig) -> list[StudyRow]:
    rows = [run_level(config, k) for k in range(config.levels)]
    hs = [r.h for r in rows]
    for attr in ("L2", "H1", "energy"):
        orders = diag.observed_orders(hs, [getattr(r, f"err_{attr}") for r in rows])
        for r, o in zip(rows, orders):
            setattr(r, f"order_{attr}", o)
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def to_csv(rows: list[StudyRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in rows:
        writer.writerow([_fmt(getattr(r, k)) for k in CSV_FIELDS])
    return buf.getvalue()


def write_csv(rows: list[StudyRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(rows))


def format_table(rows: list[StudyRow]) -> str:
    cols = ["n", "h", "err_L2", "order_L2", "err_H1", "order_H1", "err_energy", "order_energy",
            "ratio_L2_over_h2", "cross_term", "dominant_term", "consistency_over_h2", "identity_residual"]

    def cell(v):
        if v is None:
            return "-"
        if isinstance(v, (int, np.integer)):
            return str(v)
        return f"{v:.4g}"

    body = [[cell(getattr(r, c)) for c in cols] for r in rows]
    widths = [max(len(c), *(len(b[i]) for b in body)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.rjust(wd) for c, wd in zip(cols, widths))]
    lines += ["  ".join(v.rjust(wd) for v, wd in zip(b, widths)) for b in body]
    return "\n".join(lines)


__all__ = [
    "CSV_HEADER", "StudyConfig", "StudyRow", "format_table", "run_level", "run_study", "to_csv", "write_csv",
]
