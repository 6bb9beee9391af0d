"""``adini study`` and ``adini verify`` command-line entry points."""

from __future__ import annotations

import argparse
import logging
import sys

from .assembly import NoConvergenceError, NotSPDError
from .fields import SOLUTIONS
from .study import StudyConfig, format_table, run_study, write_csv
from .verify import SUITES, run_suite


def cmd_study(args) -> int:
    if args.solution not in SOLUTIONS:
        print(f"error: unknown solution {args.solution!r}; available: {', '.join(sorted(SOLUTIONS))}",
              file=sys.stderr)
        return 2
    try:
        config = StudyConfig(solution=args.solution, Lx=args.lx, Ly=args.ly, n0=args.n0,
                             levels=args.levels, csv_path=args.csv, solver=args.solver)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        rows = run_study(config)
    except (NotSPDError, NoConvergenceError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    if config.csv_path:
        write_csv(rows, config.csv_path)
    print(format_table(rows))
    status = 0
    for r in rows:
        if not r.ok:
            status = 1
            print(f"level {r.level} (n={r.n}) failed: pivot_min={r.pivot_min:.3e} "
                  f"solver_residual={r.solver_residual:.3e} identity_residual={r.identity_residual:.3e}",
                  file=sys.stderr)
    return status


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; available: {', '.join(SUITES)}", file=sys.stderr)
        return 2
    checks = run_suite(args.suite, seed=args.seed, trials=args.trials)
    for c in checks:
        print(c.line())
    worst = max(c.worst for c in checks if c.upper)
    ok = all(c.passed for c in checks)
    print(f"{args.suite}: {'pass' if ok else 'FAIL'} ({sum(c.passed for c in checks)}/{len(checks)}), "
          f"worst residual {worst:.3e}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adini", description="Adini element laboratory for the biharmonic problem")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("study", help="convergence study under uniform refinement")
    s.add_argument("--solution", required=True, help=f"one of: {', '.join(sorted(SOLUTIONS))}")
    s.add_argument("--n0", type=int, default=8, help="coarsest cells per direction")
    s.add_argument("--levels", type=int, default=4)
    s.add_argument("--csv", default=None, help="write rows to this CSV file")
    s.add_argument("--lx", type=float, default=1.0)
    s.add_argument("--ly", type=float, default=1.0)
    s.add_argument("--solver", choices=["cholesky", "cg"], default="cholesky")
    s.set_defaults(func=cmd_study)

    v = sub.add_parser("verify", help="run a seeded property suite")
    v.add_argument("--suite", required=True, help=f"one of: {', '.join(SUITES)}")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=200)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
