"""Convergence of the Adini element for both manufactured solutions.

Runs four levels of uniform refinement and prints the error table.
Pass a path to also write the sine2 rows as CSV.
"""

import sys

from adini.study import StudyConfig, format_table, run_study, write_csv

for name in ("sine2", "poly4"):
    rows = run_study(StudyConfig(solution=name, n0=8, levels=4))
    print(f"== {name} ==")
    print(format_table(rows))
    print()
    if name == "sine2" and len(sys.argv) > 1:
        write_csv(rows, sys.argv[1])
        print(f"wrote {sys.argv[1]}")
