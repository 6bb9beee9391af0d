"""Why the L2 error of the Adini element is no better than h^2.

The cross term a_h(w - Pi w, Pi w) is positive and approaches a
closed-form quantity of size h^2. It dominates the error identity, and
err_L2 / h^2 levels off instead of decaying.
"""

from math import pi

from adini.study import StudyConfig, run_study

rows = run_study(StudyConfig(solution="sine2", n0=4, levels=5))

print(f"{'n':>4} {'cross':>12} {'dominant':>12} {'ratio':>8} {'t5':>12} {'max|t1..t4|':>12} {'L2/h^2':>8}")
for r in rows:
    others = max(abs(t) for t in r.identity.terms[:4])
    print(f"{r.n:4d} {r.cross_term:12.5e} {r.dominant_term:12.5e} {r.cross_term / r.dominant_term:8.4f} "
          f"{r.identity.t5:12.5e} {others:12.5e} {r.ratio_L2_over_h2:8.4f}")

print(f"\ndominant term should be (2 pi^6 / 3) h^2, i.e. {2 * pi ** 6 / 3:.4f} h^2")
print("orders of err_L2:", ", ".join(f"{r.order_L2:.3f}" for r in rows[1:]))
