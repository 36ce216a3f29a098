"""
Checking the one-shot bounds numerically
========================================

Every inequality in the verification suites is recorded as a slack
(right side minus left side).  A suite passes when no slack drops below its
tolerance, and the worst case of each relation keeps a witness that can be
re-evaluated on its own.  Run with ``python3 demos/checking_bounds.py``.
"""

import json

from smoothdiv import divergences as dv
from smoothdiv import matcore as mc
from smoothdiv import verify as vf

# a deliberately small grid keeps this to a few seconds
grid = vf.GridSpec(eps=(0.1, 0.3, 0.6), inner=8, alpha_upper=(1.5, 3.0),
                   alpha_lower=(0.3, 0.7))
pairs = vf.sample_pairs([2, 3], 2, seed=7)

for suite in ("equivalence", "oneshot", "renyi", "frenkel"):
    report = vf.run_suite(suite, pairs, grid)
    worst = min(report.relations.values(), key=lambda r: r.min_slack)
    print(f"{suite:12s} {'PASS' if report.passed else 'FAIL'}  {len(report.relations):2d} relations,"
          f" tightest: {worst.tag} (slack {worst.min_slack:.2e})")

# the tightest one-shot relation, re-evaluated from its stored witness
report = vf.run_suite("oneshot", pairs, grid)
rec = min((r for r in report.relations.values() if r.witness and "kind" in r.witness),
          key=lambda r: r.min_slack)
print(f"\n{rec.tag}: {rec.formula}")
print("witness:", json.dumps({k: v for k, v in rec.witness.items() if k != "pair"}))
print("recomputed slack:", vf.recompute_slack(rec.witness))

# integral representation of the relative entropy against the direct formula
rho, sigma = mc.sample_state("hs_mixed", 3, 1), mc.sample_state("hs_mixed", 3, 2)
print(f"\nD(rho||sigma) = {dv.umegaki(rho, sigma):.10f}, "
      f"integral over eps = {vf.frenkel_integral(rho, sigma):.10f}")

# exponents: -(1/n) log eps_n approaches its Renyi limit from above, slowly
p, q = [[0.75, 0], [0, 0.25]], [[0.5, 0], [0, 0.5]]
d, d2 = dv.umegaki(p, q), dv.renyi(p, q, 2.0, "sandwiched")
rate = 0.5 * (d + d2)
ns, eps_n, err, _ = vf.exponent_sequences(p, q, rate, n_max=8)
target, _ = vf.exponent_targets(p, q, rate)
print(f"\nrate {rate:.4f} between D = {d:.4f} and D2 = {d2:.4f}; limit {target:.5f}")
for n, e in zip(ns, err):
    print(f"  n = {n}: -(1/n) log eps_n = {e:.5f}")
