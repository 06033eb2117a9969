#!/usr/bin/env python3
# The structural properties of bi-probability tables are theorems for any
# valid scenario, which makes them a free, exhaustive self-test: run the
# battery on random instances, then corrupt a table on purpose and watch
# the checks localize the fault.

import numpy as np

import bitraj as bt
from bitraj.biprob import BiDistribution

scenario = bt.random_scenario(3, seed=42)
grid = bt.TimeGrid((0.4, 0.9, 1.5))
dist = bt.full_distribution(scenario, grid)

report = bt.check_properties(dist, tolerance=1e-9)
print(f"random d=3 scenario on grid {grid.times}")
for c in report.checks:
    print(f"  {c.name:<28} deviation {c.max_deviation:.3e}  tol {c.tolerance:.1e}  "
          f"{'pass' if c.passed else 'FAIL'}")
print(f"all pass: {report.all_pass}")

# Normalization, causality and positivity are checked on the table itself;
# bi-consistency re-evaluates every reduced grid from scratch and compares
# against joint marginalization, so a single corrupted entry cannot hide.
table = np.array(dist.table)
table[0, 1, 2, 0, 1, 2] += 1e-3
corrupted = BiDistribution(
    grid=grid,
    outcome_sets=dist.outcome_sets,
    table=table,
    fingerprint=dist.fingerprint,
    scenario=dist.scenario,
    pvms=dist.pvms,
)
bad = bt.check_properties(corrupted, tolerance=1e-9)
print("\nafter perturbing one entry by 1e-3:")
for c in bad.checks:
    if not c.passed:
        print(f"  {c.name:<28} deviation {c.max_deviation:.3e}  witness: {c.witness}")

# Averages over nested grids are the finite-scale shadow of the extension
# to a master measure: refining the grid never changes the average of a
# function that only looks at the coarse slots.
g1 = bt.TimeGrid((0.9,))
g2 = bt.TimeGrid((0.4, 0.9))
g3 = bt.TimeGrid((0.4, 0.9, 1.5))
d1 = bt.full_distribution(scenario, g1)
x = bt.TupleFunction.from_callable(
    g1, d1.outcome_sets, lambda o: o.plus[0] * o.minus[0]
)
averages = bt.cauchy_stabilization(scenario, [g1, g2, g3], x)
print("\naverages across a nested grid chain (should be constant):")
for g, a in zip((g1, g2, g3), averages):
    print(f"  grid {str(g.times):<24} E[X] = {a:+.12f}")
