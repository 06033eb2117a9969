#!/usr/bin/env python3
# A driven qubit probed in the sigma_z basis: the textbook entry point.
#
# Single-time bi-probability diagonals reproduce the (1 +/- cos t)/2
# oscillation, and a two-time grid already exposes genuinely negative
# bi-probability entries, the fingerprint of nonclassical multitime
# statistics.

import numpy as np

import bitraj as bt

scenario = bt.rabi_scenario(omega=1.0)

print("single-time diagonal Q_t(f, f) against the closed form")
print(f"{'t':>8} {'Q(+1,+1)':>12} {'(1+cos t)/2':>12} {'Q(-1,-1)':>12}")
for t in np.linspace(0.25, np.pi, 6):
    g = bt.TimeGrid((t,))
    q_plus = bt.eval_biprob(scenario, g, bt.BiOutcome((1.0,), (1.0,))).real
    q_minus = bt.eval_biprob(scenario, g, bt.BiOutcome((-1.0,), (-1.0,))).real
    print(f"{t:8.4f} {q_plus:12.8f} {(1 + np.cos(t)) / 2:12.8f} {q_minus:12.8f}")

# Two measurement times: the full table has 16 complex entries.  Outcome
# tuples are ordered latest time first, so plus=(1, -1) means "+1 at t2,
# -1 at t1".
grid = bt.TimeGrid((np.pi / 2, np.pi))
dist = bt.full_distribution(scenario, grid)

print(f"\nfull table on grid {grid.times} (sum = {dist.total():.12f})")
for o, q in dist.entries():
    marker = "  <-- negative!" if q.real < -1e-12 else ""
    print(f"  plus={o.plus} minus={o.minus}  Q = {q:+.6f}{marker}")

# The (up, up | up, down) entry equals exactly -1/4: a complex measure,
# not a probability.  Swapping the legs gives its complex conjugate, so the
# pair contributes a real, negative amount to any marginalization.
witness = dist.value(bt.BiOutcome((1.0, 1.0), (1.0, -1.0)))
partner = dist.value(bt.BiOutcome((1.0, -1.0), (1.0, 1.0)))
print(f"\nwitness entry        : {witness:+.12f}")
print(f"legs-swapped partner : {partner:+.12f}  (complex conjugate)")

# Diagonal entries remain honest probabilities whatever the grid.
diag = dist.diagonal()
print(f"\ndiagonal (joint probabilities): min = {diag.min():.3e}, sum = {diag.sum():.12f}")
