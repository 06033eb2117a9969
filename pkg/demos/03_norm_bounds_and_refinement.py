#!/usr/bin/env python3
# The l1 norm of a bi-probability table measures how far the statistics
# sit from any classical description (classical tables have norm exactly
# 1).  Two bounds control it: a lattice bound |Omega|^n that blows up with
# the grid length, and a grid-independent one driven by the integrated
# Hamiltonian norm.  Refining a grid can only push the norm up.

import numpy as np

import bitraj as bt

scenario = bt.rabi_scenario(omega=1.0)

print("l1 norm against both bounds, growing grids on [0, pi]")
print(f"{'n':>3} {'l1 norm':>12} {'lattice':>10} {'uniform':>10}")
uniform = bt.uniform_bound(scenario, np.pi)
for n in (1, 2, 3, 4):
    times = tuple(np.pi * (k + 1) / n for k in range(n))
    dist = bt.full_distribution(scenario, bt.TimeGrid(times))
    print(f"{n:3d} {bt.l1_norm(dist):12.6f} {bt.nonuniform_bound(dist):10.1f} {uniform:10.4f}")

# The uniform bound never references the grid: d^2 exp[2(d-1) Int ||H||].
print(f"\nuniform bound for horizon 1.0: {bt.uniform_bound(scenario, 1.0):.6f}"
      f"  (= 4e = {4 * np.e:.6f} for ||H|| = 1/2)")

# Mesh refinement: snap a uniform partition onto the grid, keeping the
# original times exactly.  The snapped mesh is a refinement, and the norm
# is monotone along the chain N0 -> 2N0.
base = bt.TimeGrid((0.48, 1.0))
n0 = bt.minimum_refinement_size(base)
print(f"\nbase grid {base.times}, minimum admissible mesh size N0 = {n0}")
norms = [bt.l1_norm(bt.full_distribution(scenario, base))]
labels = [f"base ({len(base)} times)"]
for size in (n0, 2 * n0):
    mesh = bt.build_refinement(base, size)
    norms.append(bt.l1_norm(bt.full_distribution(scenario, mesh.refined)))
    labels.append(f"mesh N={size}: {tuple(round(t, 4) for t in mesh.refined.times)}")
for label, norm in zip(labels, norms):
    print(f"  {label:<52} l1 = {norm:.6f}")
print(f"monotone: {norms[0] <= norms[1] + 1e-9 <= norms[2] + 2e-9}")

# A commuting scenario stays pinned at norm 1 no matter how fine the mesh.
frozen = bt.QuantumScenario(
    2,
    bt.HamiltonianSchedule.from_static(np.zeros((2, 2))),
    bt.DensityOperator(np.diag([0.3, 0.7])),
    bt.ObservablePVM.pauli_z(),
)
mesh = bt.build_refinement(base, 2 * n0)
rec = bt.refinement_monotonicity(frozen, mesh)
print(f"\ncommuting dynamics: coarse {rec.norm_coarse:.12f}, fine {rec.norm_fine:.12f}")
