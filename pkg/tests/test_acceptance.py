"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (run with ``pytest -v -s`` to see
them) and enforces the stated tolerance.  The standard scenario matrix is
d in {2, 3, 4} x n in {1, 2, 3, 4} x 20 seeds; the heavyweight criteria
share its distributions through a session-scoped cache.
"""

import itertools

import numpy as np
import pytest

import bitraj as bt

from conftest import (
    PAULI_X_PVM,
    SIGMA_X,
    SIGMA_Z,
    all_tuples,
    grid,
    haar_unitary,
    outcome,
    p4_max_deviation,
    static_scenario,
)

DIMS = (2, 3, 4)
LENGTHS = (1, 2, 3, 4)
SEEDS = tuple(range(20))


def _report(num: int, description: str, ok: bool) -> None:
    print(f"ACCEPTANCE {num:02d} [{description}]: {'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {num} failed: {description}"


def _matrix_grid(n: int, seed: int) -> bt.TimeGrid:
    rng = np.random.default_rng(10_000 + seed)
    base = np.linspace(0.3, 1.5, n)
    jitter = rng.uniform(-0.08, 0.08, size=n)
    return bt.TimeGrid(tuple(np.sort(base + jitter)))


@pytest.fixture(scope="module")
def standard_matrix():
    """(d, n, seed) -> (scenario, grid, distribution) over the full matrix."""
    cells = {}
    for d, n, seed in itertools.product(DIMS, LENGTHS, SEEDS):
        sc = bt.random_scenario(d, seed=seed)
        g = _matrix_grid(n, seed)
        cells[(d, n, seed)] = (sc, g, bt.full_distribution(sc, g))
    return cells


def test_01_rabi_reproduction(rabi):
    ok = True
    for t in (0.3, 1.0, 2.5, np.pi):
        g = grid(t)
        q_plus = bt.eval_biprob(rabi, g, outcome((1.0,), (1.0,)))
        q_minus = bt.eval_biprob(rabi, g, outcome((-1.0,), (-1.0,)))
        ok &= abs(q_plus - (1 + np.cos(t)) / 2) <= 1e-10
        ok &= abs(q_minus - (1 - np.cos(t)) / 2) <= 1e-10
    _report(1, "single-time probabilities (1 +/- cos T)/2", ok)


def test_02_property_theorems(standard_matrix):
    ok = True
    for (d, n, seed), (sc, g, dist) in standard_matrix.items():
        report = bt.check_properties(dist, tolerance=1e-9)
        if not report.all_pass:
            ok = False
            break
        if p4_max_deviation(dist) > 1e-9:
            ok = False
            break
    _report(2, "Q1-Q4 and P1-P4 on d x n x 20 seeds at 1e-9", ok)


def test_03_negative_biprobability_witness(rabi):
    g = grid(np.pi / 2, np.pi)
    o = outcome((1.0, 1.0), (1.0, -1.0))
    trace_path = bt.eval_biprob(rabi, g, o)
    comb_path = bt.comb_biprob(rabi, g, o)
    ok = abs(trace_path - (-0.25)) <= 1e-10 and abs(comb_path - (-0.25)) <= 1e-10
    _report(3, "entry (up,up | up,down) = -0.25 via trace and comb paths", ok)


def test_04_norm_bounds_and_refinement(standard_matrix):
    ok = True
    for (d, n, seed), (sc, g, dist) in standard_matrix.items():
        norm = bt.l1_norm(dist)
        limit = min(bt.nonuniform_bound(dist), bt.uniform_bound(sc, g.times[-1]))
        if not (1.0 - 1e-9 <= norm <= limit + 1e-9):
            ok = False
            break

    # refinement chains N0 -> 2N0 on bases whose fine grids fit the cap
    chain_bases = {2: grid(0.48, 1.0), 3: grid(0.48, 1.0), 4: grid(1.0)}
    chain_seeds = {2: SEEDS, 3: SEEDS[:5], 4: SEEDS}
    for d, base in chain_bases.items():
        n_lo = max(bt.minimum_refinement_size(base), len(base) + 1)
        mesh_lo = bt.build_refinement(base, n_lo)
        mesh_hi = bt.build_refinement(base, 2 * n_lo)
        assert mesh_hi.refined.is_refinement_of(mesh_lo.refined)
        for seed in chain_seeds[d]:
            sc = bt.random_scenario(d, seed=seed)
            norm_base = bt.l1_norm(bt.full_distribution(sc, base))
            norm_lo = bt.l1_norm(bt.full_distribution(sc, mesh_lo.refined))
            norm_hi = bt.l1_norm(bt.full_distribution(sc, mesh_hi.refined))
            if not (norm_base <= norm_lo + 1e-9 and norm_lo <= norm_hi + 1e-9):
                ok = False
                break
    _report(4, "1 <= l1 <= bounds; refinement chains nondecreasing", ok)


def test_05_classical_limit():
    ok = True
    cases = [
        static_scenario(np.diag([0.7, -0.4]), np.diag([0.3, 0.7]), bt.ObservablePVM.pauli_z()),
        static_scenario(
            np.diag([0.5, -0.1, 0.2]),
            np.diag([0.5, 0.3, 0.2]),
            bt.ObservablePVM.computational_basis(3),
        ),
        # degenerate PVM commuting with a block-diagonal Hamiltonian
        static_scenario(
            np.diag([0.4, 0.4, -0.2]),
            np.diag([0.2, 0.4, 0.4]),
            bt.ObservablePVM(
                (1.0, -1.0),
                (np.diag([1.0, 1.0, 0.0]), np.diag([0.0, 0.0, 1.0])),
            ),
        ),
    ]
    grids = [grid(0.9), grid(0.4, 1.1), grid(0.3, 0.8, 1.4)]
    for sc in cases:
        for g in grids:
            dist = bt.full_distribution(sc, g)
            if abs(bt.l1_norm(dist) - 1.0) > 1e-10:
                ok = False
            if len(g) >= 2:
                rec = bt.classicality_report(dist)
                ok &= rec.consistency_deviation <= 1e-10
                ok &= rec.offdiagonal_mass <= 1e-10
    _report(5, "commuting dynamics: consistent, diagonal, l1 = 1", ok)


def test_06_average_stabilization_over_nested_grids():
    ok = True
    rng = np.random.default_rng(606)
    for case in range(10):
        d = 2 if case < 6 else 3
        sc = bt.random_scenario(d, seed=600 + case)
        times = sorted(rng.uniform(0.2, 1.5, size=4))
        grids = [bt.TimeGrid(tuple(times[:1]))]
        for depth in range(2, 5):
            grids.append(bt.TimeGrid(tuple(sorted(times[:depth]))))
        dist0 = bt.full_distribution(sc, grids[0])
        shape = dist0.table.shape
        x = bt.TupleFunction(
            grids[0],
            dist0.outcome_sets,
            rng.standard_normal(shape) + 1j * rng.standard_normal(shape),
        )
        avgs = bt.cauchy_stabilization(sc, grids, x)
        spread = max(abs(a - avgs[0]) for a in avgs)
        ok &= spread <= 1e-10
    _report(6, "averages constant across depth-4 nested grids", ok)


def test_07_multiobservable_decomposition():
    ok = True
    # qubit sigma_z / sigma_x alternations, n <= 2
    sz = bt.ObservablePVM.pauli_z()
    sc = static_scenario(0.4 * SIGMA_X + 0.2 * SIGMA_Z, np.diag([0.6, 0.4]), sz)
    for seq_pvms, g in (
        ((sz,), grid(0.8)),
        ((PAULI_X_PVM,), grid(0.8)),
        ((sz, PAULI_X_PVM), grid(0.5, 1.1)),
        ((PAULI_X_PVM, sz), grid(0.5, 1.1)),
    ):
        seq = bt.ObservableSequence(seq_pvms)
        dist = bt.multiobs_distribution(sc, g, seq)
        for o, q in dist.entries():
            rec = bt.decompose_multiobs(sc, g, seq, o)
            ok &= abs(rec.direct - rec.reconstructed) <= 1e-9
            ok &= abs(rec.direct - q) <= 1e-10

    # d = 3 random PVM pairs, n = 2
    rng = np.random.default_rng(707)
    sc3 = bt.random_scenario(3, seed=707)
    for _ in range(3):
        u1, u2 = haar_unitary(3, rng), haar_unitary(3, rng)
        pvms = tuple(
            bt.ObservablePVM(
                (0.0, 1.0, 2.0),
                tuple(np.outer(u[:, k], u[:, k].conj()) for k in range(3)),
            )
            for u in (u1, u2)
        )
        seq = bt.ObservableSequence(pvms)
        g = grid(0.6, 1.2)
        dist = bt.multiobs_distribution(sc3, g, seq)
        for o, q in dist.entries():
            rec = bt.decompose_multiobs(sc3, g, seq, o)
            ok &= abs(rec.direct - rec.reconstructed) <= 1e-9
    _report(7, "generic-expansion identity to 1e-9", ok)


def test_08_path_bound():
    ok = True
    rng = np.random.default_rng(808)
    for case in range(10):
        d = 2 if case % 2 == 0 else 3
        n_seg = int(rng.integers(1, 4))
        weights = rng.dirichlet(np.ones(n_seg))
        segments = []
        for w in weights:
            g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            segments.append((float(w), 0.5 * (g + g.conj().T)))
        path = bt.UnitaryPath(tuple(segments), haar_unitary(d, rng))
        param_grids = []
        for _ in range(3):
            size = int(rng.integers(1, 5))
            taus = np.sort(rng.uniform(0.0, 1.0, size=size))
            if len(set(taus)) == len(taus):
                param_grids.append(tuple(taus))
        rec = bt.path_bound_check(path, param_grids)
        ok &= rec.max_l1 <= rec.bound + 1e-9
    _report(8, "generic families obey d^2 exp[2(d-1) Length]", ok)


def test_09_comb_identity(standard_matrix):
    from bitraj.comb import comb_table

    ok = True
    worst = 0.0
    for (d, n, seed), (sc, g, dist) in standard_matrix.items():
        diff = float(np.abs(comb_table(sc, g) - dist.table).max())
        worst = max(worst, diff)
        if diff > 1e-10:
            ok = False
            break
    _report(9, f"comb chain equals trace formula (worst {worst:.2e})", ok)


def test_10_open_system_convergence():
    model = bt.OpenModel(
        h_sys=0.5 * SIGMA_Z,
        v_sys=SIGMA_X,
        coupling=0.5,
        environment=bt.rabi_scenario(1.0),
    )
    steps = [8, 16, 32, 64, 128]
    study = bt.convergence_study(model, 1.0, steps)
    errors_by_steps = {p.n_steps: p.error for p in study}
    ok = errors_by_steps[128] <= errors_by_steps[8] / 4

    free = bt.OpenModel(
        h_sys=0.5 * SIGMA_Z,
        v_sys=SIGMA_X,
        coupling=0.0,
        environment=bt.rabi_scenario(1.0),
    )
    for p in bt.convergence_study(free, 1.0, steps):
        ok &= p.error <= 1e-10
    _report(10, "error(128) <= error(8)/4; decoupled error <= 1e-10", ok)


def test_11_grade2_additivity():
    ok = True
    rng = np.random.default_rng(1111)
    dists = [
        bt.full_distribution(bt.random_scenario(2, seed=s), grid(0.5, 1.1))
        for s in (0, 1)
    ] + [
        bt.full_distribution(bt.random_scenario(3, seed=s), grid(0.6, 1.3))
        for s in (2, 3)
    ]
    checks = 0
    while checks < 50:
        dist = dists[int(rng.integers(len(dists)))]
        tuples = all_tuples(dist.outcome_sets[0], 2)
        perm = rng.permutation(len(tuples))
        cut1, cut2 = sorted(rng.integers(0, len(tuples) + 1, size=2))
        a1 = [tuples[i] for i in perm[:cut1]]
        a2 = [tuples[i] for i in perm[cut1:cut2]]
        a3 = [tuples[i] for i in perm[cut2:]]
        dev = bt.grade2_check(dist, a1, a2, a3)
        ok &= dev <= 1e-10
        checks += 1
    _report(11, "grade-2 additivity on 50 random disjoint triples", ok)
