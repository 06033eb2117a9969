"""Shared fixtures and independent oracles.

Oracles deliberately avoid the package's evaluation machinery: propagators
come from scipy's Pade expm (the package uses Hermitian eigendecomposition),
and table entries come from explicit Python-loop operator products (the
package uses einsum recursions and amplitude telescoping).
"""

from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg

from bitraj import (
    BiOutcome,
    DensityOperator,
    HamiltonianSchedule,
    ObservablePVM,
    QuantumScenario,
    TimeGrid,
    rabi_scenario,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULI_X_PVM = ObservablePVM(
    (1.0, -1.0),
    (0.5 * np.array([[1, 1], [1, 1]]), 0.5 * np.array([[1, -1], [-1, 1]])),
)


@pytest.fixture
def rabi():
    return rabi_scenario(1.0)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def oracle_propagator(schedule: HamiltonianSchedule, t_from: float, t_to: float) -> np.ndarray:
    """U(t_to, t_from) via scipy expm, segment by segment."""
    d = schedule.dimension
    u = np.eye(d, dtype=complex)
    for a, b, h in schedule.pieces(t_from, t_to):
        u = scipy.linalg.expm(-1j * (b - a) * h) @ u
    return u


def oracle_heisenberg(scenario: QuantumScenario, outcome: float, t: float) -> np.ndarray:
    u = oracle_propagator(scenario.schedule, 0.0, t)
    p = scenario.pvm.projector(outcome)
    return u.conj().T @ p @ u


def oracle_biprob(
    scenario: QuantumScenario,
    times,
    plus,
    minus,
    pvms=None,
) -> complex:
    """Plain-loop evaluation of one table entry (latest-first tuples)."""
    n = len(times)
    if pvms is None:
        pvms = [scenario.pvm] * n
    a = np.array(scenario.state.matrix)
    for j in range(n):  # ascending slots
        t = times[j]
        u = oracle_propagator(scenario.schedule, 0.0, t)
        p_plus = u.conj().T @ pvms[j].projector(plus[n - 1 - j]) @ u
        p_minus = u.conj().T @ pvms[j].projector(minus[n - 1 - j]) @ u
        a = p_plus @ a @ p_minus
    return complex(np.trace(a))


def all_tuples(outcomes, n):
    """All latest-first outcome tuples of length n, lexicographic order."""
    if n == 0:
        return [()]
    shorter = all_tuples(outcomes, n - 1)
    return [(f,) + rest for f in outcomes for rest in shorter]


def oracle_table_l1(scenario, times) -> float:
    total = 0.0
    outs = scenario.pvm.outcomes
    for plus in all_tuples(outs, len(times)):
        for minus in all_tuples(outs, len(times)):
            total += abs(oracle_biprob(scenario, times, plus, minus))
    return total


def p4_max_deviation(dist) -> float:
    """Worst measurement-inconsistency identity defect over all slots/tuples.

    Checks that every slotwise violation of classical consistency by the
    diagonal equals the corresponding off-diagonal table mass (with a real
    value), vectorized over the full lattice.
    """
    from bitraj.verify import _reduced_distribution

    n = dist.n
    diag = dist.diagonal()
    worst = 0.0
    for j in range(1, n + 1):
        fresh = _reduced_distribution(dist, j)
        lhs = fresh.diagonal() - diag.sum(axis=n - j)
        labels_plus = list(range(n))
        labels_minus = list(range(n))
        labels_plus[n - j] = n
        labels_minus[n - j] = n + 1
        out = [a for a in range(n) if a != n - j] + [n, n + 1]
        part = np.einsum(dist.table, labels_plus + labels_minus, out)
        offdiag = part.sum(axis=(-2, -1)) - np.einsum("...kk->...", part)
        if lhs.size:
            worst = max(
                worst,
                float(np.abs(lhs - offdiag.real).max()),
                float(np.abs(offdiag.imag).max()),
            )
    return worst


def static_scenario(h, state, pvm) -> QuantumScenario:
    h = np.asarray(h, dtype=complex)
    return QuantumScenario(
        dimension=h.shape[0],
        schedule=HamiltonianSchedule.from_static(h),
        state=state if isinstance(state, DensityOperator) else DensityOperator(state),
        pvm=pvm,
    )


def grid(*times) -> TimeGrid:
    return TimeGrid(tuple(times))


def outcome(plus, minus) -> BiOutcome:
    return BiOutcome(tuple(plus), tuple(minus))
