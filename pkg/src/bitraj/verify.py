"""Machine checks of the structural properties of bi-probability tables.

Normalization, causality, positive semidefiniteness and bi-consistency of the
complex table, plus the probability-distribution properties of its diagonal,
are theorems for valid scenarios: any deviation beyond tolerance indicates an
implementation bug, which is exactly what makes them useful as a test battery.
Also provided: the slotwise decomposition of Kolmogorov-consistency violations
into off-diagonal bi-probability mass, classicality diagnostics, grade-2
additivity of diagonal events, and stabilization of averages over nested
grids (the finite-scale shadow of the extension limit).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .biprob import (
    BiDistribution,
    BiOutcome,
    TupleFunction,
    _distribution_for_slots,
    _lattice_indices,
    average,
    diagonal_probability,
    eval_biprob,
    full_distribution,
    marginalize,
)
from .errors import (
    BadPosition,
    LengthMismatch,
    NotNested,
    OverlappingEvents,
)
from .model import QuantumScenario, TimeGrid

DEFAULT_PROPERTY_TOL = 1e-9


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    max_deviation: float
    tolerance: float
    passed: bool
    witness: str

    def __post_init__(self):
        object.__setattr__(self, "max_deviation", float(self.max_deviation))
        object.__setattr__(self, "tolerance", float(self.tolerance))
        object.__setattr__(self, "passed", bool(self.passed))

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "witness": self.witness,
        }


@dataclass(frozen=True)
class PropertyReport:
    checks: tuple

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> PropertyCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "all_pass": self.all_pass,
            "checks": [c.to_json_dict() for c in self.checks],
        }


@dataclass(frozen=True)
class InconsistencyRecord:
    lhs: float
    offdiag_sum: complex


@dataclass(frozen=True)
class ClassicalityRecord:
    consistency_deviation: float
    offdiagonal_mass: float


def _entry_label(dist: BiDistribution, flat_index: int) -> str:
    sizes = dist.sizes[::-1] + dist.sizes[::-1]
    idx = np.unravel_index(flat_index, sizes) if sizes else ()
    n = dist.n
    sets_rev = dist.outcome_sets[::-1]
    plus = tuple(sets_rev[a][idx[a]] for a in range(n))
    minus = tuple(sets_rev[a][idx[n + a]] for a in range(n))
    return f"plus={plus}, minus={minus}"


def _diag_label(dist: BiDistribution, flat_index: int) -> str:
    sizes = dist.sizes[::-1]
    idx = np.unravel_index(flat_index, sizes) if sizes else ()
    sets_rev = dist.outcome_sets[::-1]
    tup = tuple(sets_rev[a][idx[a]] for a in range(dist.n))
    return f"tuple={tup}"


def _reduced_distribution(dist: BiDistribution, position: int) -> BiDistribution:
    if dist.scenario is None or dist.pvms is None:
        raise LengthMismatch(
            "distribution carries no scenario; bi-consistency cannot be re-evaluated"
        )
    grid = dist.grid.without(position)
    pvms = tuple(p for j, p in enumerate(dist.pvms, start=1) if j != position)
    return _distribution_for_slots(dist.scenario, grid, pvms)


def check_properties(
    dist: BiDistribution, tolerance: float = DEFAULT_PROPERTY_TOL
) -> PropertyReport:
    """Run the full property battery on one distribution.

    Covers table normalization (Q1), causality at the latest slot (Q2),
    positive semidefiniteness of the reshaped table (Q3, via the minimum
    eigenvalue relative to the spectral norm), bi-consistency against fresh
    evaluation on every reduced grid (Q4), and the diagonal's probability
    properties (P1), the Cauchy-Schwarz envelope |Q| <= sqrt(P+ P-) (P2),
    and causality of measurements (P3).  A report is always produced; each
    record carries the worst-case witness.
    """
    checks = []
    n = dist.n
    table = dist.table
    sizes = dist.sizes
    k_total = int(np.prod(sizes)) if sizes else 1

    # Q1 normalization
    dev = abs(table.sum() - 1.0)
    checks.append(
        PropertyCheck("Q1_normalization", float(dev), tolerance, dev <= tolerance, "total sum")
    )

    # Q2 causality at the latest slot
    if n >= 1:
        k_n = sizes[-1]
        absq = np.abs(table).copy()
        view = np.moveaxis(absq, (0, n), (0, 1))
        view[np.eye(k_n, dtype=bool)] = 0.0  # keep only f+_n != f-_n entries
        dev = float(absq.max()) if absq.size else 0.0
        witness = _entry_label(dist, int(absq.argmax())) if absq.size else "n/a"
        checks.append(
            PropertyCheck("Q2_causality", dev, tolerance, dev <= tolerance, witness)
        )

    # Q3 positive semidefiniteness of M[f+, f-]
    m = table.reshape(k_total, k_total)
    m_h = 0.5 * (m + m.conj().T)
    norm = float(np.linalg.norm(m_h, 2)) if k_total else 0.0
    evals = np.linalg.eigvalsh(m_h) if k_total else np.array([0.0])
    lam_min = float(evals[0])
    dev = max(0.0, -lam_min)
    tol_eff = tolerance * max(norm, 1e-300)
    checks.append(
        PropertyCheck(
            "Q3_positive_semidefinite", dev, tol_eff, dev <= tol_eff,
            f"min eigenvalue {lam_min:.3e} of the {k_total}x{k_total} reshaped table (norm {norm:.3e})",
        )
    )

    # Q4 bi-consistency, every slot
    worst = 0.0
    witness = "n/a"
    for j in range(1, n + 1):
        marg = marginalize(dist, j)
        fresh = _reduced_distribution(dist, j)
        diff = np.abs(marg.table - fresh.table)
        if diff.size:
            dev_j = float(diff.max())
            if dev_j >= worst:
                worst = dev_j
                witness = f"slot {j}, {_entry_label(fresh, int(diff.argmax()))}"
    checks.append(
        PropertyCheck("Q4_biconsistency", worst, tolerance, worst <= tolerance, witness)
    )

    # P1 diagonal is a probability distribution
    diag = dist.diagonal()
    neg = float(max(0.0, -diag.min())) if diag.size else 0.0
    total_dev = abs(diag.sum() - 1.0)
    dev = max(neg, total_dev)
    witness = f"min diagonal at {_diag_label(dist, int(diag.argmin()))}" if diag.size else "n/a"
    checks.append(
        PropertyCheck("P1_joint_probability", float(dev), tolerance, dev <= tolerance, witness)
    )

    # P2 |Q| <= sqrt(P+ P-)
    p_clip = np.clip(diag, 0.0, None)
    envelope = np.sqrt(
        p_clip.reshape(-1)[:, None] * p_clip.reshape(-1)[None, :]
    )
    excess = np.abs(m) - envelope
    dev = float(max(0.0, excess.max())) if excess.size else 0.0
    flat = int(excess.argmax()) if excess.size else 0
    checks.append(
        PropertyCheck(
            "P2_bounding", dev, tolerance, dev <= tolerance,
            _entry_label(dist, flat),
        )
    )

    # P3 causality of measurements: marginal of the diagonal over the latest slot
    if n >= 1:
        fresh = _reduced_distribution(dist, n)
        reduced_diag = fresh.diagonal()
        summed = diag.sum(axis=0)
        diff = np.abs(summed - reduced_diag)
        dev = float(diff.max()) if diff.size else float(abs(diag.sum() - 1.0))
        witness = _diag_label(fresh, int(diff.argmax())) if diff.size else "empty grid"
        checks.append(
            PropertyCheck("P3_measurement_causality", dev, tolerance, dev <= tolerance, witness)
        )

    return PropertyReport(tuple(checks))


def inconsistency_decomposition(
    scenario: QuantumScenario,
    grid: TimeGrid,
    outcomes: Sequence[float],
    position: int,
) -> InconsistencyRecord:
    """Slot-j violation of classical consistency and its off-diagonal cause.

    ``outcomes`` is the full tuple (f_n,...,f_1); the component at the probed
    slot is ignored (it is summed over / removed).  The identity
    lhs = sum_{f+_j != f-_j} Q(...; f+_j, f-_j; ...) holds to numerical
    precision, with the right-hand side real up to rounding.
    """
    n = len(grid)
    if not 1 <= position <= n:
        raise BadPosition(f"position {position} outside 1..{n}")
    tup = tuple(float(f) for f in outcomes)
    if len(tup) != n:
        raise LengthMismatch(f"outcome tuple length {len(tup)} != grid length {n}")
    slot_axis = n - position  # latest-first tuple index of slot `position`
    reduced_tup = tuple(f for a, f in enumerate(tup) if a != slot_axis)

    reduced = diagonal_probability(scenario, grid.without(position), reduced_tup)
    outcome_set = scenario.pvm.outcomes
    summed = 0.0
    for f in outcome_set:
        probe = list(tup)
        probe[slot_axis] = f
        summed += diagonal_probability(scenario, grid, tuple(probe))
    lhs = reduced - summed

    offdiag = 0.0 + 0.0j
    for fp in outcome_set:
        for fm in outcome_set:
            if fp == fm:
                continue
            plus = list(tup)
            minus = list(tup)
            plus[slot_axis] = fp
            minus[slot_axis] = fm
            offdiag += eval_biprob(scenario, grid, BiOutcome(tuple(plus), tuple(minus)))
    return InconsistencyRecord(lhs=float(lhs), offdiag_sum=complex(offdiag))


def _complex_diagonal(table: np.ndarray, n: int) -> np.ndarray:
    if n == 0:
        return table.copy()
    labels = list(range(n))
    return np.einsum(table, labels + labels, labels)


def classicality_report(dist: BiDistribution) -> ClassicalityRecord:
    """How far the diagonal statistics are from a classical process.

    ``consistency_deviation`` is the worst single-slot marginalization defect
    of the joint probabilities; ``offdiagonal_mass`` the total |Q| carried by
    trajectory pairs that disagree somewhere.  Both vanish for dynamics that
    commute with the probed observable.
    """
    n = dist.n
    if n < 2:
        raise LengthMismatch(f"classicality diagnostics need n >= 2, got {n}")
    diag = dist.diagonal()
    worst = 0.0
    for j in range(1, n + 1):
        fresh = _reduced_distribution(dist, j)
        summed = diag.sum(axis=n - j)
        dev = float(np.abs(summed - fresh.diagonal()).max())
        worst = max(worst, dev)
    mass_all = float(np.abs(dist.table).sum())
    mass_diag = float(np.abs(_complex_diagonal(dist.table, n)).sum())
    return ClassicalityRecord(
        consistency_deviation=worst,
        offdiagonal_mass=mass_all - mass_diag,
    )


def _event_indices(dist: BiDistribution, event: Iterable) -> np.ndarray:
    """Flatten diagonal tuples (latest-first values) into table row indices."""
    sizes = dist.sizes[::-1]
    flat = []
    for tup in event:
        tup = tuple(float(f) for f in tup)
        if len(tup) != dist.n:
            raise LengthMismatch(f"event tuple {tup} has length {len(tup)} != {dist.n}")
        idx = _lattice_indices(dist.outcome_sets, BiOutcome(tup, tup))[: dist.n]
        flat.append(int(np.ravel_multi_index(idx, sizes)) if sizes else 0)
    return np.array(sorted(set(flat)), dtype=int)


def grade2_check(dist: BiDistribution, a1, a2, a3) -> float:
    """Deviation from grade-2 additivity of mu(A) = sum_{f+,f- in A} Q.

    The three events are disjoint sets of diagonal outcome tuples.  The
    returned deviation is |mu(A1 u A2 u A3) - mu(A1 u A2) - mu(A2 u A3)
    - mu(A1 u A3) + mu(A1) + mu(A2) + mu(A3)|.
    """
    k_total = int(np.prod(dist.sizes)) if dist.sizes else 1
    m = dist.table.reshape(k_total, k_total)
    events = [_event_indices(dist, a) for a in (a1, a2, a3)]
    for i in range(3):
        for j in range(i + 1, 3):
            common = np.intersect1d(events[i], events[j])
            if common.size:
                raise OverlappingEvents(
                    f"events {i + 1} and {j + 1} share {common.size} tuple(s)"
                )

    def mu(idx: np.ndarray) -> complex:
        if idx.size == 0:
            return 0.0 + 0.0j
        sub = m[np.ix_(idx, idx)]
        return complex(sub.sum())

    e1, e2, e3 = events
    u12 = np.union1d(e1, e2)
    u23 = np.union1d(e2, e3)
    u13 = np.union1d(e1, e3)
    u123 = np.union1d(u12, e3)
    dev = (
        mu(u123) - mu(u12) - mu(u23) - mu(u13) + mu(e1) + mu(e2) + mu(e3)
    )
    return float(abs(dev))


def cauchy_stabilization(
    scenario: QuantumScenario,
    grids: Sequence[TimeGrid],
    x: TupleFunction,
) -> list:
    """Averages of one test function across a nested chain of grids.

    ``x`` lives on the coarsest grid and is lifted to each finer grid by
    ignoring the added coordinates; bi-consistency makes the returned list
    constant to numerical precision.
    """
    if not grids:
        return []
    for coarse, fine in zip(grids[:-1], grids[1:]):
        if not fine.is_refinement_of(coarse):
            raise NotNested(f"grid {fine.times} does not contain {coarse.times}")
    if x.grid.times != grids[0].times:
        raise NotNested("test function must live on the coarsest grid")
    out = []
    for g in grids:
        dist = full_distribution(scenario, g)
        lifted = x.lift(g, dist.outcome_sets) if g.times != x.grid.times else x
        out.append(average(dist, lifted))
    return out
