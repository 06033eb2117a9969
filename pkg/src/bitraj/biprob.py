"""Quantum bi-probability distributions on finite time grids.

The central object is the complex table

    Q(f+_n, ..., f+_1; f-_n, ..., f-_1)
        = tr[ P_{t_n}(f+_n) ... P_{t_1}(f+_1)  rho  P_{t_1}(f-_1) ... P_{t_n}(f-_n) ]

whose diagonal (f+ = f-) is the joint probability of a projective measurement
sequence.  Tables are enumerated densely up to a configurable cap; entries are
stored in lexicographic order over (f+_n,...,f+_1,f-_n,...,f-_1) with outcomes
in declared PVM order, so serialization is reproducible.

Evaluation of distinct entries is independent; the table is written once and
frozen.  Setting the environment variable ``BITRAJ_THREADS`` caps the number
of worker threads used for large tables (default 1).  Worker scheduling never
affects results: chunks write disjoint slices and all reductions happen
afterwards in a fixed order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import (
    BadPosition,
    BitrajError,
    DomainMismatch,
    EnumerationTooLarge,
    LengthMismatch,
    NotNested,
    OutOfHorizon,
    UnknownOutcome,
    ValidationError,
)
from .model import ObservablePVM, QuantumScenario, TimeGrid
from .propagate import PropagatorCache, heisenberg_pvm_stack

DEFAULT_ENUMERATION_CAP = 4 ** 10

TOL_NORMALIZATION = 1e-9
TOL_CAUSALITY = 1e-9

_PARALLEL_THRESHOLD = 1 << 14


def worker_count() -> int:
    """Worker-thread cap from BITRAJ_THREADS (defaults to 1)."""
    raw = os.environ.get("BITRAJ_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class BiOutcome:
    """A pair of outcome tuples, each ordered latest-time-first."""

    plus: tuple
    minus: tuple

    def __post_init__(self):
        plus = tuple(float(f) for f in self.plus)
        minus = tuple(float(f) for f in self.minus)
        if len(plus) != len(minus):
            raise LengthMismatch(
                f"plus tuple has length {len(plus)}, minus {len(minus)}"
            )
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)

    def __len__(self) -> int:
        return len(self.plus)

    @property
    def is_diagonal(self) -> bool:
        return self.plus == self.minus


@dataclass(frozen=True, eq=False)
class BiDistribution:
    """Dense bi-probability table on an ordered time grid.

    ``outcome_sets[i]`` lists the admissible outcomes of slot i+1 (ascending
    time); the table axes run latest-first: (f+_n,...,f+_1,f-_n,...,f-_1).
    ``scenario`` and ``pvms`` keep enough provenance to re-evaluate reduced
    grids (needed by the verification module); ``fingerprint`` identifies the
    generating scenario.
    """

    grid: TimeGrid
    outcome_sets: tuple
    table: np.ndarray
    fingerprint: str = ""
    scenario: QuantumScenario | None = None
    pvms: tuple | None = None

    def __post_init__(self):
        table = np.array(self.table, dtype=complex)
        n = len(self.grid)
        sizes = tuple(len(s) for s in self.outcome_sets)
        if len(self.outcome_sets) != n:
            raise LengthMismatch(
                f"{len(self.outcome_sets)} outcome sets for a grid of length {n}"
            )
        if table.shape != sizes[::-1] + sizes[::-1]:
            raise LengthMismatch(
                f"table shape {table.shape} does not match outcome sizes {sizes}"
            )
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(
            self, "outcome_sets", tuple(tuple(float(f) for f in s) for s in self.outcome_sets)
        )

    def assert_well_formed(self) -> None:
        """Raise unless normalization and latest-slot causality hold.

        Run by the enumeration factories; a violation there means an
        implementation bug.  Hand-built tables (e.g. fault injection in
        tests) skip this and are diagnosed by the verification module.
        """
        total = self.table.sum()
        if abs(total - 1.0) > TOL_NORMALIZATION:
            raise ValidationError(
                [BitrajError(
                    f"table sum {total:.12g} deviates from 1 beyond {TOL_NORMALIZATION:.1e}")]
            )
        if self.n >= 1:
            off = _last_slot_offdiagonal_max(self.table, self.sizes[-1])
            if off > TOL_CAUSALITY:
                raise ValidationError(
                    [BitrajError(
                        f"causality violated: |Q| = {off:.3e} at f+_n != f-_n")]
                )

    @property
    def n(self) -> int:
        return len(self.grid)

    @property
    def sizes(self) -> tuple:
        return tuple(len(s) for s in self.outcome_sets)

    @property
    def uniform_outcomes(self) -> tuple | None:
        """The common outcome set, or None if slots differ."""
        if not self.outcome_sets:
            return ()
        first = self.outcome_sets[0]
        return first if all(s == first for s in self.outcome_sets) else None

    def total(self) -> complex:
        return complex(self.table.sum())

    def value(self, outcome: BiOutcome) -> complex:
        return complex(self.table[_lattice_indices(self.outcome_sets, outcome)])

    def __getitem__(self, outcome: BiOutcome) -> complex:
        return self.value(outcome)

    def diagonal(self) -> np.ndarray:
        """Joint probabilities P(f_n,...,f_1) as a real array (latest-first axes)."""
        n = self.n
        if n == 0:
            return np.real(self.table).copy()
        labels = list(range(n))
        diag = np.einsum(self.table, labels + labels, labels)
        return np.ascontiguousarray(np.real(diag))

    def outcomes_iter(self) -> Iterator[BiOutcome]:
        n = self.n
        rev = self.sizes[::-1]
        sets_rev = self.outcome_sets[::-1]
        for idx in np.ndindex(*(rev + rev)):
            plus = tuple(sets_rev[a][idx[a]] for a in range(n))
            minus = tuple(sets_rev[a][idx[n + a]] for a in range(n))
            yield BiOutcome(plus, minus)

    def entries(self) -> Iterator[tuple]:
        flat = self.table.reshape(-1)
        for k, outcome in enumerate(self.outcomes_iter()):
            yield outcome, complex(flat[k])

    def to_json_dict(self) -> dict:
        outcomes = (
            list(self.uniform_outcomes)
            if self.uniform_outcomes is not None
            else [list(s) for s in self.outcome_sets]
        )
        entries = [
            {
                "plus": list(o.plus),
                "minus": list(o.minus),
                "re": q.real,
                "im": q.imag,
            }
            for o, q in self.entries()
        ]
        return {
            "times": list(self.grid.times),
            "outcomes": outcomes,
            "fingerprint": self.fingerprint,
            "entries": entries,
        }

    def to_csv_rows(self) -> Iterator[list]:
        yield ["plus", "minus", "re", "im"]
        for o, q in self.entries():
            yield [
                " ".join("%.17g" % f for f in o.plus),
                " ".join("%.17g" % f for f in o.minus),
                "%.17g" % q.real,
                "%.17g" % q.imag,
            ]


@dataclass(frozen=True, eq=False)
class TupleFunction:
    """A test function X(f+, f-) tabulated on the full outcome lattice."""

    grid: TimeGrid
    outcome_sets: tuple
    values: np.ndarray

    def __post_init__(self):
        sizes = tuple(len(s) for s in self.outcome_sets)
        values = np.asarray(self.values, dtype=complex)
        if values.shape != sizes[::-1] + sizes[::-1]:
            raise DomainMismatch(
                f"values shape {values.shape} does not match outcome sizes {sizes}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(
            self, "outcome_sets", tuple(tuple(float(f) for f in s) for s in self.outcome_sets)
        )

    @classmethod
    def from_callable(
        cls, grid: TimeGrid, outcome_sets, fn: Callable[[BiOutcome], complex]
    ) -> "TupleFunction":
        sets = tuple(tuple(float(f) for f in s) for s in outcome_sets)
        sizes = tuple(len(s) for s in sets)
        n = len(grid)
        rev = sizes[::-1]
        sets_rev = sets[::-1]
        values = np.empty(rev + rev, dtype=complex)
        for idx in np.ndindex(*values.shape):
            plus = tuple(sets_rev[a][idx[a]] for a in range(n))
            minus = tuple(sets_rev[a][idx[n + a]] for a in range(n))
            values[idx] = fn(BiOutcome(plus, minus))
        return cls(grid, sets, values)

    @classmethod
    def constant(cls, grid: TimeGrid, outcome_sets, value: complex = 1.0) -> "TupleFunction":
        sets = tuple(tuple(float(f) for f in s) for s in outcome_sets)
        sizes = tuple(len(s) for s in sets)[::-1]
        return cls(grid, sets, np.full(sizes + sizes, value, dtype=complex))

    @classmethod
    def indicator(cls, grid: TimeGrid, outcome_sets, outcome: BiOutcome) -> "TupleFunction":
        sets = tuple(tuple(float(f) for f in s) for s in outcome_sets)
        sizes = tuple(len(s) for s in sets)[::-1]
        values = np.zeros(sizes + sizes, dtype=complex)
        values[_lattice_indices(sets, outcome)] = 1.0
        return cls(grid, sets, values)

    def lift(self, fine_grid: TimeGrid, fine_outcome_sets) -> "TupleFunction":
        """Extend to a finer grid by ignoring the added coordinates.

        Every time of this function's grid must appear (bitwise) in
        ``fine_grid``; added slots are broadcast over.  The injection is
        order-preserving, so a reshape with singleton axes suffices.
        """
        fine_sets = tuple(tuple(float(f) for f in s) for s in fine_outcome_sets)
        n_fine = len(fine_grid)
        matched = set()
        for j, t in enumerate(self.grid.times):
            try:
                pos = fine_grid.times.index(t)
            except ValueError:
                raise NotNested(f"time {t} missing from the finer grid {fine_grid.times}") from None
            if fine_sets[pos] != self.outcome_sets[j]:
                raise DomainMismatch(f"outcome set at time {t} differs between grids")
            matched.add(n_fine - 1 - pos)  # latest-first axis of the fine layout
        fine_sizes = tuple(len(s) for s in fine_sets)[::-1]
        shape = tuple(
            fine_sizes[a] if a in matched else 1 for a in range(n_fine)
        )
        expanded = self.values.reshape(shape + shape)
        return TupleFunction(
            fine_grid, fine_sets, np.broadcast_to(expanded, fine_sizes + fine_sizes).copy()
        )


# -- evaluation machinery ----------------------------------------------------


def _lattice_indices(outcome_sets: tuple, outcome: BiOutcome) -> tuple:
    """Table index of a BiOutcome (axes latest-first, plus block then minus)."""
    n = len(outcome_sets)
    if len(outcome) != n:
        raise LengthMismatch(f"outcome length {len(outcome)} != grid length {n}")
    idx = []
    for leg in (outcome.plus, outcome.minus):
        for a, f in enumerate(leg):
            slot_set = outcome_sets[n - 1 - a]
            try:
                idx.append(slot_set.index(f))
            except ValueError:
                raise UnknownOutcome(
                    f"outcome {f} not admissible at slot {n - a} (expected one of {slot_set})"
                ) from None
    return tuple(idx)


def _check_grid(scenario: QuantumScenario, grid: TimeGrid) -> None:
    if grid.times and grid.times[-1] > scenario.horizon:
        raise OutOfHorizon(
            f"grid reaches {grid.times[-1]}, beyond the schedule horizon {scenario.horizon}"
        )


def _slot_stacks(
    scenario: QuantumScenario,
    grid: TimeGrid,
    pvms: Sequence[ObservablePVM] | None = None,
) -> list:
    """Heisenberg projector stacks, one (k_j, d, d) array per slot."""
    _check_grid(scenario, grid)
    cache = PropagatorCache(scenario.schedule)
    if pvms is None:
        pvms = [scenario.pvm] * len(grid)
    return [
        heisenberg_pvm_stack(scenario, t, cache=cache, pvm=pvm)
        for t, pvm in zip(grid.times, pvms)
    ]


def _last_slot_offdiagonal_max(table: np.ndarray, k_n: int) -> float:
    if table.size == 0 or table.ndim == 0:
        return 0.0
    n2 = table.ndim
    n = n2 // 2
    t = np.abs(table)
    mask = ~np.eye(k_n, dtype=bool)
    # axes 0 and n are the plus/minus legs of the latest slot
    moved = np.moveaxis(t, (0, n), (0, 1))
    return float(moved[mask].max()) if mask.any() else 0.0


def _table_from_stacks(rho: np.ndarray, stacks: list, cap: int) -> np.ndarray:
    """Dense table via slotwise two-sided application of projector stacks."""
    sizes = [s.shape[0] for s in stacks]
    entries = 1
    for k in sizes:
        entries *= k * k
    if entries > cap:
        raise EnumerationTooLarge(
            f"table would hold {entries} entries, beyond the cap {cap}"
        )

    chunk_plan = _parallel_plan(sizes, entries)
    if chunk_plan is None:
        a = _grow_table(rho[None, None, :, :], stacks)
        q = np.trace(a, axis1=2, axis2=3)
    else:
        q = _grow_table_parallel(rho, stacks, chunk_plan)
    # construction order is slot 1 outermost; convert to latest-first axes
    q = q.reshape(tuple(sizes) + tuple(sizes))
    n = len(sizes)
    perm = tuple(range(n))[::-1] + tuple(range(n, 2 * n))[::-1]
    # .copy rather than ascontiguousarray: the latter promotes 0-d to 1-d
    return q.transpose(perm).copy(order="C")


def _grow_table(a: np.ndarray, stacks: list) -> np.ndarray:
    for p in stacks:
        k = p.shape[0]
        a = np.einsum("fab,pqbc,gcd->pfqgad", p, a, p, optimize=True)
        a = a.reshape(a.shape[0] * k, a.shape[2] * k, *a.shape[4:])
    return a


def _parallel_plan(sizes, entries):
    workers = worker_count()
    if workers <= 1 or entries < _PARALLEL_THRESHOLD or not sizes:
        return None
    return min(workers, sizes[0] * sizes[0])


def _grow_table_parallel(rho: np.ndarray, stacks: list, workers: int) -> np.ndarray:
    k1 = stacks[0].shape[0]
    rest = stacks[1:]
    tail = 1
    for s in rest:
        tail *= s.shape[0]
    out = np.empty((k1 * tail, k1 * tail), dtype=complex)

    def run(fg):
        f, g = fg
        seed = (stacks[0][f] @ rho @ stacks[0][g])[None, None, :, :]
        block = np.trace(_grow_table(seed, rest), axis1=2, axis2=3)
        out[f * tail:(f + 1) * tail, g * tail:(g + 1) * tail] = block

    pairs = [(f, g) for f in range(k1) for g in range(k1)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(run, pairs))
    return out


def _entry_trace(rho: np.ndarray, stacks: list, plus_idx, minus_idx) -> complex:
    """Direct ordered-product evaluation of one table entry."""
    a = rho
    for p, fp, fm in zip(stacks, plus_idx, minus_idx):
        a = p[fp] @ a @ p[fm]
    return complex(np.trace(a))


def _entry_amplitude(
    rho: np.ndarray, vectors: list, plus_idx, minus_idx
) -> complex:
    """Rank-1 fast path: telescoping product of transition amplitudes.

    ``vectors[j]`` holds the Heisenberg eigenvectors of slot j+1 as columns.
    The entry factors into bra-ket overlaps between consecutive slots plus a
    single matrix element of rho at the earliest slot, with the latest-slot
    causality delta in front.
    """
    n = len(vectors)
    if n == 0:
        return complex(np.trace(rho))
    if plus_idx[-1] != minus_idx[-1]:
        return 0.0 + 0.0j
    amp = 1.0 + 0.0j
    for j in range(n - 1):
        va = vectors[j][:, plus_idx[j]]
        vb = vectors[j + 1][:, plus_idx[j + 1]]
        amp *= np.vdot(vb, va)
        wa = vectors[j][:, minus_idx[j]]
        wb = vectors[j + 1][:, minus_idx[j + 1]]
        amp *= np.conj(np.vdot(wb, wa))
    v1 = vectors[0][:, plus_idx[0]]
    w1 = vectors[0][:, minus_idx[0]]
    return complex(amp * (v1.conj() @ rho @ w1))


def _distribution_for_slots(
    scenario: QuantumScenario,
    grid: TimeGrid,
    pvms: Sequence[ObservablePVM],
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> BiDistribution:
    """Dense table with a (possibly different) PVM per time slot."""
    if len(pvms) != len(grid):
        raise LengthMismatch(f"{len(pvms)} observables for a grid of length {len(grid)}")
    stacks = _slot_stacks(scenario, grid, pvms)
    table = _table_from_stacks(scenario.state.matrix, stacks, cap)
    dist = BiDistribution(
        grid=grid,
        outcome_sets=tuple(tuple(p.outcomes) for p in pvms),
        table=table,
        fingerprint=scenario.fingerprint,
        scenario=scenario,
        pvms=tuple(pvms),
    )
    dist.assert_well_formed()
    return dist


def _rank_one_vectors(stack: np.ndarray) -> np.ndarray:
    """Columns spanning each rank-1 projector in the stack."""
    cols = []
    for p in stack:
        evals, evecs = np.linalg.eigh(p)
        cols.append(evecs[:, -1])
    return np.stack(cols, axis=1)


# -- public operations -------------------------------------------------------


def eval_biprob(
    scenario: QuantumScenario,
    grid: TimeGrid,
    outcome: BiOutcome,
    method: str = "auto",
) -> complex:
    """One bi-probability value Q(f+, f-) on the given grid.

    ``method`` is "trace" (ordered operator products), "amplitude" (rank-1
    PVMs only, telescoping transition amplitudes), or "auto" which picks the
    amplitude path when available.  Both paths agree to ~1e-12.
    """
    if len(outcome) != len(grid):
        raise LengthMismatch(
            f"outcome length {len(outcome)} != grid length {len(grid)}"
        )
    stacks = _slot_stacks(scenario, grid)
    plus_idx = [scenario.pvm.index_of(f) for f in reversed(outcome.plus)]
    minus_idx = [scenario.pvm.index_of(f) for f in reversed(outcome.minus)]

    if method == "auto":
        method = "amplitude" if scenario.pvm.is_rank_one else "trace"
    if method == "trace":
        return _entry_trace(scenario.state.matrix, stacks, plus_idx, minus_idx)
    if method == "amplitude":
        if not scenario.pvm.is_rank_one:
            raise DomainMismatch("amplitude path requires a rank-1 PVM")
        vectors = [_rank_one_vectors(s) for s in stacks]
        return _entry_amplitude(scenario.state.matrix, vectors, plus_idx, minus_idx)
    raise DomainMismatch(f"unknown method {method!r}")


def full_distribution(
    scenario: QuantumScenario,
    grid: TimeGrid,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> BiDistribution:
    """Enumerate the whole table; normalization is checked on construction."""
    return _distribution_for_slots(scenario, grid, [scenario.pvm] * len(grid), cap)


def diagonal_probability(scenario: QuantumScenario, grid: TimeGrid, outcomes) -> float:
    """P(f_n,...,f_1): the diagonal bi-probability, a genuine probability."""
    tup = tuple(float(f) for f in outcomes)
    q = eval_biprob(scenario, grid, BiOutcome(tup, tup))
    return float(q.real)


def marginalize(dist: BiDistribution, position: int) -> BiDistribution:
    """Sum jointly over (f+_j, f-_j); returns the distribution with t_j removed.

    ``position`` is 1-based over ascending times.  By bi-consistency the
    result matches a direct evaluation on the reduced grid.
    """
    n = dist.n
    if not 1 <= position <= n:
        raise BadPosition(f"position {position} outside 1..{n}")
    plus_axis = n - position
    minus_axis = 2 * n - position
    table = dist.table.sum(axis=(plus_axis, minus_axis))
    grid = dist.grid.without(position)
    outcome_sets = tuple(
        s for j, s in enumerate(dist.outcome_sets, start=1) if j != position
    )
    pvms = (
        tuple(p for j, p in enumerate(dist.pvms, start=1) if j != position)
        if dist.pvms is not None
        else None
    )
    return BiDistribution(
        grid=grid,
        outcome_sets=outcome_sets,
        table=table,
        fingerprint=dist.fingerprint,
        scenario=dist.scenario,
        pvms=pvms,
    )


def average(dist: BiDistribution, x: TupleFunction) -> complex:
    """E[X] = sum Q(f+,f-) X(f+,f-), linear in X, equal to 1 for X = 1."""
    if x.grid.times != dist.grid.times:
        raise DomainMismatch(
            f"function grid {x.grid.times} != distribution grid {dist.grid.times}"
        )
    if x.outcome_sets != dist.outcome_sets:
        raise DomainMismatch("function outcome lattice differs from the distribution's")
    return complex(np.sum(dist.table * x.values))
