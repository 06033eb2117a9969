"""Bi-probabilities for sequences of different observables.

One PVM per time slot generalizes the single-observable table; the same
trace formula applies with slot-dependent Heisenberg projectors, and all the
structural properties survive.  Any such table decomposes into a weighted sum
of *generic* bi-probabilities, labelled purely by unitaries and basis
indices, whose families along a path of unitaries obey a norm bound governed
by the path length.  No uniform bound is claimed for unrestricted
multi-observable families: their norms can outgrow the single-observable
bound, and a test should assert exactly that.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._linalg import dagger, expm_hermitian
from .biprob import (
    DEFAULT_ENUMERATION_CAP,
    BiDistribution,
    BiOutcome,
    _distribution_for_slots,
    _slot_stacks,
    _entry_trace,
)
from .errors import (
    DimensionMismatch,
    EnumerationTooLarge,
    IndexOutOfRange,
    LengthMismatch,
    SlotOutcomeMismatch,
    UnknownOutcome,
    ValidationError,
)
from .model import DEFAULT_TOL, ObservablePVM, QuantumScenario, TimeGrid
from .propagate import propagator


@dataclass(frozen=True, eq=False)
class ObservableSequence:
    """One PVM per time slot, earliest slot first."""

    pvms: tuple

    def __post_init__(self):
        pvms = tuple(self.pvms)
        if not pvms:
            raise LengthMismatch("observable sequence cannot be empty")
        dims = {p.dimension for p in pvms}
        if len(dims) != 1:
            raise DimensionMismatch(f"slot observables act on different dimensions: {sorted(dims)}")
        object.__setattr__(self, "pvms", pvms)

    def __len__(self) -> int:
        return len(self.pvms)

    def __iter__(self):
        return iter(self.pvms)

    @property
    def dimension(self) -> int:
        return self.pvms[0].dimension


def _slot_indices(seq: ObservableSequence, leg: tuple, what: str):
    """Latest-first outcome tuple -> ascending per-slot index list."""
    n = len(seq)
    idx = []
    for j in range(n):  # ascending slots
        f = leg[n - 1 - j]
        try:
            idx.append(seq.pvms[j].index_of(f))
        except UnknownOutcome as exc:
            raise SlotOutcomeMismatch(f"{what} leg, slot {j + 1}: {exc}") from None
    return idx


def eval_multiobs(
    scenario: QuantumScenario,
    grid: TimeGrid,
    seq: ObservableSequence,
    outcome: BiOutcome,
) -> complex:
    """Trace formula with a slot-dependent Heisenberg projector per time.

    Reduces exactly to the single-observable bi-probability when every slot
    carries the same PVM.
    """
    if len(seq) != len(grid):
        raise LengthMismatch(f"{len(seq)} observables for a grid of length {len(grid)}")
    if seq.dimension != scenario.dimension:
        raise DimensionMismatch(
            f"observable dimension {seq.dimension} != scenario dimension {scenario.dimension}"
        )
    if len(outcome) != len(grid):
        raise LengthMismatch(f"outcome length {len(outcome)} != grid length {len(grid)}")
    plus_idx = _slot_indices(seq, outcome.plus, "plus")
    minus_idx = _slot_indices(seq, outcome.minus, "minus")
    stacks = _slot_stacks(scenario, grid, seq.pvms)
    return _entry_trace(scenario.state.matrix, stacks, plus_idx, minus_idx)


def multiobs_distribution(
    scenario: QuantumScenario,
    grid: TimeGrid,
    seq: ObservableSequence,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> BiDistribution:
    """Dense multi-observable table; satisfies the same property battery."""
    if seq.dimension != scenario.dimension:
        raise DimensionMismatch(
            f"observable dimension {seq.dimension} != scenario dimension {scenario.dimension}"
        )
    return _distribution_for_slots(scenario, grid, seq.pvms, cap)


# -- generic bi-probabilities ------------------------------------------------


@dataclass(frozen=True, eq=False)
class GenericTuple:
    """Unitaries (earliest slot first) with basis-index tuples (latest first).

    Indices label the reference basis, 0..d-1.
    """

    unitaries: tuple
    plus: tuple
    minus: tuple

    def __post_init__(self):
        us = tuple(np.asarray(u, dtype=complex) for u in self.unitaries)
        if not us:
            raise LengthMismatch("generic tuple needs at least one unitary")
        d = us[0].shape[0]
        for u in us:
            if u.shape != (d, d):
                raise DimensionMismatch(f"unitary shapes differ: {u.shape} vs {(d, d)}")
        plus = tuple(int(k) for k in self.plus)
        minus = tuple(int(k) for k in self.minus)
        if len(plus) != len(us) or len(minus) != len(us):
            raise LengthMismatch(
                f"{len(us)} unitaries with index tuples of lengths {len(plus)}, {len(minus)}"
            )
        for k in plus + minus:
            if not 0 <= k < d:
                raise IndexOutOfRange(f"basis index {k} outside 0..{d - 1}")
        object.__setattr__(self, "unitaries", us)
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)

    @property
    def dimension(self) -> int:
        return self.unitaries[0].shape[0]


def eval_generic(g: GenericTuple) -> complex:
    """Generic bi-probability: ordered products of rotated basis projectors.

    The first and last slots carry causality deltas; there is no separate
    state argument, the earliest slot's unitary plays that role in the
    decomposition of observable-based tables.
    """
    n = len(g.unitaries)
    d = g.dimension
    if g.plus[0] != g.minus[0] or g.plus[-1] != g.minus[-1]:
        return 0.0 + 0.0j
    left = np.eye(d, dtype=complex)
    for j in range(n):  # ascending: U_1 ... U_n applied right-to-left
        u = g.unitaries[j]
        k = g.plus[n - 1 - j]
        proj = np.outer(u[:, k], u[:, k].conj())
        left = proj @ left
    right = np.eye(d, dtype=complex)
    for j in range(n - 1, -1, -1):
        u = g.unitaries[j]
        k = g.minus[n - 1 - j]
        proj = np.outer(u[:, k], u[:, k].conj())
        right = proj @ right
    return complex(np.trace(left @ right))


def generic_l1_norm(unitaries: Sequence[np.ndarray]) -> float:
    """l1 norm of the full generic table for the given unitary slots.

    Each entry is a single product of transition amplitudes, so the norm
    factorizes exactly: with S the product of the entrywise moduli of the
    consecutive overlap matrices U_{j+1}^dag U_j, the norm is sum_{a,b}
    S[a,b]^2 (endpoint deltas square the endpoint sums).
    """
    us = [np.asarray(u, dtype=complex) for u in unitaries]
    if not us:
        raise LengthMismatch("need at least one unitary")
    d = us[0].shape[0]
    s = np.eye(d)
    for u_prev, u_next in zip(us[:-1], us[1:]):
        s = np.abs(dagger(u_next) @ u_prev) @ s
    return float((s * s).sum())


# -- decomposition into generic bi-probabilities ------------------------------


def _pvm_basis(pvm: ObservablePVM):
    """Orthonormal columns adapted to the projectors, with outcome labels."""
    cols = []
    labels = []
    for f, p in zip(pvm.outcomes, pvm.projectors):
        rank = int(round(np.trace(p).real))
        evals, evecs = np.linalg.eigh(p)
        order = np.argsort(evals)[::-1]
        for r in range(rank):
            cols.append(evecs[:, order[r]])
            labels.append(f)
    w = np.stack(cols, axis=1)
    return w, labels


@dataclass(frozen=True)
class DecompositionRecord:
    direct: complex
    reconstructed: complex


def decompose_multiobs(
    scenario: QuantumScenario,
    grid: TimeGrid,
    seq: ObservableSequence,
    outcome: BiOutcome,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> DecompositionRecord:
    """Cross-check a multi-observable value against its generic expansion.

    The expansion sums generic bi-probabilities over basis indices compatible
    with the requested outcomes, weighted by sqrt(rho_+ rho_-) eigenvalue
    factors at the earliest slot.  Eigenvalues are ordered descending for
    determinism.
    """
    direct = eval_multiobs(scenario, grid, seq, outcome)

    n = len(grid)
    d = scenario.dimension
    evals, evecs = np.linalg.eigh(scenario.state.matrix)
    order = np.argsort(evals)[::-1]
    rho_vals = np.clip(evals[order], 0.0, None)
    u_rho = evecs[:, order]

    slot_unitaries = [u_rho]
    slot_blocks_plus = []
    slot_blocks_minus = []
    terms = 1
    for j in range(n):  # ascending slots
        w, labels = _pvm_basis(seq.pvms[j])
        u = propagator(scenario.schedule, 0.0, grid.times[j]).matrix
        slot_unitaries.append(dagger(u) @ w)
        f_plus = outcome.plus[n - 1 - j]
        f_minus = outcome.minus[n - 1 - j]
        block_p = [k for k, lab in enumerate(labels) if lab == f_plus]
        block_m = [k for k, lab in enumerate(labels) if lab == f_minus]
        if not block_p or not block_m:
            raise SlotOutcomeMismatch(
                f"slot {j + 1}: outcome {f_plus if not block_p else f_minus} not in PVM"
            )
        slot_blocks_plus.append(block_p)
        slot_blocks_minus.append(block_m)
        terms *= len(block_p) * len(block_m)
    terms *= d * d
    if terms > cap:
        raise EnumerationTooLarge(f"decomposition would sum {terms} terms, beyond the cap {cap}")

    recon = 0.0 + 0.0j
    for k1p in range(d):
        for k1m in range(d):
            weight = np.sqrt(rho_vals[k1p] * rho_vals[k1m])
            if weight == 0.0:
                continue
            for ks_plus in itertools.product(*slot_blocks_plus):
                for ks_minus in itertools.product(*slot_blocks_minus):
                    plus = tuple(reversed((k1p,) + ks_plus))
                    minus = tuple(reversed((k1m,) + ks_minus))
                    g = GenericTuple(tuple(slot_unitaries), plus, minus)
                    recon += weight * eval_generic(g)
    return DecompositionRecord(direct=complex(direct), reconstructed=complex(recon))


# -- paths of unitaries --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class UnitaryPath:
    """Piecewise-constant-generator curve in the unitary group on [0, 1].

    ``segments`` are (duration, V) pairs with Hermitian generators, durations
    summing to 1; ``anchor`` is the starting unitary.  Later segments act on
    the left, so the curve is the time-ordered exponential of the generators
    applied to the anchor.
    """

    segments: tuple
    anchor: np.ndarray

    def __post_init__(self):
        segs = tuple((float(w), np.asarray(v, dtype=complex)) for w, v in self.segments)
        if not segs:
            raise LengthMismatch("path needs at least one segment")
        d = segs[0][1].shape[0]
        violations = []
        total = 0.0
        for i, (w, v) in enumerate(segs):
            if w <= 0:
                violations.append(LengthMismatch(f"segment {i}: duration {w} must be positive"))
            if v.shape != (d, d):
                violations.append(DimensionMismatch(f"segment {i}: generator shape {v.shape} != {(d, d)}"))
            elif float(np.linalg.norm(v - dagger(v), 2)) > DEFAULT_TOL:
                violations.append(LengthMismatch(f"segment {i}: generator is not Hermitian"))
            total += w
        if abs(total - 1.0) > 1e-9:
            violations.append(LengthMismatch(f"durations sum to {total}, expected 1"))
        anchor = np.asarray(self.anchor, dtype=complex)
        if anchor.shape != (d, d):
            violations.append(DimensionMismatch(f"anchor shape {anchor.shape} != {(d, d)}"))
        elif float(np.linalg.norm(dagger(anchor) @ anchor - np.eye(d), 2)) > 1e-9:
            violations.append(LengthMismatch("anchor is not unitary"))
        if violations:
            raise ValidationError(violations)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "anchor", anchor)

    @property
    def dimension(self) -> int:
        return self.anchor.shape[0]

    def unitary(self, tau: float) -> np.ndarray:
        """The curve point at parameter tau in [0, 1]."""
        tau = float(tau)
        if not 0.0 <= tau <= 1.0 + 1e-12:
            raise IndexOutOfRange(f"path parameter {tau} outside [0, 1]")
        u = self.anchor.copy()
        done = 0.0
        for w, v in self.segments:
            step = min(w, max(0.0, tau - done))
            if step > 0:
                u = expm_hermitian(v, -1j * step) @ u
            done += w
            if done >= tau:
                break
        return u

    def endpoint(self) -> np.ndarray:
        return self.unitary(1.0)

    def concatenated(self, other: "UnitaryPath") -> "UnitaryPath":
        """Traverse this path then ``other``, re-anchored at this endpoint.

        Parameters are rescaled to halves with generators doubled, so every
        visited unitary (and the total length) is preserved.
        """
        if other.dimension != self.dimension:
            raise DimensionMismatch("cannot concatenate paths of different dimensions")
        first = tuple((0.5 * w, 2.0 * v) for w, v in self.segments)
        second = tuple((0.5 * w, 2.0 * v) for w, v in other.segments)
        return UnitaryPath(first + second, self.anchor)


def path_length(path: UnitaryPath) -> float:
    """Arc length: sum of duration * ||V||_op over the segments (exact)."""
    return float(sum(w * np.linalg.norm(v, 2) for w, v in path.segments))


@dataclass(frozen=True)
class PathBoundRecord:
    max_l1: float
    bound: float


def path_bound_check(
    path: UnitaryPath,
    parameter_grids: Sequence[Sequence[float]],
) -> PathBoundRecord:
    """Norms of generic families sampled along the path versus the length bound.

    For each parameter tuple, the slots are the curve points at those
    parameters; the l1 norm is computed in closed form, so no enumeration cap
    applies.  The bound d^2 exp[2(d-1) Length] is independent of the samples.
    """
    d = path.dimension
    worst = 0.0
    for taus in parameter_grids:
        taus = [float(t) for t in taus]
        if any(b <= a for a, b in zip(taus[:-1], taus[1:])):
            raise LengthMismatch(f"parameter tuple {taus} must be strictly increasing")
        unitaries = [path.unitary(t) for t in taus]
        worst = max(worst, generic_l1_norm(unitaries))
    bound = d * d * float(np.exp(2.0 * (d - 1) * path_length(path)))
    return PathBoundRecord(max_l1=worst, bound=bound)
