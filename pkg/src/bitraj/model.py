"""Domain types for quantum measurement scenarios.

A scenario bundles a Hamiltonian schedule H(t), an initial density operator,
and a projection-valued measure (PVM) for the probed observable, all on one
d-dimensional Hilbert space.  Hamiltonians are piecewise constant in time;
smooth time dependence is approximated by midpoint sampling
(:meth:`HamiltonianSchedule.from_function`), which keeps every propagator an
exact product of segment exponentials.

All types are immutable after validation (arrays are frozen), so instances
can be shared freely across threads.  Tolerances are absolute, measured in
spectral norm, and default to ``DEFAULT_TOL``.

Outcome tuples throughout the package are ordered latest-time-first,
``(f_n, ..., f_1)``, while time grids are ascending ``(t_1, ..., t_n)``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from . import serialize
from .errors import (
    BadTrace,
    DimensionMismatch,
    EmptyGroup,
    IncompletePVM,
    NonHermitian,
    NotAProjector,
    ParseError,
    UncoveredOutcome,
    ValidationError,
)

DEFAULT_TOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _as_operator(obj, name: str) -> np.ndarray:
    a = np.asarray(obj, dtype=complex)
    if a.ndim != 2:
        raise ValidationError([DimensionMismatch(f"{name}: expected a matrix, got ndim={a.ndim}")])
    if not np.all(np.isfinite(a.view(float))):
        raise ValidationError([DimensionMismatch(f"{name}: entries must be finite")])
    return a


def _spectral_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2))


def _check_hermitian(a: np.ndarray, name: str, tol: float) -> list:
    dev = _spectral_norm(a - a.conj().T)
    if dev > tol:
        return [NonHermitian(f"{name}: Hermiticity defect {dev:.3e} exceeds tol {tol:.1e}")]
    return []


# -- Hamiltonian schedule --------------------------------------------------

@dataclass(frozen=True, eq=False)
class HamiltonianSchedule:
    """Piecewise-constant Hamiltonian on contiguous segments starting at 0.

    Each segment is ``(t_start, t_end, H)`` with Hermitian ``H`` (units of
    inverse time, hbar = 1).  The final ``t_end`` may be ``math.inf`` for a
    static Hamiltonian with unbounded horizon.
    """

    segments: tuple

    def __post_init__(self):
        violations = []
        if not self.segments:
            raise ValidationError([DimensionMismatch("schedule: needs at least one segment")])
        cleaned = []
        dim = None
        prev_end = 0.0
        for k, (a, b, h) in enumerate(self.segments):
            a, b = float(a), float(b)
            h = _as_operator(h, f"schedule segment {k}")
            if h.shape[0] != h.shape[1]:
                violations.append(DimensionMismatch(f"schedule segment {k}: matrix is not square"))
                continue
            if dim is None:
                dim = h.shape[0]
            elif h.shape[0] != dim:
                violations.append(
                    DimensionMismatch(
                        f"schedule segment {k}: dimension {h.shape[0]} != {dim}")
                )
            if k == 0 and a != 0.0:
                violations.append(DimensionMismatch(f"schedule: first segment starts at {a}, not 0"))
            if k > 0 and a != prev_end:
                violations.append(
                    DimensionMismatch(
                        f"schedule segment {k}: starts at {a}, previous ends at {prev_end}")
                )
            if not b > a:
                violations.append(DimensionMismatch(f"schedule segment {k}: empty interval [{a}, {b}]"))
            if math.isinf(b) and k != len(self.segments) - 1:
                violations.append(DimensionMismatch(f"schedule segment {k}: only the last segment may be unbounded"))
            violations.extend(_check_hermitian(h, f"schedule segment {k}", DEFAULT_TOL))
            prev_end = b
            cleaned.append((a, b, _frozen(h)))
        if violations:
            raise ValidationError(violations)
        object.__setattr__(self, "segments", tuple(cleaned))

    @classmethod
    def from_static(cls, h, horizon: float = math.inf) -> "HamiltonianSchedule":
        return cls(((0.0, float(horizon), h),))

    @classmethod
    def from_function(
        cls,
        fn: Callable[[float], np.ndarray],
        horizon: float,
        segments: int | None = None,
        segments_per_unit_time: int = 64,
    ) -> "HamiltonianSchedule":
        """Midpoint-sample a smooth ``t -> H(t)`` into a piecewise schedule."""
        horizon = float(horizon)
        if not (horizon > 0 and math.isfinite(horizon)):
            raise ValidationError([DimensionMismatch("from_function: horizon must be finite and positive")])
        if segments is None:
            segments = max(1, math.ceil(segments_per_unit_time * horizon))
        edges = np.linspace(0.0, horizon, segments + 1)
        segs = []
        for a, b in zip(edges[:-1], edges[1:]):
            segs.append((float(a), float(b), fn(0.5 * (a + b))))
        return cls(tuple(segs))

    @property
    def dimension(self) -> int:
        return self.segments[0][2].shape[0]

    @property
    def horizon(self) -> float:
        return self.segments[-1][1]

    def pieces(self, t_from: float, t_to: float) -> Iterator[tuple]:
        """Yield ``(a, b, H)`` covering [t_from, t_to], clipped to segments."""
        for a, b, h in self.segments:
            lo, hi = max(a, t_from), min(b, t_to)
            if hi > lo:
                yield lo, hi, h

    def content_bytes(self) -> bytes:
        parts = []
        for a, b, h in self.segments:
            parts.append(np.array([a, b]).tobytes())
            parts.append(np.ascontiguousarray(h).tobytes())
        return b"".join(parts)


# -- Observable PVM --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ObservablePVM:
    """Orthogonal projectors summing to the identity, one per real outcome."""

    outcomes: tuple
    projectors: tuple
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        outcomes = tuple(float(f) for f in self.outcomes)
        projectors = tuple(_as_operator(p, f"projector[{k}]") for k, p in enumerate(self.projectors))
        violations = []
        if len(outcomes) != len(projectors):
            raise ValidationError(
                [DimensionMismatch(
                    f"pvm: {len(outcomes)} outcomes but {len(projectors)} projectors")]
            )
        if len(set(outcomes)) != len(outcomes):
            violations.append(DimensionMismatch("pvm: outcome values must be distinct"))
        dims = {p.shape for p in projectors}
        if len(dims) != 1 or any(r != c for r, c in dims):
            violations.append(DimensionMismatch(f"pvm: projector shapes differ or non-square: {sorted(dims)}"))
            raise ValidationError(violations)
        d = projectors[0].shape[0]
        if len(outcomes) > d:
            violations.append(DimensionMismatch(f"pvm: {len(outcomes)} outcomes exceed dimension {d}"))
        for f, p in zip(outcomes, projectors):
            violations.extend(_check_hermitian(p, f"projector({f})", self.tol))
            dev = _spectral_norm(p @ p - p)
            if dev > self.tol:
                violations.append(
                    NotAProjector(f"projector({f}): ||P^2 - P|| = {dev:.3e} exceeds tol {self.tol:.1e}")
                )
        for i in range(len(projectors)):
            for j in range(i + 1, len(projectors)):
                dev = _spectral_norm(projectors[i] @ projectors[j])
                if dev > self.tol:
                    violations.append(
                        IncompletePVM(
                            f"projectors({outcomes[i]},{outcomes[j]}): overlap {dev:.3e} exceeds tol {self.tol:.1e}")
                    )
        dev = _spectral_norm(sum(projectors) - np.eye(d))
        if dev > self.tol:
            violations.append(
                IncompletePVM(f"pvm: ||sum P - 1|| = {dev:.3e} exceeds tol {self.tol:.1e}")
            )
        if violations:
            raise ValidationError(violations)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "projectors", tuple(_frozen(p) for p in projectors))

    @classmethod
    def pauli_z(cls) -> "ObservablePVM":
        return cls((1.0, -1.0), (np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))

    @classmethod
    def computational_basis(cls, d: int) -> "ObservablePVM":
        projectors = []
        for k in range(d):
            p = np.zeros((d, d), dtype=complex)
            p[k, k] = 1.0
            projectors.append(p)
        return cls(tuple(float(k) for k in range(d)), tuple(projectors))

    @property
    def dimension(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def size(self) -> int:
        return len(self.outcomes)

    @property
    def is_rank_one(self) -> bool:
        return all(abs(np.trace(p).real - 1.0) <= 1e-9 for p in self.projectors)

    def index_of(self, outcome: float) -> int:
        from .errors import UnknownOutcome

        for k, f in enumerate(self.outcomes):
            if f == float(outcome):
                return k
        raise UnknownOutcome(f"outcome {outcome} not in {self.outcomes}")

    def projector(self, outcome: float) -> np.ndarray:
        return self.projectors[self.index_of(outcome)]

    def content_bytes(self) -> bytes:
        parts = [np.array(self.outcomes).tobytes()]
        parts += [np.ascontiguousarray(p).tobytes() for p in self.projectors]
        return b"".join(parts)


# -- Density operator ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        m = _as_operator(self.matrix, "state")
        violations = []
        if m.shape[0] != m.shape[1]:
            raise ValidationError([DimensionMismatch("state: matrix is not square")])
        violations.extend(_check_hermitian(m, "state", self.tol))
        tr = np.trace(m)
        if abs(tr - 1.0) > self.tol:
            violations.append(BadTrace(f"state: trace {tr:.12g} deviates from 1 beyond tol {self.tol:.1e}"))
        if not violations:
            evals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
            if evals.min() < -self.tol:
                violations.append(
                    BadTrace(f"state: negative eigenvalue {evals.min():.3e} below -tol {self.tol:.1e}")
                )
        if violations:
            raise ValidationError(violations)
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def pure(cls, vector) -> "DensityOperator":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ValidationError([BadTrace("state: zero vector cannot be normalized")])
        v = v / nrm
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityOperator":
        return cls(np.eye(d) / d)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


# -- Time grid -------------------------------------------------------------

@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing measurement times, all positive."""

    times: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if any(t <= 0 for t in times):
            raise ValidationError([DimensionMismatch(f"grid: times must be positive, got {times}")])
        if any(b <= a for a, b in zip(times[:-1], times[1:])):
            raise ValidationError([DimensionMismatch(f"grid: times must be strictly increasing, got {times}")])
        object.__setattr__(self, "times", times)

    # The empty grid is allowed: it indexes the trivial distribution {() -> 1}
    # produced by marginalizing a single-time distribution.

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self):
        return iter(self.times)

    def without(self, position: int) -> "TimeGrid":
        """Grid with t_position removed (1-based, ascending)."""
        return TimeGrid(tuple(t for k, t in enumerate(self.times, start=1) if k != position))

    def is_refinement_of(self, coarse: "TimeGrid") -> bool:
        return set(coarse.times) <= set(self.times)


# -- Scenario --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuantumScenario:
    dimension: int
    schedule: HamiltonianSchedule
    state: DensityOperator
    pvm: ObservablePVM

    def __post_init__(self):
        violations = []
        d = int(self.dimension)
        for name, dim in (
            ("schedule", self.schedule.dimension),
            ("state", self.state.dimension),
            ("observable", self.pvm.dimension),
        ):
            if dim != d:
                violations.append(DimensionMismatch(f"{name}: dimension {dim} != scenario dimension {d}"))
        if violations:
            raise ValidationError(violations)
        object.__setattr__(self, "dimension", d)

    @property
    def horizon(self) -> float:
        return self.schedule.horizon

    @property
    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.array([self.dimension]).tobytes())
        h.update(self.schedule.content_bytes())
        h.update(np.ascontiguousarray(self.state.matrix).tobytes())
        h.update(self.pvm.content_bytes())
        return h.hexdigest()

    def with_state(self, state: DensityOperator) -> "QuantumScenario":
        return QuantumScenario(self.dimension, self.schedule, state, self.pvm)

    def with_pvm(self, pvm: ObservablePVM) -> "QuantumScenario":
        return QuantumScenario(self.dimension, self.schedule, self.state, pvm)


def rabi_scenario(omega: float = 1.0) -> QuantumScenario:
    """Qubit precessing under H = omega * sigma_x / 2, probed in sigma_z."""
    return QuantumScenario(
        dimension=2,
        schedule=HamiltonianSchedule.from_static(0.5 * omega * PAULI_X),
        state=DensityOperator.pure([1.0, 0.0]),
        pvm=ObservablePVM.pauli_z(),
    )


# -- Operations ------------------------------------------------------------

def validate_scenario(raw) -> QuantumScenario:
    """Build a validated scenario from a config dict (or revalidate one).

    All violated invariants are collected into a single
    :class:`~bitraj.errors.ValidationError` rather than failing on the first.
    """
    if isinstance(raw, QuantumScenario):
        return QuantumScenario(raw.dimension, raw.schedule, raw.state, raw.pvm)
    if not isinstance(raw, Mapping):
        raise ParseError(f"scenario: expected a mapping, got {type(raw).__name__}")

    for key in ("dimension", "hamiltonian", "initial_state", "observable"):
        if key not in raw:
            raise ParseError(f"scenario: missing required key '{key}'")
    d = raw["dimension"]
    if not isinstance(d, int) or d < 1:
        raise ParseError(f"scenario: dimension must be a positive integer, got {d!r}")

    violations = []
    schedule = state = pvm = None
    try:
        schedule = _schedule_from_config(raw["hamiltonian"], d)
    except ValidationError as exc:
        violations.extend(exc.violations)
    try:
        state = _state_from_config(raw["initial_state"])
    except ValidationError as exc:
        violations.extend(exc.violations)
    try:
        pvm = _pvm_from_config(raw["observable"], d)
    except ValidationError as exc:
        violations.extend(exc.violations)
    if None not in (schedule, state, pvm):
        try:
            return QuantumScenario(d, schedule, state, pvm)
        except ValidationError as exc:
            violations.extend(exc.violations)
    raise ValidationError(violations)


def _schedule_from_config(cfg, d: int) -> HamiltonianSchedule:
    if not isinstance(cfg, Mapping) or "type" not in cfg:
        raise ParseError("hamiltonian: expected a mapping with a 'type' key")
    kind = cfg["type"]
    if kind == "static":
        h = serialize.matrix_from_json(cfg.get("matrix"), "hamiltonian.matrix")
        horizon = float(cfg.get("horizon", math.inf))
        return HamiltonianSchedule.from_static(h, horizon)
    if kind == "piecewise":
        segs = cfg.get("segments")
        if not isinstance(segs, (list, tuple)) or not segs:
            raise ParseError("hamiltonian.segments: expected a non-empty list")
        built = []
        for k, seg in enumerate(segs):
            if not isinstance(seg, Mapping):
                raise ParseError(f"hamiltonian.segments[{k}]: expected a mapping")
            built.append(
                (
                    float(seg.get("t_start", 0.0)),
                    float(seg.get("t_end", 0.0)),
                    serialize.matrix_from_json(seg.get("matrix"), f"hamiltonian.segments[{k}].matrix"),
                )
            )
        return HamiltonianSchedule(tuple(built))
    if kind == "preset":
        name = cfg.get("name")
        if name == "rabi":
            if d != 2:
                raise ParseError(f"hamiltonian preset 'rabi': requires dimension 2, got {d}")
            omega = float(cfg.get("omega", 1.0))
            return HamiltonianSchedule.from_static(0.5 * omega * PAULI_X)
        raise ParseError(f"hamiltonian preset: unknown name {name!r}")
    raise ParseError(f"hamiltonian: unknown type {kind!r}")


def _state_from_config(cfg) -> DensityOperator:
    if not isinstance(cfg, Mapping):
        raise ParseError("initial_state: expected a mapping")
    if cfg.get("type") == "pure" or "vector" in cfg:
        return DensityOperator.pure(serialize.vector_from_json(cfg.get("vector"), "initial_state.vector"))
    if "matrix" in cfg:
        return DensityOperator(serialize.matrix_from_json(cfg["matrix"], "initial_state.matrix"))
    raise ParseError("initial_state: expected 'vector' (type 'pure') or 'matrix'")


def _pvm_from_config(cfg, d: int) -> ObservablePVM:
    if not isinstance(cfg, Mapping):
        raise ParseError("observable: expected a mapping")
    if cfg.get("type") == "pauli_z":
        if d != 2:
            raise ParseError(f"observable preset 'pauli_z': requires dimension 2, got {d}")
        return ObservablePVM.pauli_z()
    if "values" in cfg and "projectors" in cfg:
        values = cfg["values"]
        if not isinstance(values, (list, tuple)) or not values:
            raise ParseError("observable.values: expected a non-empty list")
        projectors = cfg["projectors"]
        if not isinstance(projectors, (list, tuple)) or len(projectors) != len(values):
            raise ParseError("observable.projectors: expected one matrix per outcome value")
        mats = [
            serialize.matrix_from_json(p, f"observable.projectors[{k}]")
            for k, p in enumerate(projectors)
        ]
        return ObservablePVM(tuple(float(v) for v in values), tuple(mats))
    raise ParseError("observable: expected preset 'pauli_z' or explicit 'values' + 'projectors'")


def coarse_grain_pvm(pvm: ObservablePVM, grouping: Mapping) -> ObservablePVM:
    """Merge outcomes into groups; each group's projector is the block sum.

    ``grouping`` maps every outcome value to a group label; labels become the
    outcome values of the returned PVM and must therefore be distinct real
    numbers.
    """
    uncovered = [f for f in pvm.outcomes if f not in grouping]
    if uncovered:
        raise UncoveredOutcome(f"grouping covers no outcome(s) {uncovered}")
    groups: dict = {}
    for f in pvm.outcomes:
        label = grouping[f]
        groups.setdefault(label, []).append(f)
    for label, members in groups.items():
        if not members:
            raise EmptyGroup(f"group {label!r} has no members")
        if not isinstance(label, (int, float)):
            raise ParseError(f"group label {label!r} is not a real number")
    outcomes = []
    projectors = []
    for label, members in groups.items():
        outcomes.append(float(label))
        projectors.append(sum(pvm.projector(f) for f in members))
    return ObservablePVM(tuple(outcomes), tuple(projectors))


def _haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    phases = np.diag(r).copy()
    phases = phases / np.abs(phases)
    return q * phases


def random_scenario(
    d: int,
    seed: int,
    *,
    norm_cap: float = 1.0,
    pure: bool = False,
    outcome_groups: Sequence[int] | None = None,
) -> QuantumScenario:
    """Deterministic random test instance.

    The Hamiltonian is a GUE-style Hermitian matrix rescaled to operator norm
    ``norm_cap``; the state is full rank (or pure); the PVM comes from the
    columns of a Haar-random unitary, optionally coarse-grained into blocks of
    sizes ``outcome_groups`` (which must sum to d).
    """
    if d < 2:
        raise ValidationError([DimensionMismatch(f"random_scenario: d must be >= 2, got {d}")])
    if norm_cap < 0:
        raise ValidationError([DimensionMismatch(f"random_scenario: norm_cap must be >= 0, got {norm_cap}")])
    if outcome_groups is not None:
        sizes = tuple(int(s) for s in outcome_groups)
        if any(s < 1 for s in sizes) or sum(sizes) != d:
            raise ValidationError(
                [DimensionMismatch(f"random_scenario: outcome_groups {sizes} must be positive and sum to {d}")]
            )
    rng = np.random.default_rng(seed)

    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (g + g.conj().T)
    nrm = _spectral_norm(h)
    if nrm > 0 and norm_cap > 0:
        h = h * (norm_cap / nrm)
    elif norm_cap == 0:
        h = np.zeros((d, d), dtype=complex)

    if pure:
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        state = DensityOperator.pure(v)
    else:
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        m = g @ g.conj().T
        state = DensityOperator(m / np.trace(m).real)

    w = _haar_unitary(d, rng)
    if outcome_groups is None:
        projectors = [np.outer(w[:, k], w[:, k].conj()) for k in range(d)]
        outcomes = tuple(float(k) for k in range(d))
    else:
        projectors = []
        outcomes = []
        start = 0
        for label, size in enumerate(sizes):
            block = w[:, start:start + size]
            projectors.append(block @ block.conj().T)
            outcomes.append(float(label))
            start += size
        outcomes = tuple(outcomes)

    return QuantumScenario(
        dimension=d,
        schedule=HamiltonianSchedule.from_static(h),
        state=state,
        pvm=ObservablePVM(outcomes, tuple(projectors)),
    )
