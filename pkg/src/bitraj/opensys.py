"""Open-system dynamical maps as bi-trajectory averages.

A system coupled to the probed observable of an environment evolves, after
tracing the environment out, by a map expressible as a sum over pairs of
classical environment trajectories: each pair carries a forward and a
backward system phase weighted by the environment's bi-probability.  Here
trajectories are discretized as piecewise-constant on a uniform grid (value
f_j on [t_{j-1}, t_j), measured at the right endpoint), and the discretized
map is validated against exact joint evolution.

Superoperators use column stacking throughout: vec(X A Y) = (Y^T kron X) vec(A).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import serialize
from ._linalg import dagger, expm_hermitian, vec, unvec
from .biprob import DEFAULT_ENUMERATION_CAP, full_distribution
from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    EnumerationTooLarge,
    NonHermitian,
    ParseError,
    ValidationError,
)
from .model import (
    DEFAULT_TOL,
    HamiltonianSchedule,
    QuantumScenario,
    TimeGrid,
    validate_scenario,
)
from .propagate import propagator

MAX_JOINT_DIMENSION = 64


@dataclass(frozen=True, eq=False)
class Superoperator:
    """A linear map on operators, stored as a matrix on column-stacked vecs."""

    matrix: np.ndarray
    dim: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d2 = self.dim * self.dim
        if m.shape != (d2, d2):
            raise DimensionMismatch(
                f"superoperator for dimension {self.dim} must be {d2}x{d2}, got {m.shape}"
            )
        m = np.array(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, dim: int) -> "Superoperator":
        return cls(np.eye(dim * dim, dtype=complex), dim)

    @classmethod
    def from_sandwich(cls, x: np.ndarray, y: np.ndarray) -> "Superoperator":
        """The map A -> X A Y."""
        x = np.asarray(x, dtype=complex)
        return cls(np.kron(np.asarray(y, dtype=complex).T, x), x.shape[0])

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(np.asarray(rho, dtype=complex)), self.dim)

    def compose(self, other: "Superoperator") -> "Superoperator":
        """self after other."""
        return Superoperator(self.matrix @ other.matrix, self.dim)

    def trace_preservation_defect(self) -> float:
        """Norm of the identity-costate condition residual."""
        ident = vec(np.eye(self.dim, dtype=complex))
        return float(np.linalg.norm(dagger(self.matrix) @ ident - ident))

    def distance(self, other: "Superoperator") -> float:
        """Operator-norm (largest singular value) distance."""
        return float(np.linalg.norm(self.matrix - other.matrix, 2))


def choi_matrix(s: Superoperator) -> np.ndarray:
    """Choi matrix sum_ij |i><j| kron S(|i><j|); PSD iff the map is CP."""
    d = s.dim
    c = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            c += np.kron(unit, s.apply(unit))
    return c


@dataclass(frozen=True, eq=False)
class OpenModel:
    """System (H_O, V_O, coupling) attached to a probed environment scenario.

    The joint generator is H_O kron 1 + 1 kron H(t) + coupling * V_O kron F,
    with F = sum_f f P(f) built from the environment's PVM.
    """

    h_sys: np.ndarray
    v_sys: np.ndarray
    coupling: float
    environment: QuantumScenario

    def __post_init__(self):
        violations = []
        h = np.asarray(self.h_sys, dtype=complex)
        v = np.asarray(self.v_sys, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValidationError([DimensionMismatch(f"h_o: expected square matrix, got {h.shape}")])
        if v.shape != h.shape:
            violations.append(DimensionMismatch(f"v_o: shape {v.shape} != h_o shape {h.shape}"))
        for name, m in (("h_o", h), ("v_o", v)):
            dev = float(np.linalg.norm(m - dagger(m), 2))
            if dev > DEFAULT_TOL:
                violations.append(NonHermitian(f"{name}: Hermiticity defect {dev:.3e} exceeds tol {DEFAULT_TOL:.1e}"))
        lam = float(self.coupling)
        if not math.isfinite(lam):
            violations.append(DimensionMismatch(f"lambda: must be finite, got {lam}"))
        f_op = self.coupling_operator
        dev = float(np.linalg.norm(f_op - dagger(f_op), 2))
        if dev > DEFAULT_TOL:
            violations.append(NonHermitian(f"coupling observable F: Hermiticity defect {dev:.3e}"))
        if violations:
            raise ValidationError(violations)
        h.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "h_sys", h)
        object.__setattr__(self, "v_sys", v)
        object.__setattr__(self, "coupling", lam)

    @property
    def system_dim(self) -> int:
        return self.h_sys.shape[0]

    @property
    def joint_dim(self) -> int:
        return self.system_dim * self.environment.dimension

    @property
    def coupling_operator(self) -> np.ndarray:
        pvm = self.environment.pvm
        return sum(f * p for f, p in zip(pvm.outcomes, pvm.projectors))

    @classmethod
    def from_dict(cls, cfg: Mapping) -> "OpenModel":
        if "system" not in cfg:
            raise ParseError("open-system model: missing 'system' block")
        sys_cfg = cfg["system"]
        if not isinstance(sys_cfg, Mapping):
            raise ParseError("open-system model: 'system' must be a mapping")
        for key in ("h_o", "v_o", "lambda"):
            if key not in sys_cfg:
                raise ParseError(f"open-system model: system block missing '{key}'")
        env_cfg = {k: v for k, v in cfg.items() if k != "system"}
        environment = validate_scenario(env_cfg)
        return cls(
            h_sys=serialize.matrix_from_json(sys_cfg["h_o"], "system.h_o"),
            v_sys=serialize.matrix_from_json(sys_cfg["v_o"], "system.v_o"),
            coupling=float(sys_cfg["lambda"]),
            environment=environment,
        )


def _system_step_stack(model: OpenModel, dt: float) -> np.ndarray:
    """exp(-i dt (H_O + lambda f V_O)) for every environment outcome f."""
    return np.stack(
        [
            expm_hermitian(model.h_sys + model.coupling * f * model.v_sys, -1j * dt)
            for f in model.environment.pvm.outcomes
        ]
    )


def _uniform_grid(t: float, n_steps: int) -> TimeGrid:
    return TimeGrid(tuple(t * k / n_steps for k in range(1, n_steps + 1)))


def bitrajectory_map(
    model: OpenModel,
    t: float,
    n_steps: int,
    method: str = "auto",
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Superoperator:
    """Discretized bi-trajectory average of the reduced dynamics up to t.

    Trajectory pairs are piecewise constant on the uniform n_steps grid and
    weighted by the environment bi-probability at the grid times; the system
    factors are the ordered step exponentials.  ``method`` "enumerate"
    materializes the trajectory table (subject to the enumeration cap);
    "contract" evaluates the identical sum as a product of per-step transfer
    superoperators on the joint space, with no cap.  "auto" picks "contract".
    """
    if n_steps < 1:
        raise DimensionMismatch(f"n_steps must be >= 1, got {n_steps}")
    t = float(t)
    if method == "auto":
        method = "contract"
    if method == "enumerate":
        return _bitrajectory_map_enumerate(model, t, n_steps, cap)
    if method == "contract":
        return _bitrajectory_map_contract(model, t, n_steps)
    raise DimensionMismatch(f"unknown method {method!r}")


def _bitrajectory_map_enumerate(
    model: OpenModel, t: float, n_steps: int, cap: int
) -> Superoperator:
    k = model.environment.pvm.size
    entries = (k * k) ** n_steps
    if entries > cap:
        raise EnumerationTooLarge(
            f"trajectory-pair table would hold {entries} entries, beyond the cap {cap}"
        )
    grid = _uniform_grid(t, n_steps)
    dist = full_distribution(model.environment, grid, cap)
    big_k = k ** n_steps
    q = dist.table.reshape(big_k, big_k)

    steps = _system_step_stack(model, t / n_steps)
    d_o = model.system_dim
    x = np.eye(d_o, dtype=complex)[None, :, :]
    for _ in range(n_steps):
        # append less-significant (earlier) slots on the right of the product
        x = np.einsum("pab,fbc->pfac", x, steps)
        x = x.reshape(-1, d_o, d_o)
    s = np.einsum("pm,mcd,pab->cadb", q, x.conj(), x, optimize=True)
    return Superoperator(s.reshape(d_o * d_o, d_o * d_o), d_o)


def _bitrajectory_map_contract(model: OpenModel, t: float, n_steps: int) -> Superoperator:
    env = model.environment
    d_o = model.system_dim
    d_e = env.dimension
    joint = d_o * d_e
    steps = _system_step_stack(model, t / n_steps)
    grid = _uniform_grid(t, n_steps)

    from .propagate import PropagatorCache, heisenberg_pvm_stack

    cache = PropagatorCache(env.schedule)
    total = np.eye(joint * joint, dtype=complex)
    for t_j in grid.times:
        projs = heisenberg_pvm_stack(env, t_j, cache=cache)
        step = np.zeros((joint * joint, joint * joint), dtype=complex)
        for a_plus, p_plus in zip(steps, projs):
            b_plus = np.kron(a_plus, p_plus)
            for a_minus, p_minus in zip(steps, projs):
                b_minus = np.kron(a_minus, p_minus)
                step += np.kron(b_minus.conj(), b_plus)
        total = step @ total
    return _reduce_to_system(total, d_o, d_e, env.state.matrix)


def _reduce_to_system(
    joint_superop: np.ndarray, d_o: int, d_e: int, rho_env: np.ndarray
) -> Superoperator:
    """Columns of tr_env[T(E_ij kron rho_env)] over system matrix units."""
    d2 = d_o * d_o
    s = np.empty((d2, d2), dtype=complex)
    for j in range(d_o):
        for i in range(d_o):
            unit = np.zeros((d_o, d_o), dtype=complex)
            unit[i, j] = 1.0
            w = unvec(joint_superop @ vec(np.kron(unit, rho_env)), d_o * d_e)
            reduced = np.einsum("iaja->ij", w.reshape(d_o, d_e, d_o, d_e))
            s[:, j * d_o + i] = vec(reduced)
    return Superoperator(s, d_o)


def exact_joint_map(model: OpenModel, t: float, substeps: int = 1) -> Superoperator:
    """Reference map: joint unitary evolution followed by the partial trace."""
    if model.joint_dim > MAX_JOINT_DIMENSION:
        raise DimensionTooLarge(
            f"joint dimension {model.joint_dim} exceeds {MAX_JOINT_DIMENSION}"
        )
    d_o = model.system_dim
    d_e = model.environment.dimension
    eye_o = np.eye(d_o, dtype=complex)
    eye_e = np.eye(d_e, dtype=complex)
    f_op = model.coupling_operator
    joint_segments = tuple(
        (
            a,
            b,
            np.kron(model.h_sys, eye_e)
            + np.kron(eye_o, h)
            + model.coupling * np.kron(model.v_sys, f_op),
        )
        for a, b, h in model.environment.schedule.segments
    )
    joint_schedule = HamiltonianSchedule(joint_segments)
    u = propagator(joint_schedule, 0.0, float(t), substeps).matrix
    conj_superop = np.kron(u.conj(), u)  # W -> U W U^dag
    return _reduce_to_system(conj_superop, d_o, d_e, model.environment.state.matrix)


@dataclass(frozen=True)
class ConvergencePoint:
    n_steps: int
    error: float


def convergence_study(
    model: OpenModel,
    t: float,
    steps: Sequence[int],
    method: str = "auto",
) -> list:
    """Distance of the discretized map to the exact one per step count.

    The table is reported as computed; per-row monotonicity is an empirical
    observation, not a contract.
    """
    steps = [int(n) for n in steps]
    if any(b <= a for a, b in zip(steps[:-1], steps[1:])):
        raise DimensionMismatch(f"step counts must be ascending, got {steps}")
    exact = exact_joint_map(model, t)
    out = []
    for n in steps:
        approx = bitrajectory_map(model, t, n, method=method)
        out.append(ConvergencePoint(n_steps=n, error=approx.distance(exact)))
    return out
