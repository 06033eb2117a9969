"""Command-line interface.

Subcommands: eval, dist, verify, bound, refine, multiobs, opensys, comb, demo.
Results go to stdout or, with --output, to a file accompanied by a
``<output>.manifest.json`` run manifest.  Exit codes: 0 success, 1 a check
failed (verification or cross-check), 2 input or usage error.

Outcome tuples on the command line are comma-separated values ordered
latest-time-first, matching the table convention.  ``--times`` lists must be
strictly increasing; duplicates are rejected.  The BITRAJ_THREADS environment
variable caps worker threads used for large table enumerations.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .biprob import BiOutcome, BiDistribution, eval_biprob, full_distribution
from .bounds import (
    build_refinement,
    l1_norm,
    minimum_refinement_size,
    nonuniform_bound,
    refinement_monotonicity,
    uniform_bound,
)
from .comb import comb_biprob
from .errors import BitrajError, ParseError, ValidationError
from .model import (
    QuantumScenario,
    TimeGrid,
    _pvm_from_config,
    random_scenario,
    validate_scenario,
)
from .multiobs import ObservableSequence, eval_multiobs, multiobs_distribution
from .opensys import OpenModel, bitrajectory_map, convergence_study, exact_joint_map
from .serialize import format_float
from .verify import check_properties

CROSS_CHECK_TOL = 1e-10


@dataclass
class RunManifest:
    """Reproducibility record written next to every result artifact."""

    command: str
    config: str | None
    seed: int | None
    version: str
    timestamp: str
    outputs: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "timestamp": self.timestamp,
            "outputs": list(self.outputs),
        }


def load_config(path: str):
    """Parse and validate a scenario or open-system model file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if isinstance(cfg, dict) and "system" in cfg:
        return OpenModel.from_dict(cfg)
    return validate_scenario(cfg)


def _parse_times(raw: str) -> TimeGrid:
    try:
        values = tuple(float(x) for x in raw.split(",") if x.strip() != "")
    except ValueError as exc:
        raise ParseError(f"--times: {exc}") from exc
    if not values:
        raise ParseError("--times: need at least one time")
    if len(set(values)) != len(values):
        raise ParseError(f"--times: duplicate entries in {values}")
    return TimeGrid(values)


def _parse_outcomes(raw: str, flag: str) -> tuple:
    try:
        return tuple(float(x) for x in raw.split(",") if x.strip() != "")
    except ValueError as exc:
        raise ParseError(f"{flag}: {exc}") from exc


def _match_outcomes(values: tuple, admissible: tuple, flag: str) -> tuple:
    matched = []
    for v in values:
        hits = [f for f in admissible if abs(f - v) <= 1e-9]
        if not hits:
            raise ParseError(f"{flag}: value {v} is not an outcome of the observable {admissible}")
        matched.append(hits[0])
    return tuple(matched)


def _scenario_from_args(args) -> tuple:
    """(scenario, config_path, seed) from --config or --random-dim/--seed."""
    if getattr(args, "config", None):
        scenario = load_config(args.config)
        if not isinstance(scenario, QuantumScenario):
            raise ParseError(f"{args.config}: expected a scenario file, found an open-system model")
        return scenario, args.config, None
    if getattr(args, "random_dim", None):
        seed = args.seed if args.seed is not None else 0
        return random_scenario(args.random_dim, seed), None, seed
    raise ParseError("provide --config FILE or --random-dim D")


def _emit(args, text: str, manifest: RunManifest) -> None:
    if getattr(args, "output", None):
        out = Path(args.output)
        out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        manifest.outputs.append(str(out))
        manifest_path = Path(str(out) + ".manifest.json")
        manifest_path.write_text(
            json.dumps(manifest.to_json_dict(), indent=2) + "\n", encoding="utf-8"
        )
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _manifest(args, command: str, config: str | None, seed: int | None) -> RunManifest:
    return RunManifest(
        command=command,
        config=config,
        seed=seed,
        version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )


def _complex_dict(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


# -- subcommand handlers ------------------------------------------------------


def _cmd_eval(args) -> int:
    scenario, cfg, seed = _scenario_from_args(args)
    grid = _parse_times(args.times)
    plus = _match_outcomes(_parse_outcomes(args.plus, "--plus"), scenario.pvm.outcomes, "--plus")
    minus = _match_outcomes(_parse_outcomes(args.minus, "--minus"), scenario.pvm.outcomes, "--minus")
    value = eval_biprob(scenario, grid, BiOutcome(plus, minus), method=args.method)
    payload = {
        "times": list(grid.times),
        "plus": list(plus),
        "minus": list(minus),
        "method": args.method,
        "value": _complex_dict(value),
    }
    _emit(args, json.dumps(payload, indent=2), _manifest(args, "eval", cfg, seed))
    return 0


def _dist_text(dist: BiDistribution, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(dist.to_json_dict(), indent=2)
    buf = io.StringIO()
    writer = csv.writer(buf)
    for row in dist.to_csv_rows():
        writer.writerow(row)
    return buf.getvalue()


def _cmd_dist(args) -> int:
    scenario, cfg, seed = _scenario_from_args(args)
    grid = _parse_times(args.times)
    dist = full_distribution(scenario, grid)
    _emit(args, _dist_text(dist, args.format), _manifest(args, "dist", cfg, seed))
    return 0


def _cmd_verify(args) -> int:
    scenario, cfg, seed = _scenario_from_args(args)
    grid = _parse_times(args.times)
    dist = full_distribution(scenario, grid)
    report = check_properties(dist, tolerance=args.tolerance)
    _emit(args, json.dumps(report.to_json_dict(), indent=2), _manifest(args, "verify", cfg, seed))
    return 0 if report.all_pass else 1


def _cmd_bound(args) -> int:
    scenario, cfg, seed = _scenario_from_args(args)
    grid = _parse_times(args.times)
    dist = full_distribution(scenario, grid)
    horizon = args.horizon if args.horizon is not None else grid.times[-1]
    norm = l1_norm(dist)
    non_uni = nonuniform_bound(dist)
    uni = uniform_bound(scenario, horizon)
    payload = {
        "l1_norm": norm,
        "nonuniform_bound": non_uni,
        "uniform_bound": uni,
        "margin": min(non_uni, uni) - norm,
    }
    _emit(args, json.dumps(payload, indent=2), _manifest(args, "bound", cfg, seed))
    return 0


def _cmd_refine(args) -> int:
    scenario, cfg, seed = _scenario_from_args(args)
    grid = _parse_times(args.times)
    mesh = build_refinement(grid, args.size, horizon=scenario.horizon)
    record = refinement_monotonicity(scenario, mesh)
    payload = {
        "base_times": list(mesh.base.times),
        "refined_times": list(mesh.refined.times),
        "injection": list(mesh.injection),
        "minimum_size": minimum_refinement_size(grid),
        "max_gap": mesh.max_gap(),
        "norm_coarse": record.norm_coarse,
        "norm_fine": record.norm_fine,
    }
    _emit(args, json.dumps(payload, indent=2), _manifest(args, "refine", cfg, seed))
    return 0


def _load_observables(args, scenario: QuantumScenario) -> ObservableSequence:
    if args.observables:
        try:
            with open(args.observables, "r", encoding="utf-8") as fh:
                specs = json.load(fh)
        except OSError as exc:
            raise ParseError(f"{args.observables}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.observables}: invalid JSON: {exc.msg}") from exc
    else:
        if not getattr(args, "config", None):
            raise ParseError("multiobs: provide --observables FILE or an 'observables' array in the config")
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
        specs = cfg.get("observables")
        if specs is None:
            raise ParseError("multiobs: provide --observables FILE or an 'observables' array in the config")
    if not isinstance(specs, list) or not specs:
        raise ParseError("observables: expected a non-empty array of PVM specs")
    pvms = [_pvm_from_config(spec, scenario.dimension) for spec in specs]
    return ObservableSequence(tuple(pvms))


def _cmd_multiobs(args) -> int:
    scenario, cfg, seed = _scenario_from_args(args)
    grid = _parse_times(args.times)
    seq = _load_observables(args, scenario)
    if args.plus or args.minus:
        if not (args.plus and args.minus):
            raise ParseError("multiobs: --plus and --minus must be given together")
        plus_raw = _parse_outcomes(args.plus, "--plus")
        minus_raw = _parse_outcomes(args.minus, "--minus")
        n = len(grid)
        plus = tuple(
            _match_outcomes((v,), seq.pvms[n - 1 - a].outcomes, "--plus")[0]
            for a, v in enumerate(plus_raw)
        )
        minus = tuple(
            _match_outcomes((v,), seq.pvms[n - 1 - a].outcomes, "--minus")[0]
            for a, v in enumerate(minus_raw)
        )
        value = eval_multiobs(scenario, grid, seq, BiOutcome(plus, minus))
        payload = {
            "times": list(grid.times),
            "plus": list(plus),
            "minus": list(minus),
            "value": _complex_dict(value),
        }
        _emit(args, json.dumps(payload, indent=2), _manifest(args, "multiobs", cfg, seed))
        return 0
    dist = multiobs_distribution(scenario, grid, seq)
    _emit(args, _dist_text(dist, args.format), _manifest(args, "multiobs", cfg, seed))
    return 0


def _cmd_opensys(args) -> int:
    model = load_config(args.model)
    if not isinstance(model, OpenModel):
        raise ParseError(f"{args.model}: expected an open-system model with a 'system' block")
    if args.study:
        steps = [int(x) for x in args.study.split(",") if x.strip() != ""]
        points = convergence_study(model, args.time, steps)
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["n_steps", "error"])
        for pt in points:
            writer.writerow([pt.n_steps, format_float(pt.error)])
        _emit(args, buf.getvalue(), _manifest(args, "opensys", args.model, None))
        return 0
    approx = bitrajectory_map(model, args.time, args.steps)
    exact = exact_joint_map(model, args.time)
    payload = {
        "time": args.time,
        "n_steps": args.steps,
        "error": approx.distance(exact),
        "trace_preservation_defect": approx.trace_preservation_defect(),
    }
    _emit(args, json.dumps(payload, indent=2), _manifest(args, "opensys", args.model, None))
    return 0


def _cmd_comb(args) -> int:
    scenario, cfg, seed = _scenario_from_args(args)
    grid = _parse_times(args.times)
    plus = _match_outcomes(_parse_outcomes(args.plus, "--plus"), scenario.pvm.outcomes, "--plus")
    minus = _match_outcomes(_parse_outcomes(args.minus, "--minus"), scenario.pvm.outcomes, "--minus")
    outcome = BiOutcome(plus, minus)
    value = comb_biprob(scenario, grid, outcome)
    payload = {
        "times": list(grid.times),
        "plus": list(plus),
        "minus": list(minus),
        "value_comb": _complex_dict(value),
    }
    code = 0
    if args.cross_check:
        direct = eval_biprob(scenario, grid, outcome)
        diff = abs(value - direct)
        payload["value_trace"] = _complex_dict(direct)
        payload["difference"] = diff
        if diff > CROSS_CHECK_TOL:
            code = 1
    _emit(args, json.dumps(payload, indent=2), _manifest(args, "comb", cfg, seed))
    return code


def _cmd_demo(args) -> int:
    if args.name != "rabi":
        raise ParseError(f"demo: unknown demo {args.name!r} (available: rabi)")
    from .model import rabi_scenario

    scenario = rabi_scenario(args.omega)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["t", "q_plus", "q_minus"])
    for k in range(1, args.points + 1):
        t = args.tmax * k / args.points
        grid = TimeGrid((t,))
        q_plus = eval_biprob(scenario, grid, BiOutcome((1.0,), (1.0,))).real
        q_minus = eval_biprob(scenario, grid, BiOutcome((-1.0,), (-1.0,))).real
        writer.writerow([format_float(t), format_float(q_plus), format_float(q_minus)])
    _emit(args, buf.getvalue(), _manifest(args, "demo rabi", None, None))
    return 0


# -- parser -------------------------------------------------------------------


def _add_scenario_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="scenario JSON file")
    p.add_argument("--random-dim", type=int, help="generate a random scenario of this dimension")
    p.add_argument("--seed", type=int, default=None, help="seed for randomized inputs")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", help="write the result here (plus a .manifest.json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bitraj",
        description="Multitime quantum bi-probability toolbox",
    )
    parser.add_argument("--version", action="version", version=f"bitraj {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate one bi-probability entry")
    _add_scenario_source(p)
    p.add_argument("--times", required=True, help="comma-separated, strictly increasing")
    p.add_argument("--plus", required=True, help="outcomes, latest time first")
    p.add_argument("--minus", required=True, help="outcomes, latest time first")
    p.add_argument("--method", default="auto", choices=["auto", "trace", "amplitude"])
    _add_output(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("dist", help="enumerate the full table")
    _add_scenario_source(p)
    p.add_argument("--times", required=True)
    p.add_argument("--format", default="json", choices=["json", "csv"])
    _add_output(p)
    p.set_defaults(func=_cmd_dist)

    p = sub.add_parser("verify", help="run the property battery; exit 1 on failure")
    _add_scenario_source(p)
    p.add_argument("--times", required=True)
    p.add_argument("--tolerance", type=float, default=1e-9)
    _add_output(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bound", help="l1 norm against its bounds")
    _add_scenario_source(p)
    p.add_argument("--times", required=True)
    p.add_argument("--horizon", type=float, default=None, help="defaults to the last grid time")
    _add_output(p)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("refine", help="snapped uniform refinement and norm monotonicity")
    _add_scenario_source(p)
    p.add_argument("--times", required=True)
    p.add_argument("--size", type=int, required=True, help="refined grid size N")
    _add_output(p)
    p.set_defaults(func=_cmd_refine)

    p = sub.add_parser("multiobs", help="multi-observable table or entry")
    _add_scenario_source(p)
    p.add_argument("--times", required=True)
    p.add_argument("--observables", help="JSON file with one PVM spec per slot")
    p.add_argument("--plus", help="outcomes, latest time first")
    p.add_argument("--minus", help="outcomes, latest time first")
    p.add_argument("--format", default="json", choices=["json", "csv"])
    _add_output(p)
    p.set_defaults(func=_cmd_multiobs)

    p = sub.add_parser("opensys", help="bi-trajectory map vs exact joint evolution")
    p.add_argument("--model", required=True, help="model JSON file (scenario plus 'system' block)")
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--steps", type=int, default=16)
    p.add_argument("--study", help="comma-separated step counts, emits CSV n_steps,error")
    _add_output(p)
    p.set_defaults(func=_cmd_opensys)

    p = sub.add_parser("comb", help="bi-instrument evaluation with optional cross-check")
    _add_scenario_source(p)
    p.add_argument("--times", required=True)
    p.add_argument("--plus", required=True)
    p.add_argument("--minus", required=True)
    p.add_argument("--cross-check", action="store_true")
    _add_output(p)
    p.set_defaults(func=_cmd_comb)

    p = sub.add_parser("demo", help="built-in demonstrations")
    p.add_argument("name", help="demo name (rabi)")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--tmax", type=float, default=float(np.pi))
    p.add_argument("--points", type=int, default=8)
    _add_output(p)
    p.set_defaults(func=_cmd_demo)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ParseError, ValidationError, OSError) as exc:
        print(f"bitraj: {exc}", file=sys.stderr)
        return 2
    except BitrajError as exc:
        print(f"bitraj: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
