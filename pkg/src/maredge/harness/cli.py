"""Command line entry point: ``maredge {sweep,solve,export-lp,replay}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..evaluator import MetricBreakdown, Plan, PlanError, check_feasibility, evaluate
from ..ilp import MODES, build_program, decode_assignment
from ..solver import export_program, solve
from ..workload import InstanceError, dumps_instance, loads_instance
from .config import ConfigError, ScenarioConfig, load_config
from .runner import run_sweep, scenario_instance

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
PLAN_SCHEMA = "maredge.plan/1"


def dumps_plan(plan: Plan) -> str:
    return json.dumps({"schema": PLAN_SCHEMA, **plan.to_dict()}, indent=1, sort_keys=True) + "\n"


def loads_plan(text: str) -> Plan:
    d = json.loads(text)
    if d.pop("schema", None) != PLAN_SCHEMA:
        raise PlanError(f"not a {PLAN_SCHEMA} document")
    return Plan.from_dict(d)


def _config(path: str | None) -> ScenarioConfig:
    return load_config(path) if path else ScenarioConfig()


def _single_point(cfg: ScenarioConfig, mu: float | None) -> tuple:
    """First sweep point, with mu overridden when given."""
    point = cfg.points()[0]
    if mu is None:
        return point
    if not 0.0 <= mu <= 1.0:
        raise ConfigError("--mu must lie in [0, 1]")
    if "mu" in cfg.axes:
        k = cfg.axes.index("mu")
        return point[:k] + (mu,) + point[k + 1 :]
    return point


def _prepare(args):
    cfg = _config(args.config)
    if args.mu is not None and "mu" not in cfg.axes:
        cfg = replace(cfg, mu=args.mu)
    point = _single_point(cfg, args.mu)
    mu, q_bound, _ = cfg.at(point)
    inst = loads_instance(Path(args.instance).read_text()) if args.instance else scenario_instance(cfg, point, args.replicate)
    return cfg, inst, mu, q_bound


def _print_metrics(m: MetricBreakdown) -> None:
    print(MetricBreakdown.csv_header())
    print(m.csv_row())


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.seeds is not None:
        if args.seeds < 1:
            raise ConfigError("--seeds must be at least 1")
        cfg = replace(cfg, seeds=args.seeds)
    result = run_sweep(cfg, args.output, workers=args.parallel, records_out=args.records, timing=args.timing)
    print(f"wrote {len(result.rows)} rows to {args.output}", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg, inst, mu, q_bound = _prepare(args)
    lp = build_program(inst, mu, args.mode, q_bound)
    sol = solve(lp, cfg.solver)
    print(f"# status={sol.status} objective={sol.objective_value!r} nodes={sol.node_count} wall_s={sol.wall_time:.3f}")
    if not sol.has_incumbent:
        return EXIT_FAILURE
    plan = decode_assignment(inst, lp.index, sol.assignment)
    _print_metrics(evaluate(inst, plan))
    for v in check_feasibility(inst, plan, q_bound, allow_terminals=(args.mode == "OptimT")):
        print(f"# violation {v.family} {v.where}: {v.detail}")
    if args.plan_out:
        Path(args.plan_out).write_text(dumps_plan(plan))
    if args.instance_out:
        Path(args.instance_out).write_text(dumps_instance(inst))
    return EXIT_OK


def cmd_export_lp(args) -> int:
    _, inst, mu, q_bound = _prepare(args)
    lp = build_program(inst, mu, args.mode, q_bound)
    Path(args.output).write_text(export_program(lp))
    print(f"wrote {lp.n} binaries and {len(lp.constraints)} rows to {args.output}", file=sys.stderr)
    return EXIT_OK


def cmd_replay(args) -> int:
    inst = loads_instance(Path(args.instance).read_text())
    plan = loads_plan(Path(args.plan).read_text())
    _print_metrics(evaluate(inst, plan))
    issues = check_feasibility(inst, plan, args.q_bound, allow_terminals=True)
    for v in issues:
        print(f"# violation {v.family} {v.where}: {v.detail}")
    return EXIT_FAILURE if issues and args.strict else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="maredge", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log solver statistics to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="run a config's sweep and write the aggregated CSV")
    s.add_argument("config")
    s.add_argument("output")
    s.add_argument("--seeds", type=int, help="replicates per sweep point (overrides the config)")
    s.add_argument("--parallel", type=int, default=1, help="worker processes")
    s.add_argument("--records", help="also write one line per replicate and scheme here")
    s.add_argument("--timing", action="store_true", help="add a wall_s column (output no longer reproducible)")
    s.set_defaults(func=cmd_sweep)

    for name, func, help_ in (
        ("solve", cmd_solve, "solve one instance and print its metric breakdown"),
        ("export-lp", cmd_export_lp, "write one instance's 0-1 program in LP format"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="scenario config (defaults when omitted)")
        s.add_argument("--instance", help="serialized instance instead of a generated one")
        s.add_argument("--replicate", type=int, default=0, help="replicate whose seed generates the instance")
        s.add_argument("--mu", type=float, help="latency weight (first sweep value when omitted)")
        s.add_argument("--mode", choices=MODES, default="OptimT")
        if name == "solve":
            s.add_argument("--plan-out", help="write the optimal plan as JSON")
            s.add_argument("--instance-out", help="write the instance as JSON")
        else:
            s.add_argument("-o", "--output", required=True)
        s.set_defaults(func=func)

    s = sub.add_parser("replay", help="re-evaluate a serialized instance and plan")
    s.add_argument("instance")
    s.add_argument("plan")
    s.add_argument("--q-bound", type=float, default=0.97)
    s.add_argument("--strict", action="store_true", help="exit nonzero when the plan violates a constraint")
    s.set_defaults(func=cmd_replay)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, InstanceError, PlanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
