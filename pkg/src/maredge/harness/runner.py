"""Solve, evaluate and aggregate every scheme over a scenario's sweep points."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..baselines import BaselineError, cec, rand_s
from ..evaluator import MetricBreakdown, Plan, check_feasibility, evaluate, objective_value
from ..ilp import build_program, decode_assignment, normalization_bounds
from ..solver import solve
from ..workload import Instance, generate_instance
from .config import SCHEMES, ScenarioConfig

log = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "utilization", "scheme", "replicates", "delay_ms", "delay_se", "energy_j", "energy_se",
    "quality_norm", "objective", "status",
)


@dataclass(frozen=True)
class SchemeResult:
    """One scheme on one generated instance."""

    point: tuple
    replicate: int
    scheme: str
    status: str
    requests: int
    metrics: MetricBreakdown | None
    objective: float = math.nan
    violations: tuple[str, ...] = ()
    plan: Plan | None = None
    wall_time: float = 0.0
    gap: float = math.nan

    @property
    def delay_ms(self) -> float:
        return self.metrics.total_latency / self.requests if self.metrics else math.nan

    @property
    def energy_j(self) -> float:
        return self.metrics.total_energy / self.requests if self.metrics else math.nan


@dataclass(frozen=True)
class SweepResult:
    config: ScenarioConfig
    records: tuple[SchemeResult, ...]
    rows: tuple[dict, ...] = field(default=())

    def select(self, scheme: str, **axes) -> list[SchemeResult]:
        """Records of ``scheme`` at the sweep point given by axis values, in replicate order."""
        names = self.config.axes
        out = []
        for rec in self.records:
            if rec.scheme != scheme:
                continue
            values = dict(zip(names, rec.point))
            if all(math.isclose(values[k], v) for k, v in axes.items()):
                out.append(rec)
        return sorted(out, key=lambda r: (r.point, r.replicate))


def instance_seed(cfg: ScenarioConfig, replicate: int) -> int:
    """Seed of replicate ``replicate``, shared by every sweep point (common random numbers)."""
    return int(np.random.SeedSequence([cfg.seed, replicate]).generate_state(1)[0])


def _baseline_seed(cfg: ScenarioConfig, replicate: int) -> int:
    return int(np.random.SeedSequence([cfg.seed, replicate, 1]).generate_state(1)[0])


def scenario_instance(cfg: ScenarioConfig, point: tuple, replicate: int) -> Instance:
    _, _, inst_cfg = cfg.at(point)
    return generate_instance(inst_cfg, instance_seed(cfg, replicate))


def _optim(cfg, inst, point, replicate, mode, mu, q_bound, bounds) -> SchemeResult:
    lp = build_program(inst, mu, mode, q_bound, bounds)
    sol = solve(lp, cfg.solver)
    R = len(inst.requests)
    if not sol.has_incumbent:
        return SchemeResult(point, replicate, mode, sol.status, R, None, wall_time=sol.wall_time, gap=sol.gap)
    plan = decode_assignment(inst, lp.index, sol.assignment)
    issues = check_feasibility(inst, plan, q_bound, allow_terminals=(mode == "OptimT"))
    return SchemeResult(
        point, replicate, mode, sol.status, R, evaluate(inst, plan), sol.objective_value,
        tuple(v.family for v in issues), plan, sol.wall_time, sol.gap,
    )


def _adopt_restricted_plan(inst, optimt: SchemeResult, optimnt: SchemeResult, mu, bounds) -> SchemeResult:
    """Give OptimT the OptimNT plan when it scores better.

    Every EC-only plan is also a terminal-allowed plan, so this only repairs
    solver tolerance and keeps OptimT <= OptimNT on every instance.
    """
    if optimnt.plan is None:
        return optimt
    value = objective_value(inst, optimnt.plan, mu, bounds.latency_max, bounds.energy_max)
    if optimt.plan is not None and not value < optimt.objective:
        return optimt
    status = optimt.status if optimt.plan is not None else optimnt.status
    return SchemeResult(
        optimt.point, optimt.replicate, "OptimT", status, optimt.requests, optimnt.metrics, value,
        optimnt.violations, optimnt.plan, optimt.wall_time, optimt.gap,
    )


def _baseline(cfg, inst, point, replicate, scheme, reference, q_bound) -> SchemeResult:
    R = len(inst.requests)
    if reference is None:
        return SchemeResult(point, replicate, scheme, "no-reference", R, None)
    try:
        if scheme == "CEC":
            plan = cec(inst, reference, cfg.rate_policy)
        else:
            plan = rand_s(inst, reference, _baseline_seed(cfg, replicate), cfg.rate_policy)
    except BaselineError as exc:
        log.warning("%s failed on replicate %d: %s", scheme, replicate, exc)
        return SchemeResult(point, replicate, scheme, "failed", R, None)
    issues = check_feasibility(inst, plan, q_bound, allow_terminals=False)
    families = tuple(v.family for v in issues)
    status = "ok" if not families else ("overload" if set(families) == {"vm"} else "infeasible")
    return SchemeResult(point, replicate, scheme, status, R, evaluate(inst, plan), violations=families, plan=plan)


def run_scenario(cfg: ScenarioConfig, point: tuple, replicate: int) -> list[SchemeResult]:
    """Every configured scheme on one generated instance.

    The baselines reuse the caching and rate decisions of the OptimT plan
    (OptimNT when only that mode is run), which is solved even when only
    baselines are requested.
    """
    mu, q_bound, _ = cfg.at(point)
    inst = scenario_instance(cfg, point, replicate)
    bounds = normalization_bounds(inst)
    results: dict[str, SchemeResult] = {}
    optim_modes = [m for m in ("OptimT", "OptimNT") if m in cfg.schemes]
    if not optim_modes and any(s in cfg.schemes for s in ("CEC", "RandS")):
        optim_modes = ["OptimT"]
    for mode in optim_modes:
        results[mode] = _optim(cfg, inst, point, replicate, mode, mu, q_bound, bounds)
    if len(optim_modes) == 2:
        results["OptimT"] = _adopt_restricted_plan(inst, results["OptimT"], results["OptimNT"], mu, bounds)
    ref_mode = "OptimT" if "OptimT" in results else "OptimNT"
    reference = results[ref_mode].plan if ref_mode in results else None
    for scheme in ("CEC", "RandS"):
        if scheme in cfg.schemes:
            results[scheme] = _baseline(cfg, inst, point, replicate, scheme, reference, q_bound)
    return [results[s] for s in SCHEMES if s in cfg.schemes]


def _run_unit(args) -> list[SchemeResult]:
    cfg, point, replicate = args
    return run_scenario(cfg, point, replicate)


def _mean_se(values: list[float]) -> tuple[float, float]:
    vals = [v for v in values if math.isfinite(v)]
    if not vals:
        return math.nan, math.nan
    arr = np.array(vals)
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return float(arr.mean()), se


def _status(records: list[SchemeResult]) -> str:
    counts: dict[str, int] = {}
    for rec in records:
        counts[rec.status] = counts.get(rec.status, 0) + 1
    if len(counts) == 1:
        return next(iter(counts))
    return ";".join(f"{k}={counts[k]}" for k in sorted(counts))


def aggregate(cfg: ScenarioConfig, records: list[SchemeResult]) -> list[dict]:
    """One row per (sweep point, scheme), sorted by point then scheme order."""
    groups: dict[tuple, list[SchemeResult]] = {}
    for rec in records:
        groups.setdefault((rec.point, rec.scheme), []).append(rec)
    rows = []
    order = {s: k for k, s in enumerate(SCHEMES)}
    for (point, scheme) in sorted(groups, key=lambda k: (k[0], order[k[1]])):
        recs = sorted(groups[(point, scheme)], key=lambda r: r.replicate)
        delay, delay_se = _mean_se([r.delay_ms for r in recs])
        energy, energy_se = _mean_se([r.energy_j for r in recs])
        quality, _ = _mean_se([r.metrics.quality_norm if r.metrics else math.nan for r in recs])
        objective, _ = _mean_se([r.objective for r in recs])
        row = dict(zip(cfg.axes, point))
        row.update(
            utilization=cfg.utilization(cfg.at(point)[2]), scheme=scheme, replicates=len(recs),
            delay_ms=delay, delay_se=delay_se, energy_j=energy, energy_se=energy_se,
            quality_norm=quality, objective=objective, status=_status(recs),
        )
        rows.append(row)
    return rows


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def rows_to_csv(cfg: ScenarioConfig, rows: list[dict], timing: dict | None = None) -> str:
    columns = list(cfg.axes) + list(RESULT_COLUMNS)
    if timing is not None:
        columns.append("wall_s")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if timing is not None:
            row = dict(row, wall_s=timing.get((tuple(row[a] for a in cfg.axes), row["scheme"]), math.nan))
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def records_to_csv(cfg: ScenarioConfig, records: list[SchemeResult]) -> str:
    """One line per (point, replicate, scheme) with the full metric breakdown."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    fields = list(MetricBreakdown.__dataclass_fields__)
    writer.writerow(list(cfg.axes) + ["replicate", "scheme", "status", "objective", "violations"] + fields)
    order = {s: k for k, s in enumerate(SCHEMES)}
    for rec in sorted(records, key=lambda r: (r.point, r.replicate, order[r.scheme])):
        metrics = [getattr(rec.metrics, f) if rec.metrics else math.nan for f in fields]
        writer.writerow(
            [_fmt(v) for v in rec.point]
            + [rec.replicate, rec.scheme, rec.status, _fmt(rec.objective), "|".join(rec.violations)]
            + [_fmt(v) for v in metrics]
        )
    return buf.getvalue()


def run_sweep(
    cfg: ScenarioConfig,
    out: str | Path | None = None,
    workers: int = 1,
    records_out: str | Path | None = None,
    timing: bool = False,
) -> SweepResult:
    """Run every (point, replicate) pair and write the aggregated CSV to ``out``."""
    units = [(cfg, point, k) for point in cfg.points() for k in range(cfg.seeds)]
    records: list[SchemeResult] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for recs in pool.map(_run_unit, units):
                records.extend(recs)
    else:
        for unit in units:
            records.extend(_run_unit(unit))
            log.info("finished point=%s replicate=%d", unit[1], unit[2])
    rows = aggregate(cfg, records)
    if out is not None:
        wall = None
        if timing:
            wall = {}
            for rec in records:
                wall[(rec.point, rec.scheme)] = wall.get((rec.point, rec.scheme), 0.0) + rec.wall_time
        Path(out).write_text(rows_to_csv(cfg, rows, wall))
    if records_out is not None:
        Path(records_out).write_text(records_to_csv(cfg, records))
    return SweepResult(cfg, tuple(records), tuple(rows))
