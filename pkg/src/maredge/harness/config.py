"""Scenario configuration: YAML file -> ScenarioConfig."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from ..radio import MBPS, RateTable
from ..solver import SolveOptions
from ..workload import InstanceConfig

SCHEMES = ("OptimT", "OptimNT", "CEC", "RandS")
SWEEP_AXES = ("mu", "requests", "foreground_scale", "background_scale", "total_moving_probability", "q_bound")


class ConfigError(ValueError):
    pass


def _pair(v, scale=1.0) -> tuple[float, float]:
    if isinstance(v, (int, float)):
        return (float(v) * scale, float(v) * scale)
    lo, hi = v
    return (float(lo) * scale, float(hi) * scale)


def _int_pair(v) -> tuple[int, int]:
    if isinstance(v, int):
        return (v, v)
    lo, hi = v
    return (int(lo), int(hi))


# file key -> (InstanceConfig field, converter)
_INSTANCE_KEYS = {
    "requests": ("requests", int),
    "ec_capacity": ("vm_count", int),
    "ec_cpu_ghz": ("ec_cpu_hz", lambda v: _pair(v, 1e9)),
    "ec_core_portion": ("core_portion", float),
    "ec_cache_mb": ("ec_cache_mb", _pair),
    "cpu_architecture_coefficient": ("chip_coefficient", float),
    "terminal_cpu_ghz": ("terminal_cpu_hz", lambda v: float(v) * 1e9),
    "terminal_cache_mb": ("terminal_cache_mb", _pair),
    "terminal_portion": ("terminal_portion", _pair),
    "models_total": ("models_total", int),
    "models_per_request": ("models_per_request", _int_pair),
    "aros_per_model": ("aros_per_model", _int_pair),
    "aro_size_mb": ("aro_size_mb", _pair),
    "aro_pool": ("aro_pool", int),
    "frame_resolution": ("frame", lambda v: (int(v[0]), int(v[1]), int(v[2]) if len(v) > 2 else 8)),
    "foreground_scale": ("foreground_scale", float),
    "background_mbit": ("background_mbit", _pair),
    "background_scale": ("background_scale", float),
    "result_factor": ("result_factor", float),
    "pointer_bits": ("pointer_bits", float),
    "foreground_load": ("omega_fore", float),
    "background_load": ("omega_back", float),
    "cache_miss_penalty_ms": ("miss_penalty_ms", float),
    "total_moving_probability": ("mobility_total", float),
    "mobility_split": ("mobility_split", str),
    "bandwidth_hz": ("bandwidth_hz", float),
    "noise_power_w": ("noise_w", float),
    "path_loss_exponent": ("path_loss_exp", float),
    "transmission_power_dbm": ("bs_power_dbm", float),
    "cell_radius_m": ("cell_radius_m", float),
    "min_distance_m": ("min_distance_m", float),
    "shared_region_frames": ("shared_region_frames", bool),
}
_TOPOLOGY_KEYS = {
    "branching": ("branching", lambda v: tuple(int(b) for b in v)),
    "edges": ("edges", lambda v: tuple((int(a), int(b)) for a, b in v)),
    "latency_per_hop_ms": ("per_hop_ms", float),
    "ec_sites": ("ec_sites", lambda v: tuple(int(n) for n in v)),
    "active_ecs": ("active_ecs", lambda v: tuple(int(n) for n in v)),
    "active_ec_count": ("active_count", int),
    "active_rule": ("active_rule", str),
    "region_level": ("region_level", int),
    "region_hops": ("region_hops", int),
}
_SOLVER_KEYS = {
    "backend": str, "time_limit": float, "relative_gap": float, "absolute_gap": float,
    "branching_order": str, "node_limit": int,
}


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 1
    seeds: int = 20
    schemes: tuple[str, ...] = SCHEMES
    mu: float = 0.5
    q_bound: float = 0.97
    sweep: tuple[tuple[str, tuple], ...] = (("mu", (0.0, 0.25, 0.5, 0.75, 1.0)),)
    instance: InstanceConfig = field(default_factory=InstanceConfig)
    solver: SolveOptions = field(default_factory=lambda: SolveOptions(backend="highs", time_limit=300.0))
    rate_policy: str = "optim"

    def __post_init__(self) -> None:
        if self.seeds < 1:
            raise ConfigError("seeds must be at least 1")
        if not self.schemes or any(s not in SCHEMES for s in self.schemes):
            raise ConfigError(f"schemes must be a nonempty subset of {SCHEMES}")
        if not 0.0 <= self.mu <= 1.0:
            raise ConfigError("mu must lie in [0, 1]")
        if not 0.0 <= self.q_bound <= 1.0:
            raise ConfigError("q_bound must lie in [0, 1]")
        for axis, values in self.sweep:
            if axis not in SWEEP_AXES:
                raise ConfigError(f"cannot sweep over {axis!r}; choose from {SWEEP_AXES}")
            if not values:
                raise ConfigError(f"sweep over {axis} is empty")
            if axis in ("mu", "q_bound", "total_moving_probability") and not all(0 <= v <= 1 for v in values):
                raise ConfigError(f"{axis} values must lie in [0, 1]")
            if axis == "requests" and not all(int(v) >= 1 for v in values):
                raise ConfigError("request counts must be positive")

    @property
    def axes(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.sweep)

    def points(self) -> list[tuple]:
        """Every sweep point as a tuple of axis values, in file order."""
        return list(itertools.product(*(v for _, v in self.sweep)))

    def at(self, point: tuple) -> tuple[float, float, InstanceConfig]:
        """(mu, q_bound, instance config) of one sweep point."""
        mu, qb, inst = self.mu, self.q_bound, self.instance
        for axis, value in zip(self.axes, point):
            if axis == "mu":
                mu = float(value)
            elif axis == "q_bound":
                qb = float(value)
            elif axis == "requests":
                inst = replace(inst, requests=int(value))
            elif axis == "foreground_scale":
                inst = replace(inst, foreground_scale=float(value))
            elif axis == "background_scale":
                inst = replace(inst, background_scale=float(value))
            elif axis == "total_moving_probability":
                inst = replace(inst, mobility_total=float(value))
        return mu, qb, inst

    def utilization(self, inst: InstanceConfig) -> float:
        """Share of VM slots the two functions of every request would occupy."""
        n_ecs = len(inst.topology.active_ecs) if inst.topology.active_ecs else inst.topology.active_count
        slots = n_ecs * inst.vm_count
        return 2.0 * inst.requests / slots if slots else math.inf


def _instance_from(params: dict[str, Any]) -> InstanceConfig:
    inst_kw, topo_kw = {}, {}
    rates = ssim = None
    for key, value in params.items():
        if key in _INSTANCE_KEYS:
            name, conv = _INSTANCE_KEYS[key]
            inst_kw[name] = conv(value)
        elif key in _TOPOLOGY_KEYS:
            name, conv = _TOPOLOGY_KEYS[key]
            topo_kw[name] = conv(value)
        elif key == "rates_mbps":
            rates = tuple(float(g) * MBPS for g in value)
        elif key == "ssim":
            ssim = tuple(float(c) for c in value)
        else:
            raise ConfigError(f"unknown parameter {key!r}")
    base = InstanceConfig()
    if topo_kw:
        inst_kw["topology"] = replace(base.topology, **topo_kw)
    if rates is not None or ssim is not None:
        table = base.rate_table
        try:
            inst_kw["rate_table"] = RateTable(rates or table.rates, ssim or table.ssim)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return replace(base, **inst_kw)


def config_from_dict(d: dict[str, Any]) -> ScenarioConfig:
    if not isinstance(d, dict):
        raise ConfigError("configuration must be a mapping")
    known = {"seed", "seeds", "schemes", "mu", "q_bound", "sweep", "parameters", "solver", "rate_policy"}
    extra = set(d) - known
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    kw: dict[str, Any] = {}
    try:
        for key in ("seed", "seeds"):
            if key in d:
                kw[key] = int(d[key])
        for key in ("mu", "q_bound"):
            if key in d:
                kw[key] = float(d[key])
        if "schemes" in d:
            kw["schemes"] = tuple(str(s) for s in d["schemes"])
        if "rate_policy" in d:
            if d["rate_policy"] not in ("optim", "max"):
                raise ConfigError("rate_policy must be 'optim' or 'max'")
            kw["rate_policy"] = d["rate_policy"]
        if "sweep" in d:
            sweep = d["sweep"] or {}
            if not isinstance(sweep, dict) or not sweep:
                raise ConfigError("sweep must map at least one axis to a list of values")
            kw["sweep"] = tuple(
                (str(axis), tuple(int(v) if axis == "requests" else float(v) for v in values))
                for axis, values in sweep.items()
            )
        if "parameters" in d:
            kw["instance"] = _instance_from(d["parameters"] or {})
        if "solver" in d:
            opts = {}
            for key, value in (d["solver"] or {}).items():
                if key not in _SOLVER_KEYS:
                    raise ConfigError(f"unknown solver option {key!r}")
                opts[key] = _SOLVER_KEYS[key](value)
            base = SolveOptions(backend="highs", time_limit=300.0)
            kw["solver"] = replace(base, **opts)
        return ScenarioConfig(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data or {})
