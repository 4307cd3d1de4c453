"""Requests, metaverse models, edge-cloud profiles and the problem ``Instance``."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, fields, replace
from typing import Any

import numpy as np

from .radio import RadioLink, RateTable, sample_gain
from .topology import (
    MobilityProfile,
    NetworkTopology,
    TopologySpec,
    build_topology,
    hop_delay,
    mobility_profile,
    region_of,
)

log = logging.getLogger(__name__)

MB = 1e6
SCHEMA = "maredge.instance/1"


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    id: int
    background_bits: float
    result_bits: float
    # (ARO id, size in bytes)
    aros: tuple[tuple[int, float], ...]

    @property
    def aro_ids(self) -> tuple[int, ...]:
        return tuple(l for l, _ in self.aros)


@dataclass(frozen=True)
class Request:
    id: int
    origin: int
    terminal: int
    foreground_bits: float
    pointer_bits: float
    mobility: MobilityProfile
    models: tuple[ModelSpec, ...]
    terminal_cpu_hz: float
    terminal_portion: float
    terminal_cache_bytes: float

    def model(self, s: int) -> ModelSpec:
        for m in self.models:
            if m.id == s:
                return m
        raise KeyError(s)

    @property
    def model_ids(self) -> tuple[int, ...]:
        return tuple(m.id for m in self.models)

    @property
    def target_aro_count(self) -> int:
        return sum(len(m.aros) for m in self.models)


@dataclass(frozen=True)
class EcProfile:
    node: int
    vm_count: int
    vm_cpu_hz: float
    cache_bytes: float
    chip_coefficient: float = 1e-18
    core_portion: float = 0.5

    @property
    def cpu_hz(self) -> float:
        """Effective clock of one VM."""
        return self.vm_cpu_hz * self.core_portion


@dataclass(frozen=True)
class Instance:
    topology: NetworkTopology
    requests: tuple[Request, ...]
    ecs: tuple[EcProfile, ...]
    rate_table: RateTable
    links: tuple[RadioLink, ...]
    omega_fore: float = 4.0
    omega_back: float = 10.0
    miss_penalty_ms: float = 25.0
    terminal_chip_coefficient: float = 1e-18
    shared_region_frames: bool = True
    _ec: dict = field(init=False, repr=False, compare=False)
    _aro: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        validate_instance(self)
        object.__setattr__(self, "_ec", {e.node: e for e in self.ecs})
        sizes = {(m.id, l): o for r in self.requests for m in r.models for l, o in m.aros}
        object.__setattr__(self, "_aro", sizes)

    @property
    def ec_nodes(self) -> tuple[int, ...]:
        return tuple(e.node for e in self.ecs)

    def ec(self, node: int) -> EcProfile:
        return self._ec[node]

    @property
    def model_ids(self) -> tuple[int, ...]:
        return tuple(sorted({m.id for r in self.requests for m in r.models}))

    def compute_nodes(self, r: int, terminals: bool = True) -> tuple[int, ...]:
        nodes = self.ec_nodes
        return nodes + (self.requests[r].terminal,) if terminals else nodes

    def aro_size(self, s: int, l: int) -> float:
        return self._aro[(s, l)]

    @property
    def aro_keys(self) -> tuple[tuple[int, int], ...]:
        """Every (model, ARO) pair targeted by some request."""
        return tuple(sorted(self._aro))

    def hop_ms(self, i: int, j: int) -> float:
        return hop_delay(self.topology, i, j)

    def region_server_of(self, node: int) -> int:
        return self.topology.region_server(region_of(self.topology, node))

    def co_region(self, r: int) -> tuple[int, ...]:
        """Requests whose downlink frames are charged to request ``r``."""
        if not self.shared_region_frames:
            return (r,)
        a = region_of(self.topology, self.requests[r].origin)
        return tuple(t for t, req in enumerate(self.requests) if region_of(self.topology, req.origin) == a)


def validate_instance(inst: Instance) -> None:
    t = inst.topology
    if not inst.requests:
        raise InstanceError("instance needs at least one request")
    if not inst.ecs:
        raise InstanceError("instance needs at least one EC")
    if len(inst.links) != len(inst.requests):
        raise InstanceError("one radio link per request required")
    for e in inst.ecs:
        if e.node not in t.ec_nodes:
            raise InstanceError(f"EC {e.node} is not an activated EC of the topology")
        if e.vm_count < 0 or e.vm_cpu_hz <= 0 or e.cache_bytes < 0 or e.chip_coefficient <= 0:
            raise InstanceError(f"EC {e.node} has invalid resources")
        if not 0 < e.core_portion <= 1:
            raise InstanceError("core portion must lie in (0, 1]")
    seen_aros: dict[tuple[int, int], float] = {}
    for k, r in enumerate(inst.requests):
        if r.id != k:
            raise InstanceError("request ids must be 0..R-1 in order")
        if r.terminal not in t.terminal_nodes or t.wired_anchor(r.terminal) != r.origin:
            raise InstanceError(f"request {k}: terminal must hang off its origin router")
        if r.foreground_bits <= 0 or r.pointer_bits < 0:
            raise InstanceError(f"request {k}: bad foreground/pointer size")
        if not 0.30 <= r.terminal_portion <= 0.50:
            raise InstanceError(f"request {k}: terminal CPU portion outside [0.30, 0.50]")
        if r.terminal_cpu_hz <= 0:
            raise InstanceError(f"request {k}: terminal CPU must be positive")
        if not 1 <= len(r.models) <= 4:
            raise InstanceError(f"request {k}: needs between 1 and 4 models")
        if len(set(r.model_ids)) != len(r.models):
            raise InstanceError(f"request {k}: duplicate model")
        if r.mobility.origin != r.origin:
            raise InstanceError(f"request {k}: mobility origin mismatch")
        if r.mobility.total > 1 + 1e-12 or any(not 0 <= p <= 1 for _, p in r.mobility.destinations):
            raise InstanceError(f"request {k}: mobility probabilities out of range")
        for m in r.models:
            if m.background_bits <= 0 or m.result_bits < 0:
                raise InstanceError(f"request {k}: model {m.id} has invalid sizes")
            if not m.aros:
                raise InstanceError(f"request {k}: model {m.id} has no target ARO")
            for l, size in m.aros:
                if not 0 < size <= 10 * MB:
                    raise InstanceError(f"ARO {l} size outside (0, 10] MB")
                if seen_aros.setdefault((m.id, l), size) != size:
                    raise InstanceError(f"ARO {l} of model {m.id} has inconsistent sizes")


# -- generation --------------------------------------------------------------


@dataclass(frozen=True)
class InstanceConfig:
    requests: int = 30
    topology: TopologySpec = TopologySpec()
    vm_count: int = 14
    ec_cpu_hz: tuple[float, float] = (4e9, 8e9)
    core_portion: float = 0.5
    ec_cache_mb: tuple[float, float] = (100.0, 400.0)
    chip_coefficient: float = 1e-18
    terminal_cpu_hz: float = 1e9
    terminal_cache_mb: tuple[float, float] = (0.0, 100.0)
    terminal_portion: tuple[float, float] = (0.30, 0.50)
    models_total: int = 4
    models_per_request: tuple[int, int] = (1, 4)
    aros_per_model: tuple[int, int] = (1, 2)
    aro_size_mb: tuple[float, float] = (0.0, 10.0)
    # ARO pool per model; 0 gives every (request, model) its own AROs
    aro_pool: int = 0
    frame: tuple[int, int, int] = (1280, 720, 8)
    foreground_scale: float = 1.0
    background_mbit: tuple[float, float] = (0.5, 2.0)
    background_scale: float = 1.0
    result_factor: float = 1.0
    pointer_bits: float = 0.0
    omega_fore: float = 4.0
    omega_back: float = 10.0
    miss_penalty_ms: float = 25.0
    mobility_total: float = 1.0
    mobility_split: str = "uniform"
    bandwidth_hz: float = 1e6
    noise_w: float = 1e-11
    path_loss_exp: float = 4.0
    bs_power_dbm: float = 20.0
    cell_radius_m: float = 250.0
    min_distance_m: float = 10.0
    rate_table: RateTable = RateTable()
    shared_region_frames: bool = True


def foreground_bits(width: float, height: float, bits_per_pixel: float) -> float:
    """Compressed foreground-interaction size for one frame."""
    if width <= 0 or height <= 0 or bits_per_pixel <= 0:
        raise ValueError("frame dimensions must be positive")
    bits = width * height * bits_per_pixel * (5.0 / 9.0) * 1e-3
    if bits < 8:
        log.warning("foreground size %.6g bits is below one byte", bits)
    return bits


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def generate_instance(cfg: InstanceConfig, rng: np.random.Generator | int) -> Instance:
    if cfg.requests < 1:
        raise InstanceError("at least one request required")
    lo_m, hi_m = cfg.models_per_request
    if lo_m < 1 or hi_m < lo_m or hi_m > min(4, cfg.models_total):
        raise InstanceError("models per request must lie in [1, min(4, models_total)]")
    if cfg.aros_per_model[0] < 1 or cfg.aros_per_model[1] < cfg.aros_per_model[0]:
        raise InstanceError("each model needs at least one target ARO")
    if not 0.0 <= cfg.mobility_total <= 1.0:
        raise InstanceError("total mobility probability must lie in [0, 1]")
    if isinstance(rng, (int, np.integer)):
        seed_seq = np.random.SeedSequence(int(rng))
    else:
        seed_seq = np.random.SeedSequence(int(rng.integers(2**63)))
    ec_rng, req_rng, mob_rng, radio_rng = (np.random.default_rng(s) for s in seed_seq.spawn(4))

    base = build_topology(replace(cfg.topology, terminal_routers=()), seed=int(seed_seq.entropy % 2**32))
    if len(base.ec_nodes) < 1:
        raise InstanceError("at least one EC must be active")

    ecs = tuple(
        EcProfile(
            node=j,
            vm_count=cfg.vm_count,
            vm_cpu_hz=float(ec_rng.uniform(*cfg.ec_cpu_hz)),
            cache_bytes=float(ec_rng.uniform(*cfg.ec_cache_mb)) * MB,
            chip_coefficient=cfg.chip_coefficient,
            core_portion=cfg.core_portion,
        )
        for j in base.ec_nodes
    )

    fg = foreground_bits(*cfg.frame) * cfg.foreground_scale
    lo, hi = cfg.aro_size_mb

    def aro_size() -> float:
        # uniform on (lo, hi]
        return (hi - req_rng.uniform(0.0, hi - lo)) * MB

    pools: dict[int, list[tuple[int, float]]] = {}
    next_aro = 0
    if cfg.aro_pool > 0:
        for s in range(cfg.models_total):
            pools[s] = []
            for _ in range(cfg.aro_pool):
                pools[s].append((next_aro, aro_size()))
                next_aro += 1

    origins = []
    raw = []
    for r in range(cfg.requests):
        origin = int(req_rng.choice(base.access_routers))
        term_cache = float(req_rng.uniform(*cfg.terminal_cache_mb)) * MB
        portion = float(req_rng.uniform(*cfg.terminal_portion))
        n_models = int(req_rng.integers(lo_m, hi_m + 1))
        chosen = sorted(int(s) for s in req_rng.choice(cfg.models_total, n_models, replace=False))
        models = []
        for s in chosen:
            back = float(req_rng.uniform(*cfg.background_mbit)) * 1e6 * cfg.background_scale
            n_aros = int(req_rng.integers(cfg.aros_per_model[0], cfg.aros_per_model[1] + 1))
            if cfg.aro_pool > 0:
                pick = sorted(req_rng.choice(len(pools[s]), min(n_aros, len(pools[s])), replace=False))
                aros = tuple(pools[s][k] for k in pick)
            else:
                aros = []
                for _ in range(n_aros):
                    aros.append((next_aro, aro_size()))
                    next_aro += 1
                aros = tuple(aros)
            models.append(ModelSpec(s, back, fg * cfg.result_factor, aros))
        origins.append(origin)
        raw.append((origin, term_cache, portion, tuple(models)))

    topo = build_topology(
        replace(cfg.topology, terminal_routers=tuple(origins)), seed=int(seed_seq.entropy % 2**32)
    )
    bs_power = dbm_to_watts(cfg.bs_power_dbm)
    requests = []
    links = []
    for r, (origin, term_cache, portion, models) in enumerate(raw):
        mob = mobility_profile(topo, origin, cfg.mobility_total, cfg.mobility_split, mob_rng)
        requests.append(
            Request(
                id=r,
                origin=origin,
                terminal=topo.terminal_nodes[r],
                foreground_bits=fg,
                pointer_bits=cfg.pointer_bits,
                mobility=mob,
                models=models,
                terminal_cpu_hz=cfg.terminal_cpu_hz,
                terminal_portion=portion,
                terminal_cache_bytes=term_cache,
            )
        )
        distance = float(radio_rng.uniform(cfg.min_distance_m, cfg.cell_radius_m))
        gain = sample_gain(radio_rng)
        interferers = []
        for j in topo.ec_nodes:
            if j == origin:
                continue
            d = float(radio_rng.uniform(cfg.cell_radius_m, 3 * cfg.cell_radius_m))
            interferers.append((bs_power, sample_gain(radio_rng), d))
        links.append(
            RadioLink(cfg.bandwidth_hz, cfg.noise_w, cfg.path_loss_exp, distance, gain, tuple(interferers))
        )

    return Instance(
        topology=topo,
        requests=tuple(requests),
        ecs=ecs,
        rate_table=cfg.rate_table,
        links=tuple(links),
        omega_fore=cfg.omega_fore,
        omega_back=cfg.omega_back,
        miss_penalty_ms=cfg.miss_penalty_ms,
        terminal_chip_coefficient=cfg.chip_coefficient,
        shared_region_frames=cfg.shared_region_frames,
    )


# -- serialization -----------------------------------------------------------


def instance_to_dict(inst: Instance) -> dict[str, Any]:
    t = inst.topology
    return {
        "schema": SCHEMA,
        "topology": {
            "nodes": list(t.nodes),
            "edges": [list(e) for e in t.edges],
            "root": t.root,
            "routers": list(t.routers),
            "ec_sites": list(t.ec_sites),
            "ec_nodes": list(t.ec_nodes),
            "access_routers": list(t.access_routers),
            "terminal_nodes": list(t.terminal_nodes),
            "terminal_router": list(t.terminal_router),
            "region_servers": [list(x) for x in t.region_servers],
            "node_region": [list(x) for x in t.node_region],
            "per_hop_ms": t.per_hop_ms,
        },
        "requests": [
            {
                "id": r.id,
                "origin": r.origin,
                "terminal": r.terminal,
                "foreground_bits": r.foreground_bits,
                "pointer_bits": r.pointer_bits,
                "mobility": [list(d) for d in r.mobility.destinations],
                "models": [
                    {
                        "id": m.id,
                        "background_bits": m.background_bits,
                        "result_bits": m.result_bits,
                        "aros": [list(a) for a in m.aros],
                    }
                    for m in r.models
                ],
                "terminal_cpu_hz": r.terminal_cpu_hz,
                "terminal_portion": r.terminal_portion,
                "terminal_cache_bytes": r.terminal_cache_bytes,
            }
            for r in inst.requests
        ],
        "ecs": [{f.name: getattr(e, f.name) for f in fields(e)} for e in inst.ecs],
        "rate_table": {"rates": list(inst.rate_table.rates), "ssim": list(inst.rate_table.ssim)},
        "links": [
            {
                "bandwidth_hz": k.bandwidth_hz,
                "noise_w": k.noise_w,
                "path_loss_exp": k.path_loss_exp,
                "distance_m": k.distance_m,
                "gain_sq": k.gain_sq,
                "interferers": [list(i) for i in k.interferers],
            }
            for k in inst.links
        ],
        "omega_fore": inst.omega_fore,
        "omega_back": inst.omega_back,
        "miss_penalty_ms": inst.miss_penalty_ms,
        "terminal_chip_coefficient": inst.terminal_chip_coefficient,
        "shared_region_frames": inst.shared_region_frames,
    }


def instance_from_dict(d: dict[str, Any]) -> Instance:
    if d.get("schema") != SCHEMA:
        raise InstanceError(f"unsupported instance schema {d.get('schema')!r}")
    td = d["topology"]
    topo = NetworkTopology(
        nodes=tuple(td["nodes"]),
        edges=tuple(tuple(e) for e in td["edges"]),
        root=td["root"],
        routers=tuple(td["routers"]),
        ec_sites=tuple(td["ec_sites"]),
        ec_nodes=tuple(td["ec_nodes"]),
        access_routers=tuple(td["access_routers"]),
        terminal_nodes=tuple(td["terminal_nodes"]),
        terminal_router=tuple(td["terminal_router"]),
        region_servers=tuple(tuple(x) for x in td["region_servers"]),
        node_region=tuple(tuple(x) for x in td["node_region"]),
        per_hop_ms=td["per_hop_ms"],
    )
    requests = tuple(
        Request(
            id=r["id"],
            origin=r["origin"],
            terminal=r["terminal"],
            foreground_bits=r["foreground_bits"],
            pointer_bits=r["pointer_bits"],
            mobility=MobilityProfile(r["origin"], tuple((int(k), float(p)) for k, p in r["mobility"])),
            models=tuple(
                ModelSpec(m["id"], m["background_bits"], m["result_bits"], tuple((int(l), float(o)) for l, o in m["aros"]))
                for m in r["models"]
            ),
            terminal_cpu_hz=r["terminal_cpu_hz"],
            terminal_portion=r["terminal_portion"],
            terminal_cache_bytes=r["terminal_cache_bytes"],
        )
        for r in d["requests"]
    )
    return Instance(
        topology=topo,
        requests=requests,
        ecs=tuple(EcProfile(**e) for e in d["ecs"]),
        rate_table=RateTable(tuple(d["rate_table"]["rates"]), tuple(d["rate_table"]["ssim"])),
        links=tuple(
            RadioLink(
                k["bandwidth_hz"], k["noise_w"], k["path_loss_exp"], k["distance_m"], k["gain_sq"],
                tuple(tuple(i) for i in k["interferers"]),
            )
            for k in d["links"]
        ),
        omega_fore=d["omega_fore"],
        omega_back=d["omega_back"],
        miss_penalty_ms=d["miss_penalty_ms"],
        terminal_chip_coefficient=d["terminal_chip_coefficient"],
        shared_region_frames=d["shared_region_frames"],
    )


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1, sort_keys=True) + "\n"


def loads_instance(text: str) -> Instance:
    return instance_from_dict(json.loads(text))
