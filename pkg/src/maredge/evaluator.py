"""Closed-form latency, energy and quality of a complete plan.

This module never looks at the 0-1 program: it works on the semantic
decisions only (where each function runs, what is cached, which rate is
used), which makes it an independent check of the program's objective.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

from .radio import ssim_of_rate
from .topology import hop_delay, region_of
from .workload import Instance


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class Plan:
    compute_node: tuple[int, ...]
    storage_node: tuple[int, ...]
    cached_models: frozenset[tuple[int, int]]
    cached_aros: frozenset[tuple[int, int, int]]
    rate: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "compute_node": list(self.compute_node),
            "storage_node": list(self.storage_node),
            "cached_models": sorted(map(list, self.cached_models)),
            "cached_aros": sorted(map(list, self.cached_aros)),
            "rate": list(self.rate),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Plan":
        return cls(
            tuple(d["compute_node"]),
            tuple(d["storage_node"]),
            frozenset(tuple(m) for m in d["cached_models"]),
            frozenset(tuple(a) for a in d["cached_aros"]),
            tuple(float(g) for g in d["rate"]),
        )


@dataclass(frozen=True)
class MetricBreakdown:
    wireless_delay: float
    wired_delay: float
    processing_delay: float
    penalty_delay: float
    mobility_delay: float
    total_latency: float
    server_energy: float
    terminal_energy: float
    total_energy: float
    quality: float
    quality_norm: float

    @classmethod
    def csv_header(cls) -> str:
        return ",".join(f.name for f in fields(cls))

    def csv_row(self) -> str:
        return ",".join(repr(float(v)) for v in astuple(self))


@dataclass(frozen=True)
class LatencyParts:
    wireless: float
    wired: float
    processing: float
    penalty: float
    mobility: float

    @property
    def total(self) -> float:
        return self.wireless + self.wired + self.processing + self.penalty + self.mobility


@dataclass(frozen=True)
class EnergyParts:
    server: float
    terminal: float

    @property
    def total(self) -> float:
        return self.server + self.terminal


@dataclass(frozen=True)
class Violation:
    family: str
    where: tuple
    detail: str = ""


def _check_complete(inst: Instance, plan: Plan) -> None:
    R = len(inst.requests)
    for name in ("compute_node", "storage_node", "rate"):
        seq = getattr(plan, name)
        if len(seq) != R or any(v is None for v in seq):
            raise PlanError(f"plan has no {name} for every request")


def _region_server(inst: Instance, node: int) -> int:
    return inst.topology.region_server(region_of(inst.topology, node))


def cache_hit(inst: Instance, plan: Plan, r: int, j: int) -> bool:
    """All target AROs of at least one of the request's models are cached at ``j``."""
    req = inst.requests[r]
    for m in req.models:
        if (m.id, j) in plan.cached_models and all((r, m.id, l) in plan.cached_aros for l in m.aro_ids):
            return True
    return False


def overloaded_requests(inst: Instance, plan: Plan) -> set[int]:
    """Requests with a function beyond an EC's VM count (first come, first served)."""
    load = {e.node: 0 for e in inst.ecs}
    over = set()
    for r in range(len(inst.requests)):
        for node in (plan.compute_node[r], plan.storage_node[r]):
            if node in load:
                load[node] += 1
                if load[node] > inst.ec(node).vm_count:
                    over.add(r)
    return over


def _storage_cycles(inst: Instance, plan: Plan, r: int) -> float:
    req = inst.requests[r]
    j = plan.storage_node[r]
    bits = req.pointer_bits
    for m in req.models:
        if (m.id, j) not in plan.cached_models:
            continue
        bits += m.background_bits
        bits += sum(8.0 * o for l, o in m.aros if (r, m.id, l) in plan.cached_aros)
    return inst.omega_back * bits


def evaluate_latency(inst: Instance, plan: Plan) -> LatencyParts:
    _check_complete(inst, plan)
    topo = inst.topology
    anywhere = {s for s, _ in plan.cached_models}
    overloaded = overloaded_requests(inst, plan)
    wireless = wired = processing = penalty = mobility = 0.0

    for r, req in enumerate(inst.requests):
        i, j, g = plan.compute_node[r], plan.storage_node[r], plan.rate[r]
        moves = req.mobility.destinations
        home_region = region_of(topo, req.origin)
        home = topo.region_server(home_region)

        frames = 0.0
        peers = [r]
        if inst.shared_region_frames:
            peers = [t for t, o in enumerate(inst.requests) if region_of(topo, o.origin) == home_region]
        for m in req.models:
            if m.id not in anywhere:
                continue
            for t in peers:
                if m.id in inst.requests[t].model_ids:
                    frames += inst.requests[t].model(m.id).result_bits
        wireless += (1.0 + sum(u for _, u in moves)) * (req.foreground_bits + frames) / g * 1e3

        on_terminal = i == req.terminal
        hosts = [h for s, h in plan.cached_models if s in req.model_ids]
        wired += hop_delay(topo, req.origin, i) + hop_delay(topo, i, j) + hop_delay(topo, home, req.origin)
        wired += sum(hop_delay(topo, h, home) for h in hosts)
        for k, u in moves:
            dest_server = _region_server(inst, k)
            mobility += u * hop_delay(topo, dest_server, k)
            mobility += u * sum(hop_delay(topo, h, dest_server) for h in hosts)
            if not on_terminal:
                mobility += u * hop_delay(topo, k, i)

        cycles = inst.omega_fore * req.foreground_bits
        if on_terminal:
            processing += cycles / (req.terminal_cpu_hz * req.terminal_portion) * 1e3
        else:
            processing += cycles / inst.ec(i).cpu_hz * 1e3
        processing += _storage_cycles(inst, plan, r) / inst.ec(j).cpu_hz * 1e3

        if not cache_hit(inst, plan, r, j):
            penalty += inst.miss_penalty_ms
        if r in overloaded:
            penalty += inst.miss_penalty_ms

    return LatencyParts(wireless, wired, processing, penalty, mobility)


def evaluate_energy(inst: Instance, plan: Plan) -> EnergyParts:
    _check_complete(inst, plan)
    server = terminal = 0.0
    for r, req in enumerate(inst.requests):
        link = inst.links[r]
        g = plan.rate[r]
        # uplink power from the SINR needed for rate g, over the transfer time
        snr_needed = 2.0 ** (g / link.bandwidth_hz) - 1.0
        power = snr_needed * link.interference_plus_noise() / (link.gain_sq * link.distance_m ** -link.path_loss_exp)
        server += power * (req.foreground_bits + req.pointer_bits) / g

        i, j = plan.compute_node[r], plan.storage_node[r]
        cycles = inst.omega_fore * req.foreground_bits
        if i == req.terminal:
            seconds = cycles / req.terminal_cpu_hz / req.terminal_portion
            terminal += inst.terminal_chip_coefficient * req.terminal_cpu_hz**2 * seconds
        else:
            ec = inst.ec(i)
            server += ec.chip_coefficient * ec.cpu_hz**2 * (cycles / ec.cpu_hz)
        ec = inst.ec(j)
        server += ec.chip_coefficient * ec.cpu_hz**2 * (_storage_cycles(inst, plan, r) / ec.cpu_hz)
    return EnergyParts(server, terminal)


def evaluate_quality(inst: Instance, plan: Plan) -> tuple[float, float]:
    q = 0.0
    q_max = 0.0
    top = inst.rate_table.ssim[-1]
    for r, req in enumerate(inst.requests):
        if plan.rate[r] is None:
            raise PlanError(f"request {r} has no rate")
        n = req.target_aro_count
        q += n * ssim_of_rate(inst.rate_table, plan.rate[r])
        q_max += n * top
    return q, q / q_max


def evaluate(inst: Instance, plan: Plan) -> MetricBreakdown:
    lat = evaluate_latency(inst, plan)
    en = evaluate_energy(inst, plan)
    q, qn = evaluate_quality(inst, plan)
    return MetricBreakdown(
        wireless_delay=lat.wireless,
        wired_delay=lat.wired,
        processing_delay=lat.processing,
        penalty_delay=lat.penalty,
        mobility_delay=lat.mobility,
        total_latency=lat.total,
        server_energy=en.server,
        terminal_energy=en.terminal,
        total_energy=en.total,
        quality=q,
        quality_norm=qn,
    )


def check_feasibility(
    inst: Instance, plan: Plan, q_bound: float = 0.97, allow_terminals: bool = True, tol: float = 1e-9
) -> list[Violation]:
    out: list[Violation] = []
    R = len(inst.requests)
    J = set(inst.ec_nodes)
    rates = set(inst.rate_table.rates)
    for name in ("compute_node", "storage_node", "rate"):
        if len(getattr(plan, name)) != R:
            return [Violation("shape", (), f"{name} must cover every request")]

    for r, req in enumerate(inst.requests):
        i = plan.compute_node[r]
        if not (i in J or (allow_terminals and i == req.terminal)):
            out.append(Violation("place_x", (r,), f"compute node {i} not allowed"))
        if plan.storage_node[r] not in J:
            out.append(Violation("place_y", (r,), f"storage node {plan.storage_node[r]} is not an EC"))
        if plan.rate[r] not in rates:
            out.append(Violation("h7", (r,), f"rate {plan.rate[r]} not selectable"))
    for s, j in sorted(plan.cached_models):
        if j not in J or s not in inst.model_ids:
            out.append(Violation("p", (s, j), "model cached outside the activated ECs"))
    for r, s, l in sorted(plan.cached_aros):
        if not 0 <= r < R or s not in inst.requests[r].model_ids or l not in inst.requests[r].model(s).aro_ids:
            out.append(Violation("h", (r, s, l), "not a target ARO of the request"))
    if out:
        return out

    load = {j: 0 for j in J}
    for r in range(R):
        for node in (plan.compute_node[r], plan.storage_node[r]):
            if node in load:
                load[node] += 1
    for j in sorted(J):
        if load[j] > inst.ec(j).vm_count:
            out.append(Violation("vm", (j,), f"{load[j]} functions > {inst.ec(j).vm_count} VMs"))

    for j in sorted(J):
        used = sum(
            inst.aro_size(s, l) for r, s, l in plan.cached_aros if (s, j) in plan.cached_models
        )
        cap = inst.ec(j).cache_bytes
        if used > cap + tol * max(1.0, cap):
            out.append(Violation("h5", (j,), f"{used:.6g} B cached > {cap:.6g} B"))

    holders: dict[tuple[int, int], int] = {}
    for r, s, l in plan.cached_aros:
        holders[(s, l)] = holders.get((s, l), 0) + 1
    for (s, l), n in sorted(holders.items()):
        if n > 1:
            out.append(Violation("h1", (s, l), f"ARO cached for {n} requests"))

    hosted = {s for s, _ in plan.cached_models}
    for r in range(R):
        if not any(a[0] == r for a in plan.cached_aros):
            out.append(Violation("h2", (r,), "no ARO pre-cached for the request"))
    for r, s, l in sorted(plan.cached_aros):
        if s not in hosted:
            out.append(Violation("h3", (r, s, l), "ARO cached without its model"))

    q, qn = evaluate_quality(inst, plan)
    q_max = q / qn
    if q < q_bound * q_max - tol * max(1.0, q_max):
        out.append(Violation("quality", (), f"Q/Qmax = {qn:.6f} < {q_bound}"))
    return out


def objective_value(inst: Instance, plan: Plan, mu: float, latency_max: float, energy_max: float) -> float:
    lat = evaluate_latency(inst, plan).total
    en = evaluate_energy(inst, plan).total
    return mu * lat / latency_max + (1.0 - mu) * en / energy_max


def transmit_power_ok(power: float) -> bool:
    """User-side power is reported unclamped; above 1 W is flagged."""
    return math.isfinite(power) and power <= 1.0
