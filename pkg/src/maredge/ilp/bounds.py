"""Worst-case latency and energy used to normalise the two objectives."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..radio import transmit_power
from ..workload import Instance
from .constraints import max_quality
from .objective import BITS_PER_BYTE

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NormalizationBounds:
    latency_max: float
    energy_max: float
    quality_max: float
    terms: dict = field(default_factory=dict, compare=False)


def normalization_bounds(inst: Instance) -> NormalizationBounds:
    """Upper bounds on latency and energy valid for any complete plan.

    Latency takes the slowest rate, the farthest placements, every model
    cached at every EC, a miss and an overload redirection per request.
    Energy takes the most expensive rate, placement and matching work.
    """
    hop = inst.hop_ms
    rates = inst.rate_table.rates
    D = inst.miss_penalty_ms
    J = inst.ec_nodes
    slowest = min(inst.ec(j).cpu_hz for j in J)
    terms = {k: 0.0 for k in ("wireless", "compute", "storage", "wired", "region", "mobility", "penalty")}
    e_terms = {k: 0.0 for k in ("transmit", "compute", "storage")}

    for r, req in enumerate(inst.requests):
        f = req.origin
        dests = req.mobility.destinations
        weight = 1.0 + sum(u for _, u in dests)
        frames = sum(
            inst.requests[t].model(m.id).result_bits
            for t in inst.co_region(r)
            for m in req.models
            if m.id in inst.requests[t].model_ids
        )
        terms["wireless"] += 1e3 * weight * (req.foreground_bits + frames) / rates[0]

        nodes = inst.compute_nodes(r, terminals=True)
        v_term = 1e3 * inst.omega_fore * req.foreground_bits / (req.terminal_cpu_hz * req.terminal_portion)
        v_ec = 1e3 * inst.omega_fore * req.foreground_bits / slowest
        terms["compute"] += max(v_term, v_ec)

        work = req.pointer_bits + sum(
            m.background_bits + sum(BITS_PER_BYTE * o for _, o in m.aros) for m in req.models
        )
        terms["storage"] += 1e3 * inst.omega_back * work / slowest
        terms["penalty"] += 2 * D

        home = inst.region_server_of(f)
        terms["wired"] += (
            max(hop(f, i) for i in nodes)
            + max(hop(i, j) for i in nodes for j in J)
            + hop(home, f)
        )
        terms["region"] += len(req.models) * sum(hop(j, home) for j in J)
        terms["mobility"] += sum(
            u * (hop(inst.region_server_of(k), k) + max(hop(k, i) for i in J)) for k, u in dests
        ) + len(req.models) * sum(u * hop(j, inst.region_server_of(k)) for k, u in dests for j in J)

        link = inst.links[r]
        uplink = req.foreground_bits + req.pointer_bits
        e_terms["transmit"] += max(transmit_power(link, g) * uplink / g for g in rates)
        cycles = inst.omega_fore * req.foreground_bits
        e_term = inst.terminal_chip_coefficient * req.terminal_cpu_hz * cycles / req.terminal_portion
        e_ec = max(inst.ec(j).chip_coefficient * inst.ec(j).cpu_hz * cycles for j in J)
        e_terms["compute"] += max(e_term, e_ec)
        e_terms["storage"] += max(
            inst.ec(j).chip_coefficient * inst.ec(j).cpu_hz * inst.omega_back * work for j in J
        )

    L_max = sum(terms.values())
    E_max = sum(e_terms.values())
    Q_max = max_quality(inst)
    log.debug("latency bound %.6g ms from %s", L_max, terms)
    log.debug("energy bound %.6g J from %s", E_max, e_terms)
    return NormalizationBounds(L_max, E_max, Q_max, {"latency": terms, "energy": e_terms})
