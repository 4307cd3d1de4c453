"""Latency (ms) and energy (J) as linear functions of the program variables."""

from __future__ import annotations

from ..radio import transmit_power
from ..workload import Instance
from .program import LinearExpr
from .variables import VariableIndex

BITS_PER_BYTE = 8.0


def build_latency_objective(inst: Instance, idx: VariableIndex) -> LinearExpr:
    L = LinearExpr()
    J = inst.ec_nodes
    rates = inst.rate_table.rates
    D = inst.miss_penalty_ms
    hop = inst.hop_ms

    for r, req in enumerate(inst.requests):
        f = req.origin
        dests = req.mobility.destinations
        weight = 1.0 + sum(u for _, u in dests)
        co = inst.co_region(r)

        # wireless up/down link, repeated after every possible move
        for g, rate in enumerate(rates):
            L.add(idx["e", r, g], 1e3 * weight * req.foreground_bits / rate)
        for m in req.models:
            frames = 0.0
            for t in co:
                other = inst.requests[t]
                if m.id in other.model_ids:
                    frames += other.model(m.id).result_bits
            for g, rate in enumerate(rates):
                L.add(idx["phi", r, m.id, g], 1e3 * weight * frames / rate)

        # computational function: access hop, processing, post-move hop
        for i in inst.compute_nodes(r, idx.terminals):
            if i == req.terminal:
                v = 1e3 * inst.omega_fore * req.foreground_bits / (req.terminal_cpu_hz * req.terminal_portion)
                mob = 0.0
            else:
                v = 1e3 * inst.omega_fore * req.foreground_bits / inst.ec(i).cpu_hz
                mob = sum(u * hop(k, i) for k, u in dests)
            L.add(idx["x", r, i], hop(f, i) + v + mob)

        # storage function: matching work on pointers, own cached AROs and models
        for j in J:
            speed = inst.ec(j).cpu_hz
            L.add(idx["y", r, j], 1e3 * inst.omega_back * req.pointer_bits / speed + D)
            L.add(idx["psi", r, j], -D)
            for m in req.models:
                L.add(idx["alpha", r, m.id, j], 1e3 * inst.omega_back * m.background_bits / speed)
                for l, size in m.aros:
                    L.add(idx["lambda", r, m.id, l, j], 1e3 * inst.omega_back * BITS_PER_BYTE * size / speed)

        for i in inst.compute_nodes(r, idx.terminals):
            for j in J:
                L.add(idx["xi", r, i, j], hop(i, j))

        # metaverse-region synchronisation of every cached model the request renders
        home = inst.region_server_of(f)
        for m in req.models:
            for j in J:
                c = hop(j, home) + sum(u * hop(j, inst.region_server_of(k)) for k, u in dests)
                L.add(idx["p", m.id, j], c)

        L.constant += hop(home, f) + sum(u * hop(inst.region_server_of(k), k) for k, u in dests)
    return L


def build_energy_objective(inst: Instance, idx: VariableIndex) -> LinearExpr:
    E = LinearExpr()
    rates = inst.rate_table.rates
    for r, req in enumerate(inst.requests):
        link = inst.links[r]
        uplink_bits = req.foreground_bits + req.pointer_bits
        for g, rate in enumerate(rates):
            E.add(idx["e", r, g], transmit_power(link, rate) * uplink_bits / rate)

        for i in inst.compute_nodes(r, idx.terminals):
            cycles = inst.omega_fore * req.foreground_bits
            if i == req.terminal:
                fq = req.terminal_cpu_hz
                E.add(idx["x", r, i], inst.terminal_chip_coefficient * fq**2 * cycles / (fq * req.terminal_portion))
            else:
                ec = inst.ec(i)
                E.add(idx["x", r, i], ec.chip_coefficient * ec.cpu_hz**2 * cycles / ec.cpu_hz)

        for j in inst.ec_nodes:
            ec = inst.ec(j)
            watts = ec.chip_coefficient * ec.cpu_hz**2
            E.add(idx["y", r, j], watts * inst.omega_back * req.pointer_bits / ec.cpu_hz)
            for m in req.models:
                E.add(idx["alpha", r, m.id, j], watts * inst.omega_back * m.background_bits / ec.cpu_hz)
                for l, size in m.aros:
                    E.add(
                        idx["lambda", r, m.id, l, j],
                        watts * inst.omega_back * BITS_PER_BYTE * size / ec.cpu_hz,
                    )
    return E
