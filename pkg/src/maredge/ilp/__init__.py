"""Canonical 0-1 program for joint placement, proactive caching and rate selection."""

from __future__ import annotations

import numpy as np

from ..evaluator import Plan
from ..workload import Instance
from .bounds import NormalizationBounds, normalization_bounds
from .constraints import (
    EPSILON,
    big_m,
    build_assignment_constraints,
    build_cache_capacity_and_hit,
    build_caching_constraints,
    build_linearization_constraints,
    build_quality_constraint,
    max_quality,
)
from .objective import build_energy_objective, build_latency_objective
from .program import Constraint, LinearExpr, LinearProgram, constraint
from .variables import FAMILIES, VariableIndex

MODES = ("OptimT", "OptimNT")

__all__ = [
    "EPSILON", "FAMILIES", "MODES", "Constraint", "LinearExpr", "LinearProgram", "NormalizationBounds",
    "VariableIndex", "big_m", "build_assignment_constraints", "build_cache_capacity_and_hit",
    "build_caching_constraints", "build_energy_objective", "build_latency_objective",
    "build_linearization_constraints", "build_program", "build_quality_constraint", "constraint",
    "decode_assignment", "expand_plan", "max_quality", "normalization_bounds",
]


def build_program(
    inst: Instance,
    mu: float,
    mode: str = "OptimT",
    q_bound: float = 0.97,
    bounds: NormalizationBounds | None = None,
) -> LinearProgram:
    if not 0.0 <= mu <= 1.0:
        raise ValueError("weight mu must lie in [0, 1]")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    idx = VariableIndex(inst, terminals=(mode == "OptimT"))
    bounds = bounds or normalization_bounds(inst)
    cons = []
    cons += build_caching_constraints(inst, idx)
    cons += build_cache_capacity_and_hit(inst, idx)
    cons += build_linearization_constraints(inst, idx)
    cons += build_assignment_constraints(inst, idx)
    cons.append(build_quality_constraint(inst, idx, q_bound))

    lat = build_latency_objective(inst, idx)
    en = build_energy_objective(inst, idx)
    wl, we = mu / bounds.latency_max, (1.0 - mu) / bounds.energy_max
    obj: dict[int, float] = {}
    for i, c in lat.coeffs.items():
        obj[i] = obj.get(i, 0.0) + wl * c
    for i, c in en.coeffs.items():
        obj[i] = obj.get(i, 0.0) + we * c
    offset = wl * lat.constant + we * en.constant
    return LinearProgram(
        names=idx.names(),
        constraints=cons,
        objective={i: c for i, c in sorted(obj.items()) if c != 0.0},
        objective_offset=offset,
        index=idx,
        parts={"latency": lat, "energy": en},
        info={"mu": mu, "mode": mode, "q_bound": q_bound, "bounds": bounds},
    )


def expand_plan(inst: Instance, idx: VariableIndex, plan: Plan) -> np.ndarray:
    """Full binary assignment (auxiliaries included) matching a semantic plan."""
    x = np.zeros(len(idx), dtype=np.int8)

    def put(key, value=1):
        if key not in idx:
            raise KeyError(f"plan uses variable {key} that this program does not have")
        x[idx[key]] = value

    J = inst.ec_nodes
    rate_pos = {g: k for k, g in enumerate(inst.rate_table.rates)}
    cached = set(plan.cached_models)
    aros = set(plan.cached_aros)
    for r, req in enumerate(inst.requests):
        i, j0 = plan.compute_node[r], plan.storage_node[r]
        g = rate_pos[plan.rate[r]]
        put(("x", r, i))
        put(("y", r, j0))
        put(("e", r, g))
        put(("xi", r, i, j0))
        for m in req.models:
            s = m.id
            if any((s, j) in cached for j in J):
                put(("phi", r, s, g))
            for l in m.aro_ids:
                if (r, s, l) in aros:
                    put(("h", r, s, l))
            for j in J:
                if (s, j) in cached:
                    if j == j0:
                        put(("alpha", r, s, j))
                    full = True
                    for l in m.aro_ids:
                        if (r, s, l) in aros:
                            put(("beta", r, s, l, j))
                            if j == j0:
                                put(("lambda", r, s, l, j))
                        else:
                            full = False
                    if full:
                        put(("w", r, s, j))
                        if j == j0:
                            put(("omega", r, s, j))
        for j in J:
            hit = any(
                (m.id, j) in cached and all((r, m.id, l) in aros for l in m.aro_ids) for m in req.models
            )
            put(("z", r, j), int(hit))
            put(("q", r, j), int(not hit))
            if hit and j == j0:
                put(("psi", r, j))
    for s, j in cached:
        put(("p", s, j))
        put(("c", s))
    return x


def decode_assignment(inst: Instance, idx: VariableIndex, x) -> Plan:
    x = np.asarray(x)
    compute = [None] * len(inst.requests)
    storage = [None] * len(inst.requests)
    rate = [None] * len(inst.requests)
    models, aros = set(), set()
    for k, key in enumerate(idx.keys):
        if x[k] < 0.5:
            continue
        fam = key[0]
        if fam == "x":
            compute[key[1]] = key[2]
        elif fam == "y":
            storage[key[1]] = key[2]
        elif fam == "e":
            rate[key[1]] = inst.rate_table.rates[key[2]]
        elif fam == "p":
            models.add((key[1], key[2]))
        elif fam == "h":
            aros.add(key[1:])
    return Plan(tuple(compute), tuple(storage), frozenset(models), frozenset(aros), tuple(rate))
