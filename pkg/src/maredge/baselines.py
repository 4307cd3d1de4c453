"""Random and closest-EC placement schemes that reuse an optimized caching decision."""

from __future__ import annotations

import numpy as np

from .evaluator import Plan
from .workload import Instance

RATE_POLICIES = ("optim", "max")
REDRAWS = 50


class BaselineError(RuntimeError):
    pass


def _rates(inst: Instance, reference: Plan, policy: str) -> tuple[float, ...]:
    if policy == "optim":
        return tuple(reference.rate)
    if policy == "max":
        return tuple(inst.rate_table.rates[-1] for _ in inst.requests)
    raise ValueError(f"rate policy must be one of {RATE_POLICIES}")


def rand_s(inst: Instance, reference: Plan, rng: np.random.Generator | int, rate_policy: str = "optim") -> Plan:
    """Both functions on uniformly drawn ECs, redrawn while a chosen EC has no free VM."""
    rng = np.random.default_rng(rng)
    J = inst.ec_nodes
    free = {j: inst.ec(j).vm_count for j in J}
    compute, storage = [], []
    for r in range(len(inst.requests)):
        for _ in range(REDRAWS):
            i, j = (J[k] for k in rng.integers(len(J), size=2))
            need = {i: 1, j: 1} if i != j else {i: 2}
            if all(free[n] >= c for n, c in need.items()):
                break
        else:
            raise BaselineError(f"no EC with free VMs for request {r} after {REDRAWS} draws")
        for n, c in need.items():
            free[n] -= c
        compute.append(i)
        storage.append(j)
    return Plan(tuple(compute), tuple(storage), reference.cached_models, reference.cached_aros,
                _rates(inst, reference, rate_policy))


def closest_ecs(inst: Instance, node: int) -> list[int]:
    """Activated ECs by hop distance from ``node``, ties to the smaller id."""
    return sorted(inst.ec_nodes, key=lambda j: (inst.topology.hops(node, j), j))


def cec(inst: Instance, reference: Plan, rate_policy: str = "optim") -> Plan:
    """Closest EC to the user's start point, the second closest when it is full.

    When both are full the request still goes to the closest EC; the
    evaluator charges the overload and check_feasibility reports it.
    """
    free = {j: inst.ec(j).vm_count for j in inst.ec_nodes}
    compute, storage = [], []
    for req in inst.requests:
        order = closest_ecs(inst, req.origin)
        picks = []
        for _ in range(2):
            choice = next((j for j in order[:2] if free[j] > 0), order[0])
            free[choice] -= 1
            picks.append(choice)
        compute.append(picks[0])
        storage.append(picks[1])
    return Plan(tuple(compute), tuple(storage), reference.cached_models, reference.cached_aros,
                _rates(inst, reference, rate_policy))
