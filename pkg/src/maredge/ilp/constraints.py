"""Constraint families of the joint placement / caching / rate program."""

from __future__ import annotations

from ..workload import MB, Instance
from .program import Constraint, constraint
from .variables import VariableIndex

# big-M tolerance; left-hand sides are integer counts so any value in (0, 1) is exact
EPSILON = 0.5


def big_m(inst: Instance) -> float:
    n_aros = len(inst.aro_keys)
    max_models = max(len(r.models) for r in inst.requests)
    return float(n_aros * max_models + 1)


def build_caching_constraints(inst: Instance, idx: VariableIndex) -> list[Constraint]:
    cons = []
    J = inst.ec_nodes
    # each (model, ARO) pair is pre-cached for at most one request
    holders: dict[tuple[int, int], list[int]] = {}
    for r, req in enumerate(inst.requests):
        for m in req.models:
            for l in m.aro_ids:
                holders.setdefault((m.id, l), []).append(idx["h", r, m.id, l])
    for (s, l), cols in sorted(holders.items()):
        cons.append(constraint("h1", (s, l), [(c, 1.0) for c in cols], "<=", 1.0))
    for r, req in enumerate(inst.requests):
        terms = [(idx["h", r, m.id, l], 1.0) for m in req.models for l in m.aro_ids]
        cons.append(constraint("h2", (r,), terms, ">=", 1.0))
    for r, req in enumerate(inst.requests):
        for m in req.models:
            for l in m.aro_ids:
                h = idx["h", r, m.id, l]
                terms = [(idx["p", m.id, j], 1.0) for j in J] + [(h, -1.0)]
                cons.append(constraint("h3", (r, m.id, l), terms, ">=", 0.0))
    for r, req in enumerate(inst.requests):
        for m in req.models:
            for l in m.aro_ids:
                h = idx["h", r, m.id, l]
                terms = [(idx["beta", r, m.id, l, j], 1.0) for j in J] + [(h, -1.0)]
                cons.append(constraint("h4", (r, m.id, l), terms, ">=", 0.0))
    return cons


def build_cache_capacity_and_hit(inst: Instance, idx: VariableIndex) -> list[Constraint]:
    cons = []
    U = big_m(inst)
    # capacity rows are written in MB to keep the matrix well scaled
    for e in inst.ecs:
        j = e.node
        terms = [
            (idx["beta", r, m.id, l, j], size / MB)
            for r, req in enumerate(inst.requests)
            for m in req.models
            for l, size in m.aros
        ]
        cons.append(constraint("h5", (j,), terms, "<=", e.cache_bytes / MB))
    for r, req in enumerate(inst.requests):
        for j in inst.ec_nodes:
            q = idx["q", r, j]
            # sum_l beta + eps <= |L_rs| + U (1 - q): a fully cached model rules out a miss
            for m in req.models:
                terms = [(idx["beta", r, m.id, l, j], 1.0) for l in m.aro_ids] + [(q, U)]
                cons.append(constraint("h6", (r, m.id, j), terms, "<=", len(m.aros) + U - EPSILON))
            # a hit needs some model whose targets are all at j
            terms = [(idx["z", r, j], 1.0)] + [(idx["w", r, m.id, j], -1.0) for m in req.models]
            cons.append(constraint("hit", (r, j), terms, "<=", 0.0))
            cons.append(constraint("zq", (r, j), [(idx["z", r, j], 1.0), (q, 1.0)], "==", 1.0))
    return cons


def _product(cons: list, family: str, label, out: int, a: int, b: int) -> None:
    cons.append(constraint(family, (*label, 0), [(out, 1.0), (a, -1.0)], "<=", 0.0))
    cons.append(constraint(family, (*label, 1), [(out, 1.0), (b, -1.0)], "<=", 0.0))
    cons.append(constraint(family, (*label, 2), [(out, 1.0), (a, -1.0), (b, -1.0)], ">=", -1.0))


def build_linearization_constraints(inst: Instance, idx: VariableIndex) -> list[Constraint]:
    cons: list[Constraint] = []
    J = inst.ec_nodes
    G = range(len(inst.rate_table))
    for r, req in enumerate(inst.requests):
        for m in req.models:
            s = m.id
            for j in J:
                _product(cons, "alpha", (r, s, j), idx["alpha", r, s, j], idx["p", s, j], idx["y", r, j])
            for l in m.aro_ids:
                for j in J:
                    _product(cons, "beta", (r, s, l, j), idx["beta", r, s, l, j], idx["p", s, j], idx["h", r, s, l])
            for l in m.aro_ids:
                for j in J:
                    _product(
                        cons, "lambda", (r, s, l, j),
                        idx["lambda", r, s, l, j], idx["alpha", r, s, j], idx["beta", r, s, l, j],
                    )
            for g in G:
                _product(cons, "phi", (r, s, g), idx["phi", r, s, g], idx["e", r, g], idx["c", s])
            # exactly one rate carries the frames of a cached model
            terms = [(idx["phi", r, s, g], 1.0) for g in G] + [(idx["c", s], -1.0)]
            cons.append(constraint("phi_sum", (r, s), terms, "==", 0.0))
            for j in J:
                w = idx["w", r, s, j]
                betas = [idx["beta", r, s, l, j] for l in m.aro_ids]
                for k, b in enumerate(betas):
                    cons.append(constraint("w", (r, s, j, 0, k), [(w, 1.0), (b, -1.0)], "<=", 0.0))
                terms = [(w, 1.0)] + [(b, -1.0) for b in betas]
                cons.append(constraint("w", (r, s, j, 1), terms, ">=", 1.0 - len(betas)))
        for j in J:
            _product(cons, "psi", (r, j), idx["psi", r, j], idx["z", r, j], idx["y", r, j])
        nodes = inst.compute_nodes(r, idx.terminals)
        for i in nodes:
            for j in J:
                _product(cons, "xi", (r, i, j), idx["xi", r, i, j], idx["x", r, i], idx["y", r, j])
        # the placement pair is one cell of the x-by-y table
        for i in nodes:
            terms = [(idx["xi", r, i, j], 1.0) for j in J] + [(idx["x", r, i], -1.0)]
            cons.append(constraint("xi_row", (r, i), terms, "==", 0.0))
        for j in J:
            terms = [(idx["xi", r, i, j], 1.0) for i in nodes] + [(idx["y", r, j], -1.0)]
            cons.append(constraint("xi_col", (r, j), terms, "==", 0.0))
    cons += build_model_cached_constraints(inst, idx)
    cons += build_hit_at_storage_constraints(inst, idx)
    return cons


def build_model_cached_constraints(inst: Instance, idx: VariableIndex) -> list[Constraint]:
    """``c_s`` is the OR of ``p_sj`` over ECs; any cached ARO of s forces it."""
    cons = []
    J = inst.ec_nodes
    for s in inst.model_ids:
        cs = idx["c", s]
        for j in J:
            cons.append(constraint("c", (s, 0, j), [(cs, 1.0), (idx["p", s, j], -1.0)], ">=", 0.0))
        cons.append(constraint("c", (s, 1), [(cs, 1.0)] + [(idx["p", s, j], -1.0) for j in J], "<=", 0.0))
        for t, req in enumerate(inst.requests):
            if s in req.model_ids:
                for l in req.model(s).aro_ids:
                    cons.append(constraint("c", (s, 2, t, l), [(cs, 1.0), (idx["h", t, s, l], -1.0)], ">=", 0.0))
    return cons


def build_hit_at_storage_constraints(inst: Instance, idx: VariableIndex) -> list[Constraint]:
    """A hit at the storage EC comes through a model whose matching work is then paid.

    Redundant for binary points; it removes relaxed solutions that avoid
    the miss penalty without the matching work of the cached AROs.
    """
    cons: list[Constraint] = []
    for r, req in enumerate(inst.requests):
        for j in inst.ec_nodes:
            y = idx["y", r, j]
            for m in req.models:
                om = idx["omega", r, m.id, j]
                _product(cons, "omega", (r, m.id, j), om, idx["w", r, m.id, j], y)
                cons.append(constraint("omega_alpha", (r, m.id, j), [(idx["alpha", r, m.id, j], 1.0), (om, -1.0)], ">=", 0.0))
                for l in m.aro_ids:
                    terms = [(idx["lambda", r, m.id, l, j], 1.0), (om, -1.0)]
                    cons.append(constraint("omega_lambda", (r, m.id, l, j), terms, ">=", 0.0))
            terms = [(idx["psi", r, j], 1.0)] + [(idx["omega", r, m.id, j], -1.0) for m in req.models]
            cons.append(constraint("omega_psi", (r, j), terms, "<=", 0.0))
    return cons


def build_assignment_constraints(inst: Instance, idx: VariableIndex) -> list[Constraint]:
    cons = []
    R = range(len(inst.requests))
    for e in inst.ecs:
        j = e.node
        terms = [(idx["x", r, j], 1.0) for r in R] + [(idx["y", r, j], 1.0) for r in R]
        cons.append(constraint("vm", (j,), terms, "<=", float(e.vm_count)))
    for r in R:
        terms = [(idx["x", r, i], 1.0) for i in inst.compute_nodes(r, idx.terminals)]
        cons.append(constraint("place_x", (r,), terms, "==", 1.0))
    for r in R:
        cons.append(constraint("place_y", (r,), [(idx["y", r, j], 1.0) for j in inst.ec_nodes], "==", 1.0))
    for r in R:
        terms = [(idx["e", r, g], 1.0) for g in range(len(inst.rate_table))]
        cons.append(constraint("h7", (r,), terms, "==", 1.0))
    return cons


def quality_weights(inst: Instance) -> list[float]:
    """Coefficient of ``e_rg`` in the quality sum, ordered like ``rate_table``."""
    return list(inst.rate_table.ssim)


def max_quality(inst: Instance) -> float:
    top = inst.rate_table.ssim[-1]
    return sum(req.target_aro_count * top for req in inst.requests)


def build_quality_constraint(inst: Instance, idx: VariableIndex, q_bound: float) -> Constraint:
    terms = [
        (idx["e", r, g], req.target_aro_count * c)
        for r, req in enumerate(inst.requests)
        for g, c in enumerate(inst.rate_table.ssim)
    ]
    return constraint("quality", (), terms, ">=", q_bound * max_quality(inst))
