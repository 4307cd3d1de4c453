"""Depth-first branch-and-bound with a linear relaxation bound."""

from __future__ import annotations

import logging
import math
import time

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from ..ilp.program import LinearProgram
from .types import Solution, SolveOptions

log = logging.getLogger(__name__)

INT_TOL = 1e-6


def _log_stats(sol: Solution, backend: str, n: int, m: int) -> None:
    log.info(
        "solve backend=%s vars=%d rows=%d status=%s objective=%.12g root_bound=%.12g nodes=%d wall_s=%.3f gap=%.3g",
        backend, n, m, sol.status, sol.objective_value, sol.root_bound, sol.node_count, sol.wall_time, sol.gap,
    )


def _cost_scale(c: np.ndarray) -> float:
    """Largest cost magnitude, used to bring objective coefficients above HiGHS' tolerances.

    Normalized objectives can have every coefficient below the 1e-7 dual
    tolerance, which makes HiGHS stop at points that are not optimal.
    """
    top = float(np.abs(c).max()) if c.size else 0.0
    return top if top > 0 else 1.0


class _Relaxation:
    def __init__(self, lp: LinearProgram) -> None:
        c, A_ub, self.b_ub, A_eq, self.b_eq = lp.matrices()
        self.scale = _cost_scale(c)
        self.c = c / self.scale
        self.A_ub = A_ub if A_ub.shape[0] else None
        self.A_eq = A_eq if A_eq.shape[0] else None
        self.offset = lp.objective_offset

    def solve(self, lower: np.ndarray, upper: np.ndarray):
        res = linprog(
            self.c,
            A_ub=self.A_ub,
            b_ub=self.b_ub if self.A_ub is not None else None,
            A_eq=self.A_eq,
            b_eq=self.b_eq if self.A_eq is not None else None,
            bounds=np.column_stack([lower, upper]),
            method="highs",
        )
        if res.status == 2:
            return None, math.inf
        if res.status != 0:
            raise RuntimeError(f"relaxation failed: {res.message}")
        return res.x, res.fun * self.scale + self.offset


def _pick(x: np.ndarray, free: np.ndarray, order: str) -> int:
    frac = np.abs(x - np.round(x))
    cand = np.flatnonzero(free & (frac > INT_TOL))
    if len(cand) == 0:
        return -1
    if order == "index":
        return int(cand[0])
    # most fractional; the lowest index wins ties
    return int(cand[np.argmax(frac[cand])])


def branch_and_bound(lp: LinearProgram, opts: SolveOptions) -> Solution:
    t0 = time.perf_counter()
    n = lp.n
    relax = _Relaxation(lp)
    best_x, best_val = None, math.inf
    history: list[float] = []
    nodes = 0
    status = None

    def accept(x: np.ndarray) -> bool:
        nonlocal best_x, best_val
        val = lp.evaluate(x)
        if lp.is_feasible(x) and val < best_val - 1e-12 * max(1.0, abs(val)):
            best_x, best_val = x.astype(np.int8), val
            history.append(val)
            return True
        return False

    def prune(bound: float) -> bool:
        if not math.isfinite(best_val):
            return False
        tol = max(opts.absolute_gap, opts.relative_gap * abs(best_val))
        return bound >= best_val - tol

    lower, upper = np.zeros(n), np.ones(n)
    x0, root = relax.solve(lower, upper)
    if x0 is not None:
        # rounding the root relaxation is the only primal heuristic
        accept(np.round(x0).astype(np.int8))
    stack = [(lower, upper, x0, root)] if x0 is not None else []
    open_bounds: list[float] = []

    while stack:
        if time.perf_counter() - t0 > opts.time_limit:
            status = "TimedOut"
            break
        if opts.node_limit is not None and nodes >= opts.node_limit:
            status = "BoundReached"
            break
        lo, up, x, bound = stack.pop()
        nodes += 1
        if x is None:
            x, bound = relax.solve(lo, up)
            if x is None:
                continue
        if prune(bound):
            continue
        k = _pick(x, lo != up, opts.branching_order)
        if k < 0:
            accept(np.round(x).astype(np.int8))
            continue
        children = []
        for v in (0, 1):
            clo, cup = lo.copy(), up.copy()
            clo[k] = cup[k] = v
            children.append((clo, cup, None, bound))
        # depth-first: the child nearer the relaxed value is explored first, 0 on a tie
        first = 1 if x[k] > 0.5 else 0
        stack.append(children[1 - first])
        stack.append(children[first])

    open_bounds = [b for _, _, _, b in stack]
    wall = time.perf_counter() - t0
    if status is None:
        status = "Optimal" if best_x is not None else "Infeasible"
    if best_x is None:
        best_x = np.zeros(n, dtype=np.int8)
    best_bound = best_val if status == "Optimal" else min(open_bounds + [best_val], default=root)
    sol = Solution(best_x, best_val, status, nodes, wall, root_bound=root, best_bound=best_bound, incumbents=history)
    _log_stats(sol, "bnb", n, len(lp.constraints))
    return sol


def solve_highs(lp: LinearProgram, opts: SolveOptions) -> Solution:
    """Solve with the HiGHS MILP code bundled in scipy."""
    t0 = time.perf_counter()
    n = lp.n
    c, A_ub, b_ub, A_eq, b_eq = lp.matrices()
    cons = []
    if A_ub.shape[0]:
        cons.append(LinearConstraint(A_ub, -np.inf, b_ub))
    if A_eq.shape[0]:
        cons.append(LinearConstraint(A_eq, b_eq, b_eq))
    options = {"time_limit": opts.time_limit, "mip_rel_gap": opts.relative_gap, "disp": False}
    if opts.node_limit is not None:
        options["node_limit"] = opts.node_limit
    scale = _cost_scale(c)
    res = milp(c / scale, constraints=cons, integrality=np.ones(n), bounds=Bounds(0, 1), options=options)
    wall = time.perf_counter() - t0
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    root = -math.inf
    bound = getattr(res, "mip_dual_bound", None)
    bound = bound * scale + lp.objective_offset if bound is not None and math.isfinite(bound) else -math.inf
    if res.x is None:
        status = "Infeasible" if res.status == 2 else ("TimedOut" if res.status == 1 else "Infeasible")
        sol = Solution(np.zeros(n, dtype=np.int8), math.inf, status, nodes, wall, root, bound)
    else:
        x = np.round(res.x).astype(np.int8)
        val = lp.evaluate(x)
        if res.status == 0:
            status = "Optimal"
        else:
            status = "BoundReached" if opts.node_limit is not None and "node" in res.message.lower() else "TimedOut"
        if not lp.is_feasible(x):
            raise RuntimeError("HiGHS returned a point that violates the program")
        sol = Solution(x, val, status, nodes, wall, root, bound, [val])
    _log_stats(sol, "highs", n, len(lp.constraints))
    return sol


def solve(lp: LinearProgram, opts: SolveOptions | None = None) -> Solution:
    opts = opts or SolveOptions()
    if opts.backend == "highs":
        return solve_highs(lp, opts)
    return branch_and_bound(lp, opts)
