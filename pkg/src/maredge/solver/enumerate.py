"""Exhaustive search over binary points of a 0-1 program.

Subtrees are cut only when bound propagation proves they contain no
feasible point, never on objective value, so the search visits every
feasible assignment in lexicographic order of the variable index.
"""

from __future__ import annotations

import math
import time
from typing import Iterator

import numpy as np

from ..ilp.program import LinearProgram
from .types import Solution

# dense brute force over all 2^n points is used up to this size
BRUTE_FORCE_MAX = 20
# propagation search is allowed well past the brute-force size
ENUMERATION_CAP = 160
TOL = 1e-9


class EnumerationCapError(ValueError):
    pass


class _Rows:
    """Row-wise activity ranges under partial fixing, with an undo trail."""

    def __init__(self, lp: LinearProgram) -> None:
        n = lp.n
        self.lo, self.hi, self.coefs = [], [], []
        self.cols: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for con in lp.constraints:
            k = len(self.lo)
            lo = con.rhs if con.sense in (">=", "==") else -math.inf
            hi = con.rhs if con.sense in ("<=", "==") else math.inf
            slack = TOL * max(1.0, abs(con.rhs))
            self.lo.append(lo - slack)
            self.hi.append(hi + slack)
            self.coefs.append(con.coeffs)
            for i, c in con.coeffs:
                self.cols[i].append((k, c))
        self.min_act = [sum(min(c, 0.0) for _, c in co) for co in self.coefs]
        self.max_act = [sum(max(c, 0.0) for _, c in co) for co in self.coefs]
        self.value = [-1] * n
        self.trail: list[int] = []

    def infeasible_row(self, k: int) -> bool:
        return self.min_act[k] > self.hi[k] or self.max_act[k] < self.lo[k]

    def fix(self, i: int, v: int) -> bool:
        self.value[i] = v
        self.trail.append(i)
        ok = True
        for k, c in self.cols[i]:
            self.min_act[k] += c * v - min(c, 0.0)
            self.max_act[k] += c * v - max(c, 0.0)
            if self.infeasible_row(k):
                ok = False
        return ok

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            i = self.trail.pop()
            v = self.value[i]
            for k, c in self.cols[i]:
                self.min_act[k] -= c * v - min(c, 0.0)
                self.max_act[k] -= c * v - max(c, 0.0)
            self.value[i] = -1

    def propagate(self, start: int) -> bool:
        """Fix every free variable forced by a row touched since ``start`` on the trail."""
        pos = start
        while pos < len(self.trail):
            i = self.trail[pos]
            pos += 1
            for k, _ in self.cols[i]:
                for j, c in self.coefs[k]:
                    if self.value[j] != -1:
                        continue
                    forced = -1
                    if c > 0:
                        if self.min_act[k] + c > self.hi[k]:
                            forced = 0
                        elif self.max_act[k] - c < self.lo[k]:
                            forced = 1
                    else:
                        if self.min_act[k] - c > self.hi[k]:
                            forced = 1
                        elif self.max_act[k] + c < self.lo[k]:
                            forced = 0
                    if forced >= 0 and not self.fix(j, forced):
                        return False
        return True

    def initial(self) -> bool:
        if any(self.infeasible_row(k) for k in range(len(self.lo))):
            return False
        # rows whose bounds force variables before any branching
        for k, co in enumerate(self.coefs):
            for j, c in co:
                if self.value[j] != -1:
                    continue
                if c > 0 and self.min_act[k] + c > self.hi[k] or c < 0 and self.max_act[k] + c < self.lo[k]:
                    if not self.fix(j, 0):
                        return False
                elif c > 0 and self.max_act[k] - c < self.lo[k] or c < 0 and self.min_act[k] - c > self.hi[k]:
                    if not self.fix(j, 1):
                        return False
        return self.propagate(0)


def feasible_points(lp: LinearProgram) -> Iterator[np.ndarray]:
    """Yield every feasible binary assignment, in lexicographic order."""
    n = lp.n
    if n <= BRUTE_FORCE_MAX:
        yield from _brute_force(lp)
        return
    rows = _Rows(lp)
    if not rows.initial():
        return
    exact = _exact_check(lp)

    def dfs(start: int):
        k = start
        while k < n and rows.value[k] != -1:
            k += 1
        if k == n:
            x = np.array(rows.value, dtype=np.int8)
            # incremental activities drift; recheck every row from scratch
            if exact(x):
                yield x
            return
        for v in (0, 1):
            mark = len(rows.trail)
            if rows.fix(k, v) and rows.propagate(mark):
                yield from dfs(k + 1)
            rows.undo(mark)

    yield from dfs(0)


def _exact_check(lp: LinearProgram):
    _, A_ub, b_ub, A_eq, b_eq = lp.matrices()
    lim_ub = b_ub + TOL * np.maximum(1.0, np.abs(b_ub))
    tol_eq = TOL * np.maximum(1.0, np.abs(b_eq))

    def check(x: np.ndarray) -> bool:
        xf = x.astype(float)
        return bool(np.all(A_ub @ xf <= lim_ub) and np.all(np.abs(A_eq @ xf - b_eq) <= tol_eq))

    return check


def _brute_force(lp: LinearProgram) -> Iterator[np.ndarray]:
    n = lp.n
    if n == 0:
        x = np.zeros(0, dtype=np.int8)
        if not lp.violations(x):
            yield x
        return
    c, A_ub, b_ub, A_eq, b_eq = lp.matrices()
    A_ub, A_eq = A_ub.toarray(), A_eq.toarray()
    tol_ub = TOL * np.maximum(1.0, np.abs(b_ub))
    tol_eq = TOL * np.maximum(1.0, np.abs(b_eq))
    chunk = 1 << min(n, 16)
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        # most significant bit is variable 0 so numeric order is lexicographic
        X = ((codes[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.int8)
        ok = np.ones(len(X), dtype=bool)
        if len(b_ub):
            ok &= np.all(X @ A_ub.T <= b_ub + tol_ub, axis=1)
        if len(b_eq):
            ok &= np.all(np.abs(X @ A_eq.T - b_eq) <= tol_eq, axis=1)
        yield from X[ok]


def enumerate_optimal(lp: LinearProgram, cap: int = ENUMERATION_CAP) -> Solution:
    """True optimum by exhaustive search; ties go to the lexicographically smallest point."""
    if lp.n > cap:
        raise EnumerationCapError(f"{lp.n} variables exceed the enumeration cap of {cap}")
    t0 = time.perf_counter()
    best, best_val, count = None, math.inf, 0
    for x in feasible_points(lp):
        count += 1
        val = lp.evaluate(x)
        # points arrive in lexicographic order, so only a strict improvement replaces
        if best is None or val < best_val - 1e-12 * max(1.0, abs(best_val)):
            best, best_val = x.copy(), val
    wall = time.perf_counter() - t0
    if best is None:
        return Solution(np.zeros(lp.n, dtype=np.int8), math.inf, "Infeasible", count, wall)
    return Solution(best, best_val, "Optimal", count, wall, root_bound=best_val, incumbents=[best_val])
