"""Sparse 0-1 linear program container."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

SENSES = ("<=", "==", ">=")


@dataclass(frozen=True)
class Constraint:
    family: str
    label: tuple[int, ...]
    coeffs: tuple[tuple[int, float], ...]
    sense: str
    rhs: float

    @property
    def name(self) -> str:
        return ".".join([self.family, *map(str, self.label)])

    def activity(self, x: Sequence[float]) -> float:
        return sum(c * x[i] for i, c in self.coeffs)

    def satisfied(self, x: Sequence[float], tol: float = 1e-9) -> bool:
        lhs = self.activity(x)
        slack = tol * max(1.0, abs(self.rhs))
        if self.sense == "<=":
            return lhs <= self.rhs + slack
        if self.sense == ">=":
            return lhs >= self.rhs - slack
        return abs(lhs - self.rhs) <= slack


def constraint(family: str, label: Iterable[int], terms, sense: str, rhs: float) -> Constraint:
    """Merge duplicate indices and drop zero coefficients."""
    if sense not in SENSES:
        raise ValueError(f"bad comparator {sense!r}")
    merged: dict[int, float] = {}
    for i, c in terms:
        merged[i] = merged.get(i, 0.0) + float(c)
    coeffs = tuple((i, c) for i, c in sorted(merged.items()) if c != 0.0)
    return Constraint(family, tuple(int(v) for v in label), coeffs, sense, float(rhs))


@dataclass
class LinearExpr:
    coeffs: dict[int, float] = field(default_factory=dict)
    constant: float = 0.0

    def add(self, i: int, c: float) -> None:
        if c:
            self.coeffs[i] = self.coeffs.get(i, 0.0) + c

    def value(self, x: Sequence[float]) -> float:
        return math.fsum([self.constant, *(c * x[i] for i, c in self.coeffs.items())])

    def dense(self, n: int) -> np.ndarray:
        v = np.zeros(n)
        for i, c in self.coeffs.items():
            v[i] = c
        return v


@dataclass
class LinearProgram:
    """``min objective @ x + objective_offset`` over binary ``x`` subject to ``constraints``."""

    names: tuple[str, ...]
    constraints: list[Constraint]
    objective: dict[int, float]
    objective_offset: float = 0.0
    sense: str = "min"
    # metadata kept by the builder; not part of the exported program
    index: object | None = field(default=None, compare=False, repr=False)
    parts: dict = field(default_factory=dict, compare=False, repr=False)
    info: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        n = len(self.names)
        for con in self.constraints:
            for i, _ in con.coeffs:
                if not 0 <= i < n:
                    raise ValueError(f"constraint {con.name} references unknown variable {i}")
        for i in self.objective:
            if not 0 <= i < n:
                raise ValueError(f"objective references unknown variable {i}")

    @property
    def n(self) -> int:
        return len(self.names)

    def c(self) -> np.ndarray:
        v = np.zeros(self.n)
        for i, coef in self.objective.items():
            v[i] = coef
        return v

    def evaluate(self, x: Sequence[float]) -> float:
        # correctly rounded, so tied assignments whose costs are permutations score identically
        return math.fsum([self.objective_offset, *(c * x[i] for i, c in self.objective.items())])

    def violations(self, x: Sequence[float], tol: float = 1e-9) -> list[Constraint]:
        return [con for con in self.constraints if not con.satisfied(x, tol)]

    def is_feasible(self, x: Sequence[float], tol: float = 1e-9) -> bool:
        return all(v in (0, 1) for v in np.asarray(x).tolist()) and not self.violations(x, tol)

    def matrices(self):
        """Return ``(c, A_ub, b_ub, A_eq, b_eq)`` with ``>=`` rows negated into ``<=``."""
        ub_r, ub_c, ub_v, b_ub = [], [], [], []
        eq_r, eq_c, eq_v, b_eq = [], [], [], []
        for con in self.constraints:
            if con.sense == "==":
                k = len(b_eq)
                for i, c in con.coeffs:
                    eq_r.append(k), eq_c.append(i), eq_v.append(c)
                b_eq.append(con.rhs)
            else:
                k = len(b_ub)
                sign = 1.0 if con.sense == "<=" else -1.0
                for i, c in con.coeffs:
                    ub_r.append(k), ub_c.append(i), ub_v.append(sign * c)
                b_ub.append(sign * con.rhs)
        n = self.n
        A_ub = sp.csr_matrix((ub_v, (ub_r, ub_c)), shape=(len(b_ub), n))
        A_eq = sp.csr_matrix((eq_v, (eq_r, eq_c)), shape=(len(b_eq), n))
        return self.c(), A_ub, np.array(b_ub, dtype=float), A_eq, np.array(b_eq, dtype=float)

    def structurally_equal(self, other: "LinearProgram") -> bool:
        key = lambda con: (con.name, con.coeffs, con.sense, con.rhs)
        return (
            self.names == other.names
            and sorted(map(key, self.constraints)) == sorted(map(key, other.constraints))
            and {i: c for i, c in self.objective.items() if c} == {i: c for i, c in other.objective.items() if c}
            and self.objective_offset == other.objective_offset
            and self.sense == other.sense
        )
