from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

STATUSES = ("Optimal", "Infeasible", "BoundReached", "TimedOut")
BRANCHING = ("index", "most-fractional")
BACKENDS = ("bnb", "highs")


@dataclass(frozen=True)
class SolveOptions:
    time_limit: float = 300.0
    absolute_gap: float = 1e-9
    relative_gap: float = 0.0
    branching_order: str = "index"
    node_limit: int | None = None
    backend: str = "bnb"
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if self.absolute_gap < 0 or self.relative_gap < 0:
            raise ValueError("gaps must be non-negative")
        if self.branching_order not in BRANCHING:
            raise ValueError(f"branching order must be one of {BRANCHING}")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")


@dataclass
class Solution:
    assignment: np.ndarray
    objective_value: float
    status: str
    node_count: int
    wall_time: float
    root_bound: float = -math.inf
    best_bound: float = -math.inf
    incumbents: list[float] = field(default_factory=list)

    @property
    def has_incumbent(self) -> bool:
        return math.isfinite(self.objective_value)

    @property
    def gap(self) -> float:
        if not self.has_incumbent or not math.isfinite(self.best_bound):
            return math.inf
        return max(0.0, self.objective_value - self.best_bound) / max(1e-12, abs(self.objective_value))
