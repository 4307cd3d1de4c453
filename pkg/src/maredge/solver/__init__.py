"""Exact solvers for the 0-1 program."""

from .bnb import branch_and_bound, solve, solve_highs
from .enumerate import ENUMERATION_CAP, EnumerationCapError, enumerate_optimal, feasible_points
from .lpfile import LPFormatError, export_program, parse_program
from .types import BACKENDS, STATUSES, Solution, SolveOptions

__all__ = [
    "BACKENDS", "ENUMERATION_CAP", "EnumerationCapError", "LPFormatError", "STATUSES", "Solution",
    "SolveOptions", "branch_and_bound", "enumerate_optimal", "export_program", "feasible_points",
    "parse_program", "solve", "solve_highs",
]
