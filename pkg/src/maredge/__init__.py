"""Joint service placement, proactive caching and rate selection for edge-supported AR."""

from .evaluator import MetricBreakdown, Plan, check_feasibility, evaluate
from .workload import Instance, InstanceConfig, generate_instance

__all__ = ["Instance", "InstanceConfig", "MetricBreakdown", "Plan", "check_feasibility", "evaluate", "generate_instance"]
__version__ = "0.1.0"
