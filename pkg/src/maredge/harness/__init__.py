"""Config-driven experiment runner and command line interface."""

from .config import SCHEMES, SWEEP_AXES, ConfigError, ScenarioConfig, config_from_dict, load_config
from .runner import (
    RESULT_COLUMNS, SchemeResult, SweepResult, aggregate, instance_seed, records_to_csv, rows_to_csv,
    run_scenario, run_sweep, scenario_instance,
)

__all__ = [
    "RESULT_COLUMNS", "SCHEMES", "SWEEP_AXES", "ConfigError", "ScenarioConfig", "SchemeResult", "SweepResult",
    "aggregate", "config_from_dict", "instance_seed", "load_config", "records_to_csv", "rows_to_csv",
    "run_scenario", "run_sweep", "scenario_instance",
]
