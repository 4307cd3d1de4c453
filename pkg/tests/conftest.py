from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from maredge.radio import MBPS, RateTable
from maredge.topology import TopologySpec
from maredge.workload import InstanceConfig, generate_instance

FULL_RATES = RateTable()


def tiny_config(seed: int) -> InstanceConfig:
    """Random tiny scenario: 1-2 requests, 2 ECs, 1 model, 1-2 AROs, 2-3 rates.

    Small VM counts and caches make the capacity rows bind on some draws.
    """
    rng = np.random.default_rng([7, seed])
    n_rates = int(rng.integers(2, 4))
    picks = sorted(rng.choice(len(FULL_RATES), n_rates, replace=False))
    table = RateTable(tuple(FULL_RATES.rates[k] for k in picks), tuple(FULL_RATES.ssim[k] for k in picks))
    return InstanceConfig(
        requests=int(rng.integers(1, 3)),
        topology=TopologySpec(branching=(2,), active_ecs=(1, 2)),
        vm_count=int(rng.integers(1, 4)) + 1,
        ec_cache_mb=(4.0, 20.0),
        models_total=1,
        models_per_request=(1, 1),
        aros_per_model=(1, 2),
        mobility_total=float(rng.choice([0.0, 0.5, 1.0])),
        rate_table=table,
    )


def tiny_instance(seed: int):
    return generate_instance(tiny_config(seed), seed)


@pytest.fixture
def small_config() -> InstanceConfig:
    """Three requests on the default tree; solves in well under a second."""
    return InstanceConfig(requests=3, models_per_request=(1, 2))


@pytest.fixture
def two_ec_config() -> InstanceConfig:
    return InstanceConfig(
        requests=2,
        topology=TopologySpec(branching=(2,), active_ecs=(1, 2)),
        models_total=1,
        models_per_request=(1, 1),
        aros_per_model=(1, 1),
        rate_table=RateTable((2 * MBPS, 8 * MBPS), (0.955, 0.991)),
    )


def with_rates(cfg: InstanceConfig, *mbps: float) -> InstanceConfig:
    table = FULL_RATES
    ssim = tuple(table.ssim[table.index(g * MBPS)] for g in mbps)
    return replace(cfg, rate_table=RateTable(tuple(g * MBPS for g in mbps), ssim))


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, 11):
        if k in ACCEPTANCE:
            ok, detail = ACCEPTANCE[k]
            terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d}: NOT RUN")
