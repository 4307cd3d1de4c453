from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maredge.topology import TopologySpec, region_of
from maredge.workload import (
    MB,
    Instance,
    InstanceConfig,
    InstanceError,
    dbm_to_watts,
    dumps_instance,
    foreground_bits,
    generate_instance,
    instance_from_dict,
    instance_to_dict,
    loads_instance,
)


def test_foreground_size_from_frame():
    # 1280 x 720 RGB at 8 bits per pixel, times 5/9 and 1e-3
    assert foreground_bits(1280, 720, 8) == pytest.approx(4096.0)
    with pytest.raises(ValueError):
        foreground_bits(0, 720, 8)


def test_dbm_conversion():
    assert dbm_to_watts(20) == pytest.approx(0.1)
    assert dbm_to_watts(30) == pytest.approx(1.0)


def test_default_instance_shape():
    inst = generate_instance(InstanceConfig(), 0)
    assert len(inst.requests) == 30
    assert inst.ec_nodes == (5, 8, 11, 14, 17, 20)
    for e in inst.ecs:
        assert e.vm_count == 14
        assert 4e9 <= e.vm_cpu_hz <= 8e9
        assert 100 * MB <= e.cache_bytes <= 400 * MB
        assert e.cpu_hz == e.vm_cpu_hz * 0.5
    for r in inst.requests:
        assert 1 <= len(r.models) <= 4
        assert 0.30 <= r.terminal_portion <= 0.50
        assert r.foreground_bits == pytest.approx(4096.0)
        assert r.mobility.total == pytest.approx(1.0)
        assert inst.topology.wired_anchor(r.terminal) == r.origin
        for m in r.models:
            assert 0.5e6 <= m.background_bits <= 2e6
            assert m.result_bits == r.foreground_bits
            assert all(0 < o <= 10 * MB for _, o in m.aros)


def test_generation_is_seeded():
    cfg = InstanceConfig(requests=8)
    assert dumps_instance(generate_instance(cfg, 4)) == dumps_instance(generate_instance(cfg, 4))
    assert dumps_instance(generate_instance(cfg, 4)) != dumps_instance(generate_instance(cfg, 5))


@settings(max_examples=25, deadline=None)
@given(
    st.integers(1, 12),
    st.integers(0, 2**31),
    st.floats(0, 1),
    st.tuples(st.integers(1, 4), st.integers(1, 4)).map(sorted),
    st.booleans(),
)
def test_serialization_round_trip(requests, seed, mobility, models, shared):
    cfg = InstanceConfig(
        requests=requests, mobility_total=mobility, models_per_request=tuple(models), shared_region_frames=shared
    )
    inst = generate_instance(cfg, seed)
    text = dumps_instance(inst)
    back = loads_instance(text)
    assert dumps_instance(back) == text
    assert instance_to_dict(back) == instance_to_dict(inst)


def test_scales_apply():
    base = generate_instance(InstanceConfig(requests=3), 1)
    big = generate_instance(InstanceConfig(requests=3, foreground_scale=3.0, background_scale=2.0), 1)
    for a, b in zip(base.requests, big.requests):
        assert b.foreground_bits == pytest.approx(3 * a.foreground_bits)
        for ma, mb in zip(a.models, b.models):
            assert mb.background_bits == pytest.approx(2 * ma.background_bits)


def test_shared_aro_pool():
    inst = generate_instance(InstanceConfig(requests=10, aro_pool=3), 2)
    ids = [l for r in inst.requests for m in r.models for l in m.aro_ids]
    assert len(set(ids)) < len(ids)


def test_co_region():
    inst = generate_instance(InstanceConfig(requests=10), 3)
    t = inst.topology
    for r, req in enumerate(inst.requests):
        peers = inst.co_region(r)
        assert r in peers
        assert all(region_of(t, inst.requests[p].origin) == region_of(t, req.origin) for p in peers)
    alone = generate_instance(InstanceConfig(requests=10, shared_region_frames=False), 3)
    assert alone.co_region(4) == (4,)


@pytest.mark.parametrize(
    "change",
    [
        dict(requests=0),
        dict(models_per_request=(0, 2)),
        dict(models_per_request=(1, 5)),
        dict(models_total=2, models_per_request=(1, 3)),
        dict(aros_per_model=(0, 1)),
        dict(mobility_total=1.5),
    ],
)
def test_invalid_configs(change):
    with pytest.raises(InstanceError):
        generate_instance(replace(InstanceConfig(), **change), 0)


def test_validation_catches_tampering():
    inst = generate_instance(InstanceConfig(requests=2), 0)
    d = instance_to_dict(inst)
    d["requests"][0]["terminal_portion"] = 0.9
    with pytest.raises(InstanceError):
        instance_from_dict(d)
    d = instance_to_dict(inst)
    d["schema"] = "other"
    with pytest.raises(InstanceError):
        instance_from_dict(d)
    req = replace(inst.requests[0], foreground_bits=0.0)
    with pytest.raises(InstanceError):
        Instance(inst.topology, (req, inst.requests[1]), inst.ecs, inst.rate_table, inst.links)


def test_custom_topology_passes_through():
    cfg = InstanceConfig(requests=2, topology=TopologySpec(branching=(3,), active_ecs=(1, 3)))
    inst = generate_instance(cfg, 0)
    assert inst.ec_nodes == (1, 3)
    assert all(r.origin in (1, 2, 3) for r in inst.requests)
