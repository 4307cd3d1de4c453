from dataclasses import replace

import pytest

from maredge.evaluator import (
    MetricBreakdown,
    Plan,
    PlanError,
    cache_hit,
    check_feasibility,
    evaluate,
    evaluate_energy,
    evaluate_latency,
    evaluate_quality,
    objective_value,
    overloaded_requests,
    transmit_power_ok,
)
from maredge.radio import RadioLink, RateTable
from maredge.topology import MobilityProfile, TopologySpec, build_topology
from maredge.workload import MB, EcProfile, Instance, ModelSpec, Request


def hand_instance(shared=True, second_request=False) -> Instance:
    """Routers 0-2, region servers 3 (under 1) and 4 (under 2), terminals from 5."""
    origins = (1, 1) if second_request else (1,)
    topo = build_topology(TopologySpec(branching=(2,), active_ecs=(1, 2), terminal_routers=origins))
    model = ModelSpec(0, 1e6, 4096.0, ((0, 2 * MB), (1, 1 * MB)))
    reqs = [
        Request(0, 1, 5, 4096.0, 0.0, MobilityProfile(1, ((2, 0.5),)), (model,), 1e9, 0.4, 0.0)
    ]
    if second_request:
        other = ModelSpec(0, 1e6, 4096.0, ((2, 1 * MB),))
        reqs.append(Request(1, 1, 6, 4096.0, 0.0, MobilityProfile(1, ((2, 0.5),)), (other,), 1e9, 0.5, 0.0))
    ecs = (EcProfile(1, 2, 4e9, 10 * MB), EcProfile(2, 2, 6e9, 10 * MB))
    link = RadioLink(1e6, 1e-11, 4.0, 100.0, 1.0)
    return Instance(
        topo, tuple(reqs), ecs, RateTable((2e6, 8e6), (0.955, 0.991)), (link,) * len(reqs),
        shared_region_frames=shared,
    )


def edge_plan(**kw) -> Plan:
    base = dict(
        compute_node=(2,), storage_node=(1,), cached_models=frozenset({(0, 1)}),
        cached_aros=frozenset({(0, 0, 0), (0, 0, 1)}), rate=(8e6,),
    )
    base.update(kw)
    return Plan(**base)


def test_latency_by_hand():
    lat = evaluate_latency(hand_instance(), edge_plan())
    # (1 + 0.5) * (4096 foreground + 4096 result) bits at 8 Mbps
    assert lat.wireless == pytest.approx(1.536)
    # 1->2, 2->1, region server 3 -> origin 1, host 1 -> region server 3; 2 ms per hop
    assert lat.wired == pytest.approx(4 + 4 + 2 + 2)
    # destination 2: server 4 -> 2 (1 hop), host 1 -> server 4 (3 hops), 2 -> compute 2 (0 hops)
    assert lat.mobility == pytest.approx(0.5 * (2 + 6 + 0))
    # 4 cycles/bit on 3 GHz, then 10 cycles/bit over 1 Mbit + 3 MB of AROs on 2 GHz
    assert lat.processing == pytest.approx(4 * 4096 / 3e9 * 1e3 + 10 * 25e6 / 2e9 * 1e3)
    assert lat.penalty == 0.0
    assert lat.total == pytest.approx(1.536 + 12 + 4 + lat.processing)


def test_energy_by_hand():
    en = evaluate_energy(hand_instance(), edge_plan())
    power = (2**8 - 1) * 1e-11 / 100.0**-4
    assert power == pytest.approx(0.255)
    transmit = power * 4096 / 8e6
    compute = 1e-18 * 3e9 * 4 * 4096
    storage = 1e-18 * 2e9 * 10 * 25e6
    assert en.server == pytest.approx(transmit + compute + storage)
    assert en.terminal == 0.0


def test_terminal_compute_by_hand():
    inst = hand_instance()
    plan = edge_plan(compute_node=(5,))
    lat = evaluate_latency(inst, plan)
    assert lat.processing == pytest.approx(4 * 4096 / (1e9 * 0.4) * 1e3 + 125.0)
    assert lat.wired == pytest.approx(0 + 0 + 2 + 2)
    assert lat.mobility == pytest.approx(0.5 * (2 + 6))
    en = evaluate_energy(inst, plan)
    # k0 f^2 times the slowed-down processing time V / portion
    assert en.terminal == pytest.approx(1e-18 * 1e9**2 * (4 * 4096 / 1e9) / 0.4)


def test_half_portion_doubles_terminal_time():
    inst = hand_instance()
    req = replace(inst.requests[0], terminal_portion=0.5)
    inst = replace(inst, requests=(req,))
    en = evaluate_energy(inst, edge_plan(compute_node=(5,)))
    v = 4 * 4096 / 1e9
    assert en.terminal == pytest.approx(1e-18 * 1e9**2 * 2 * v)


def test_miss_and_overload_penalties():
    inst = hand_instance()
    miss = edge_plan(cached_aros=frozenset({(0, 0, 0)}))
    assert not cache_hit(inst, miss, 0, 1)
    assert evaluate_latency(inst, miss).penalty == 25.0
    # model cached somewhere else than the storage node is a miss too
    far = edge_plan(storage_node=(2,))
    assert evaluate_latency(inst, far).penalty == 25.0
    tight = replace(inst, ecs=(EcProfile(1, 1, 4e9, 10 * MB), inst.ecs[1]))
    same = edge_plan(compute_node=(1,))
    assert overloaded_requests(tight, same) == {0}
    assert evaluate_latency(tight, same).penalty == 25.0
    assert [v.family for v in check_feasibility(tight, same)] == ["vm"]


def test_shared_region_frames():
    shared = hand_instance(shared=True, second_request=True)
    alone = hand_instance(shared=False, second_request=True)
    plan = Plan((2, 2), (1, 1), frozenset({(0, 1)}), frozenset({(0, 0, 0), (0, 0, 1), (1, 0, 2)}), (8e6, 8e6))
    extra = evaluate_latency(shared, plan).wireless - evaluate_latency(alone, plan).wireless
    # each request also receives the other's 4096-bit frame
    assert extra == pytest.approx(2 * 1.5 * 4096 / 8e6 * 1e3)


def test_quality_weighted_by_aro_count():
    inst = hand_instance(second_request=True)
    plan = Plan((2, 2), (1, 1), frozenset({(0, 1)}), frozenset({(0, 0, 0), (1, 0, 2)}), (2e6, 8e6))
    q, qn = evaluate_quality(inst, plan)
    assert q == pytest.approx(2 * 0.955 + 0.991)
    assert qn == pytest.approx((2 * 0.955 + 0.991) / (3 * 0.991))
    assert check_feasibility(inst, plan) == []
    slow = replace(plan, rate=(2e6, 2e6))
    assert evaluate_quality(inst, slow)[1] == pytest.approx(0.955 / 0.991)
    assert [v.family for v in check_feasibility(inst, slow)] == ["quality"]
    assert check_feasibility(inst, slow, q_bound=0.9) == []


def test_feasibility_families():
    inst = hand_instance(second_request=True)
    ok = Plan((2, 6), (1, 1), frozenset({(0, 1)}), frozenset({(0, 0, 0), (1, 0, 2)}), (8e6, 8e6))
    assert check_feasibility(inst, ok) == []
    assert [v.family for v in check_feasibility(inst, replace(ok, compute_node=(2, 5)), allow_terminals=True)] == ["place_x"]
    assert "place_x" in [v.family for v in check_feasibility(inst, ok, allow_terminals=False)]
    assert [v.family for v in check_feasibility(inst, replace(ok, storage_node=(1, 0)))] == ["place_y"]
    assert [v.family for v in check_feasibility(inst, replace(ok, rate=(8e6, 3e6)))] == ["h7"]
    assert [v.family for v in check_feasibility(inst, replace(ok, cached_models=frozenset({(0, 0)})))] == ["p"]
    assert [v.family for v in check_feasibility(inst, replace(ok, cached_aros=ok.cached_aros | {(0, 0, 2)}))] == ["h"]
    no_aro = replace(ok, cached_aros=frozenset({(0, 0, 0)}))
    assert [v.family for v in check_feasibility(inst, no_aro)] == ["h2"]
    orphan = replace(ok, cached_models=frozenset())
    assert {v.family for v in check_feasibility(inst, orphan)} == {"h3"}
    small = replace(inst, ecs=(EcProfile(1, 2, 4e9, 1.5 * MB), inst.ecs[1]))
    assert [v.family for v in check_feasibility(small, ok)] == ["h5"]
    assert check_feasibility(inst, replace(ok, rate=(8e6,)))[0].family == "shape"


def test_h1_exclusive_aro():
    inst = hand_instance(second_request=True)
    m0 = inst.requests[0].models[0]
    req1 = replace(inst.requests[1], models=(m0,))
    shared = replace(inst, requests=(inst.requests[0], req1))
    plan = Plan((2, 2), (1, 1), frozenset({(0, 1)}), frozenset({(0, 0, 0), (1, 0, 0)}), (8e6, 8e6))
    assert "h1" in [v.family for v in check_feasibility(shared, plan)]


def test_incomplete_plan_rejected():
    with pytest.raises(PlanError):
        evaluate(hand_instance(), edge_plan(rate=(None,)))
    with pytest.raises(PlanError):
        evaluate(hand_instance(), edge_plan(compute_node=()))


def test_breakdown_and_plan_serialization():
    inst = hand_instance()
    plan = edge_plan()
    m = evaluate(inst, plan)
    assert isinstance(m, MetricBreakdown)
    assert m.total_latency == pytest.approx(
        m.wireless_delay + m.wired_delay + m.processing_delay + m.penalty_delay + m.mobility_delay
    )
    assert m.total_energy == pytest.approx(m.server_energy + m.terminal_energy)
    header, row = MetricBreakdown.csv_header().split(","), m.csv_row().split(",")
    assert len(header) == len(row) == 11
    assert header[0] == "wireless_delay" and header[-1] == "quality_norm"
    assert float(row[5]) == m.total_latency
    assert Plan.from_dict(plan.to_dict()) == plan


def test_objective_and_power_flag():
    inst = hand_instance()
    m = evaluate(inst, edge_plan())
    assert objective_value(inst, edge_plan(), 1.0, 200.0, 1.0) == pytest.approx(m.total_latency / 200.0)
    assert objective_value(inst, edge_plan(), 0.0, 200.0, 2.0) == pytest.approx(m.total_energy / 2.0)
    assert transmit_power_ok(0.255)
    assert not transmit_power_ok(1.5)
    assert not transmit_power_ok(float("inf"))
