import json
import warnings

import networkx as nx
import pytest

from evacplan.exact import solve
from evacplan.hardness import (
    FIXTURES,
    FixtureError,
    GridNdpInstance,
    NotASubgrid,
    TwoPathInstance,
    build_grid_gadget,
    build_two_path_gadget,
    grid_metadata,
    grid_node_name,
    is_normalized,
    load_fixture,
    measure_gap,
    normalize,
    swap_terminals,
    two_path_metadata,
)
from evacplan.network import NodeKind, validate
from evacplan.schedule import RouteSet, schedule_fixed_routes
from evacplan.teg import build

pytestmark = pytest.mark.filterwarnings("ignore:horizon .* clipped")


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixtures_load(name):
    inst = load_fixture(name)
    assert inst.known_yes == (name in ("yes1", "grid_yes1", "grid_tiny"))


@pytest.mark.parametrize("M", [1, 2, 5])
def test_two_path_demands_and_capacities(M):
    net = build_two_path_gadget(load_fixture("yes1"), M)
    demands = sorted(n.demand for n in net.nodes if n.kind is NodeKind.SOURCE)
    assert demands == [M, 2 * M]
    assert validate(net) == []
    caps = {e.key: e.capacity for e in net.edges}
    assert caps[("s1", "x1")] == 1 and caps[("s2", "x2")] == 2
    assert caps[("y1", "t")] == 1 and caps[("y2", "t")] == 2
    assert all(e.travel_time == 1 for e in net.edges)


def test_two_path_horizon_and_clip():
    inst = load_fixture("yes1")
    assert build_two_path_gadget(inst, 2, max_horizon=None).horizon == 4 * len(inst.nodes)
    with pytest.warns(UserWarning, match="clipped"):
        net = build_two_path_gadget(inst, 8, max_horizon=30)
    assert net.horizon == 30
    meta = two_path_metadata(inst, 8, max_horizon=30)
    assert meta["horizon_clipped"] and meta["horizon_requested"] == 64 * len(inst.nodes)


def test_no_fixture_has_a_narrow_cut():
    inst = load_fixture("no1")
    g = nx.DiGraph()
    for u, v, label in inst.edges:
        g.add_edge(u, v, capacity=label)
    for x in inst.sources:
        g.add_edge("S", x, capacity=10)
    for y in inst.sinks:
        g.add_edge(y, "T", capacity=10)
    assert nx.maximum_flow_value(g, "S", "T") <= 2


def test_bad_certificate_rejected():
    with pytest.raises(FixtureError):
        TwoPathInstance(("x1", "x2", "y1", "y2"), (("x1", "y1", 1), ("x2", "y2", 1)), True, (("x1", "y1"), ("x2", "y2")))
    with pytest.raises(FixtureError):
        TwoPathInstance(("x1", "x2", "y1", "y2"), (("x1", "y1", 3),), False)


def test_yes_certificate_routes_are_schedulable():
    inst = load_fixture("yes1")
    net = build_two_path_gadget(inst, 2)
    succ = {"s1": "x1", "s2": "x2", "y1": "t", "y2": "t"}
    for path in inst.certificate:
        succ.update(zip(path, path[1:]))
    _, value = schedule_fixed_routes(build(net), RouteSet(succ))
    assert solve(build(net)).best_value.total <= value.total


def test_identical_instances_have_ratio_one():
    net = build_two_path_gadget(load_fixture("yes1"), 2)
    assert measure_gap(net, net).ratio == 1


def test_two_path_gap_grows_with_m():
    yes, no = load_fixture("yes1"), load_fixture("no1")
    ratios = [measure_gap(build_two_path_gadget(yes, M), build_two_path_gadget(no, M)).ratio for M in (1, 2, 4)]
    assert ratios[0] > 1
    assert ratios == sorted(ratios)
    assert ratios[-1] < 1.5


def test_grid_gadget_demands():
    for name in ("grid_yes1", "grid_no1"):
        inst = load_fixture(name)
        for M in (1, 3):
            net = build_grid_gadget(inst, M)
            k = inst.k
            assert net.total_demand == M * k * (k + 1) // 2
            safe = [n.id for n in net.nodes if n.kind is NodeKind.SAFE]
            assert len(safe) == k
            assert all(not net.out_edges.get(s) for s in safe)


def test_grid_gadget_terminal_capacities():
    inst = normalize(swap_terminals(load_fixture("grid_yes1")))
    net = build_grid_gadget(inst, 1)
    for i, (s, t) in enumerate(inst.pairs, start=1):
        (e,) = net.out_edges[grid_node_name(s)]
        assert e.capacity == i
    inner = [e for e in net.edges if net.kind(e.tail) is NodeKind.TRANSIT and net.kind(e.head) is NodeKind.TRANSIT]
    assert all(e.capacity == inst.k for e in inner)


def test_grid_gap_exceeds_one():
    yes, no = load_fixture("grid_yes1"), load_fixture("grid_no1")
    gap = measure_gap(build_grid_gadget(yes, 2), build_grid_gadget(no, 2))
    assert gap.ratio > 1


def test_normalize_makes_pendant_terminals():
    for name in ("grid_yes1", "grid_no1", "grid_tiny"):
        inst = load_fixture(name)
        norm = normalize(inst)
        assert is_normalized(norm)
        assert normalize(norm) == norm
        if norm.known_yes:
            assert len(norm.certificate) == norm.k


def test_not_a_subgrid():
    with pytest.raises(NotASubgrid):
        GridNdpInstance(3, 3, frozenset({(0, 0), (1, 1)}), frozenset({frozenset({(0, 0), (1, 1)})}), (), False)


def test_grid_metadata():
    meta = grid_metadata(load_fixture("grid_tiny"), 1)
    assert meta["routing_count"] == 2 and meta["k"] == 1


def test_fixture_from_path(tmp_path):
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"kind": "two_path", "known": "maybe"}))
    with pytest.raises(FixtureError, match="known"):
        load_fixture(str(path))


def test_m_must_be_positive():
    with pytest.raises(ValueError):
        build_two_path_gadget(load_fixture("yes1"), 0)
