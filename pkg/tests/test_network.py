import itertools
import json
import math

import pytest

from evacplan.generators import grid_instance, random_instance, sample_network
from evacplan.network import (
    Edge,
    EvacuationNetwork,
    InstanceError,
    InvalidInstance,
    Node,
    NodeKind,
    NoRoute,
    Objective,
    dumps_instance,
    id_key,
    load_instance,
    network_from_dict,
    network_to_dict,
    save_instance,
    shortest_route_to_safety,
    validate,
)


def test_sample_network_is_valid():
    assert validate(sample_network()) == []


def test_demand_on_transit_reported():
    net = sample_network()
    nodes = tuple(Node(n.id, n.kind, 1) if n.id == "2" else n for n in net.nodes)
    problems = validate(EvacuationNetwork(nodes, net.edges, net.horizon))
    assert problems == ["demand on non-source node 2"]


def test_short_horizon_reported_per_source():
    problems = validate(sample_network().with_horizon(1))
    assert "source 0 cannot reach any safe node within horizon" in problems
    assert "source 1 cannot reach any safe node within horizon" in problems


def test_structural_violations():
    nodes = (
        Node("s", NodeKind.SOURCE, 2),
        Node("x", NodeKind.SAFE),
        Node("y", NodeKind.SAFE),
        Node("lonely", NodeKind.SOURCE, 1),
    )
    edges = (
        Edge("s", "x", 0, 1),
        Edge("s", "s", 1, 1),
        Edge("x", "y", 1, -1),
        Edge("s", "x", 1, 1),
    )
    problems = validate(EvacuationNetwork(nodes, edges, 3))
    text = "\n".join(problems)
    assert "travel_time < 1" in text
    assert "self-loop" in text
    assert "negative capacity" in text
    assert "safe node x has outgoing" in text
    assert "duplicate edge (s,x)" in text
    assert "source lonely has no outgoing edge" in text


def test_validate_is_pure_and_idempotent():
    net = random_instance(4)
    before = network_to_dict(net)
    assert validate(net) == validate(net)
    assert network_to_dict(net) == before


def test_outlier_fraction_range():
    net = sample_network(Objective.outlier(1.5))
    assert "outlier fraction must lie in (0, 1]" in validate(net)


def test_round_trip(tmp_path):
    net = sample_network().with_deadline("2", "A", 1)
    path = tmp_path / "net.json"
    save_instance(net, path)
    again = load_instance(path)
    assert again == net
    assert again.edge_map[("2", "A")].deadline == 1


@pytest.mark.parametrize("seed", range(25))
def test_round_trip_bytes_on_corpus(tmp_path, seed):
    net = random_instance(seed, objective=Objective.outlier(0.8) if seed % 2 else None)
    text = dumps_instance(net)
    path = tmp_path / "i.json"
    path.write_text(text)
    assert dumps_instance(load_instance(path)) == text


def test_unknown_kind_names_field():
    data = network_to_dict(sample_network())
    data["nodes"][2]["kind"] = "harbor"
    with pytest.raises(InstanceError, match=r"nodes\[2\]\.kind.*harbor"):
        network_from_dict(data)


def test_unknown_keys_rejected():
    data = network_to_dict(sample_network())
    data["edges"][0]["speed"] = 3
    with pytest.raises(InstanceError, match="speed"):
        network_from_dict(data)
    data = network_to_dict(sample_network())
    data["extra"] = 1
    with pytest.raises(InstanceError, match="extra"):
        network_from_dict(data)


def test_syntax_error_has_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"nodes": [\n  {"id": "a",, }\n]}')
    with pytest.raises(InstanceError, match="line 2"):
        load_instance(path)


def test_validation_errors_distinct_from_syntax(tmp_path):
    path = tmp_path / "short.json"
    path.write_text(dumps_instance(sample_network().with_horizon(1)))
    with pytest.raises(InvalidInstance) as info:
        load_instance(path)
    assert not isinstance(info.value, InstanceError)
    assert len(info.value.violations) == 2
    assert load_instance(path, check=False).horizon == 1


def test_outlier_objective_round_trip():
    net = sample_network(Objective.outlier(0.5))
    data = json.loads(dumps_instance(net))
    assert data["objective"] == {"type": "outlier", "fraction": 0.5}
    assert network_from_dict(data).objective == Objective.outlier(0.5)


def test_id_key_orders_numbers_numerically():
    assert sorted(["10", "2", "A", "1"], key=id_key) == ["1", "2", "10", "A"]


def test_shortest_route_sample():
    assert shortest_route_to_safety(sample_network(), "0") == ["0", "2", "A"]


def test_shortest_route_adjacent_safe():
    nodes = (Node("s", NodeKind.SOURCE, 1), Node("m", NodeKind.TRANSIT), Node("x", NodeKind.SAFE))
    edges = (Edge("s", "x", 3, 1), Edge("s", "m", 1, 1), Edge("m", "x", 1, 1))
    net = EvacuationNetwork(nodes, edges, 5)
    # travel time decides first
    assert shortest_route_to_safety(net, "s") == ["s", "m", "x"]
    edges = (Edge("s", "x", 2, 1), Edge("s", "m", 1, 1), Edge("m", "x", 1, 1))
    # equal time: fewer edges wins
    assert shortest_route_to_safety(EvacuationNetwork(nodes, edges, 5), "s") == ["s", "x"]


def test_shortest_route_no_route():
    nodes = (Node("s", NodeKind.SOURCE, 1), Node("m", NodeKind.TRANSIT), Node("x", NodeKind.SAFE))
    net = EvacuationNetwork(nodes, (Edge("s", "m", 1, 1),), 5)
    with pytest.raises(NoRoute):
        shortest_route_to_safety(net, "s")


def _all_simple_paths(net, source):
    out = []

    def rec(path):
        u = path[-1]
        if net.kind(u) is NodeKind.SAFE:
            out.append(list(path))
            return
        for e in net.out_edges.get(u, ()):
            if e.head not in path:
                rec(path + [e.head])

    rec([source])
    return out


def _path_key(net, path):
    return (net.path_length(path), len(path) - 1, tuple(id_key(v) for v in path))


@pytest.mark.parametrize("seed", range(6))
def test_shortest_route_tie_break_on_grid(seed):
    net = grid_instance(4, 4, 3, seed, horizon=30)
    for s in net.sources:
        paths = [p for p in _all_simple_paths(net, s) if net.path_length(p) <= net.horizon]
        expected = min(paths, key=lambda p: _path_key(net, p))
        assert shortest_route_to_safety(net, s) == expected


def _bellman_ford(net, source):
    dist = {n.id: math.inf for n in net.nodes}
    dist[source] = 0
    for _ in range(len(net.nodes)):
        for e in net.edges:
            if dist[e.tail] + e.travel_time < dist[e.head]:
                dist[e.head] = dist[e.tail] + e.travel_time
    return min(dist[s] for s in net.safe_nodes)


@pytest.mark.parametrize("seed", range(60))
def test_shortest_route_matches_label_correcting(seed):
    net = random_instance(seed, max_horizon=30).with_horizon(100)
    for s in net.sources:
        path = shortest_route_to_safety(net, s)
        assert net.path_length(path) == _bellman_ford(net, s)
        assert len(set(path)) == len(path)


def test_two_equidistant_safe_nodes():
    nodes = (
        Node("s", NodeKind.SOURCE, 1),
        Node("b", NodeKind.SAFE),
        Node("a", NodeKind.SAFE),
    )
    edges = (Edge("s", "b", 1, 1), Edge("s", "a", 1, 1))
    net = EvacuationNetwork(nodes, edges, 2)
    assert shortest_route_to_safety(net, "s") == ["s", "a"]


def test_shortest_route_respects_fixed_successor():
    nodes = (
        Node("s", NodeKind.SOURCE, 1),
        Node("m", NodeKind.TRANSIT),
        Node("x", NodeKind.SAFE),
        Node("y", NodeKind.SAFE),
    )
    edges = (Edge("s", "m", 1, 1), Edge("m", "x", 1, 1), Edge("m", "y", 3, 1))
    net = EvacuationNetwork(nodes, edges, 6)
    assert shortest_route_to_safety(net, "s") == ["s", "m", "x"]
    assert shortest_route_to_safety(net, "s", fixed_successor={"m": "y"}) == ["s", "m", "y"]


def test_network_is_hashable_and_immutable():
    net = sample_network()
    with pytest.raises(Exception):
        net.horizon = 9  # type: ignore[misc]
    assert list(itertools.islice(net.sources, 2)) == ["0", "1"]
