"""Instance generators: the two-source sample, seeded random instances, grids
and the small scenario fixtures used by the experiments."""

from __future__ import annotations

import random
from typing import Optional

from .network import Edge, EvacuationNetwork, Node, NodeKind, Objective, validate


def sample_network(objective: Optional[Objective] = None) -> EvacuationNetwork:
    """Two unit-demand sources 0 and 1 merging at transit 2 before safe node A.
    Every edge has travel time 1 and capacity 1; horizon 3."""
    nodes = (
        Node("0", NodeKind.SOURCE, 1),
        Node("1", NodeKind.SOURCE, 1),
        Node("2", NodeKind.TRANSIT, 0),
        Node("A", NodeKind.SAFE, 0),
    )
    edges = (Edge("0", "2", 1, 1), Edge("1", "2", 1, 1), Edge("2", "A", 1, 1))
    return EvacuationNetwork(nodes, edges, 3, objective or Objective.average())


def random_instance(
    seed: int,
    max_nodes: int = 8,
    max_sources: int = 3,
    max_horizon: int = 6,
    objective: Optional[Objective] = None,
) -> EvacuationNetwork:
    """Small random instance that passes ``validate``.

    Draws are repeated with the same generator until the instance is valid,
    so the result is a pure function of the arguments.
    """
    rng = random.Random(seed)
    while True:
        n_nodes = rng.randint(min(5, max_nodes), max_nodes)
        n_src = rng.randint(min(2, max_sources), min(max_sources, n_nodes - 2))
        n_safe = rng.randint(1, min(2, n_nodes - n_src - 1))
        n_tr = n_nodes - n_src - n_safe
        srcs = [f"s{i}" for i in range(n_src)]
        trs = [f"t{i}" for i in range(n_tr)]
        safes = [f"x{i}" for i in range(n_safe)]
        nodes = [Node(s, NodeKind.SOURCE, rng.randint(1, 3)) for s in srcs]
        nodes += [Node(t, NodeKind.TRANSIT) for t in trs]
        nodes += [Node(x, NodeKind.SAFE) for x in safes]
        edges: dict[tuple[str, str], Edge] = {}

        def add(u, v):
            if u != v and (u, v) not in edges:
                edges[(u, v)] = Edge(u, v, rng.randint(1, 2), rng.randint(1, 2))

        for s in srcs:
            for _ in range(rng.randint(1, 3)):
                add(s, rng.choice(trs + trs + safes + srcs))
        for t in trs:
            for _ in range(rng.randint(1, 3)):
                add(t, rng.choice(trs + trs + safes))
        horizon = rng.randint(3, max_horizon)
        net = EvacuationNetwork(tuple(nodes), tuple(edges.values()), horizon, objective or Objective.average())
        if not validate(net):
            return net


def grid_instance(
    rows: int,
    cols: int,
    n_sources: int,
    seed: int,
    horizon: Optional[int] = None,
    capacity: int = 2,
) -> EvacuationNetwork:
    """Bidirectional grid with safe nodes on the right-hand column."""
    rng = random.Random(seed)
    cells = [(r, c) for r in range(rows) for c in range(cols)]

    def name(rc):
        return f"r{rc[0]}c{rc[1]}"

    safe = {(r, cols - 1) for r in range(rows)}
    interior = [rc for rc in cells if rc not in safe]
    chosen = set(rng.sample(interior, min(n_sources, len(interior))))
    nodes = []
    for rc in cells:
        if rc in safe:
            nodes.append(Node(name(rc), NodeKind.SAFE))
        elif rc in chosen:
            nodes.append(Node(name(rc), NodeKind.SOURCE, rng.randint(1, 4)))
        else:
            nodes.append(Node(name(rc), NodeKind.TRANSIT))
    edges = []
    for r, c in cells:
        if (r, c) in safe:
            continue
        for dr, dc in ((0, 1), (1, 0), (0, -1), (-1, 0)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < rows and 0 <= cc < cols:
                edges.append(Edge(name((r, c)), name((rr, cc)), rng.randint(1, 2), capacity))
    H = horizon if horizon is not None else 2 * (rows + cols)
    return EvacuationNetwork(tuple(nodes), tuple(edges), H)


def failure_fixture() -> tuple[EvacuationNetwork, tuple[str, str], int]:
    """Two sources near a bridge P->A that fails after t=1.

    S1 sits one step from the bridge head P; S2 reaches P only via R.  Both
    can detour through Q to the second exit B.  Returns (network, bridge edge,
    failure time).
    """
    nodes = (
        Node("S1", NodeKind.SOURCE, 2),
        Node("S2", NodeKind.SOURCE, 4),
        Node("P", NodeKind.TRANSIT),
        Node("R", NodeKind.TRANSIT),
        Node("Q", NodeKind.TRANSIT),
        Node("A", NodeKind.SAFE),
        Node("B", NodeKind.SAFE),
    )
    edges = (
        Edge("S1", "P", 1, 2),
        Edge("S2", "R", 1, 2),
        Edge("R", "P", 1, 2),
        Edge("R", "Q", 2, 2),
        Edge("P", "A", 1, 2),
        Edge("P", "Q", 2, 2),
        Edge("Q", "B", 2, 2),
    )
    return EvacuationNetwork(nodes, edges, 14), ("P", "A"), 1


def congested_fixture(n_sources: int = 10, seed: int = 3) -> EvacuationNetwork:
    """Ten sources on two feeder corridors sharing a narrow exit."""
    rng = random.Random(seed)
    nodes = [Node("J1", NodeKind.TRANSIT), Node("J2", NodeKind.TRANSIT), Node("M", NodeKind.TRANSIT)]
    nodes += [Node("X", NodeKind.SAFE), Node("Y", NodeKind.SAFE)]
    edges = [
        Edge("J1", "M", 1, 3),
        Edge("J2", "M", 1, 3),
        Edge("M", "X", 2, 3),
        Edge("J1", "Y", 4, 1),
        Edge("J2", "Y", 3, 1),
    ]
    for i in range(n_sources):
        s = f"s{i}"
        nodes.append(Node(s, NodeKind.SOURCE, rng.randint(2, 5)))
        edges.append(Edge(s, "J1" if i % 2 == 0 else "J2", rng.randint(1, 3), 2))
    return EvacuationNetwork(tuple(nodes), tuple(edges), 40)
