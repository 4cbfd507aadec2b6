"""Evacuation network model, validation and JSON instance I/O.

Node ids are strings.  Travel times, capacities, demands and the horizon are
integers measured in abstract timesteps / vehicles.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional

MAX_TOTAL_DEMAND = 2**53


class NodeKind(str, Enum):
    SOURCE = "source"
    TRANSIT = "transit"
    SAFE = "safe"


class ObjectiveKind(str, Enum):
    AVERAGE = "average"
    COMPLETION = "completion"
    OUTLIER = "outlier"


class InstanceError(ValueError):
    """Malformed instance file (syntax or schema)."""


class InvalidInstance(ValueError):
    """Instance parsed but violates network invariants."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


class NoRoute(Exception):
    pass


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    demand: int = 0


@dataclass(frozen=True)
class Edge:
    tail: str
    head: str
    travel_time: int
    capacity: int
    deadline: Optional[int] = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.tail, self.head)

    def admits_entry(self, t: int) -> bool:
        return self.deadline is None or t <= self.deadline


@dataclass(frozen=True)
class Objective:
    kind: ObjectiveKind = ObjectiveKind.AVERAGE
    fraction: Optional[float] = None

    @classmethod
    def average(cls) -> "Objective":
        return cls(ObjectiveKind.AVERAGE)

    @classmethod
    def completion(cls) -> "Objective":
        return cls(ObjectiveKind.COMPLETION)

    @classmethod
    def outlier(cls, fraction: float) -> "Objective":
        return cls(ObjectiveKind.OUTLIER, float(fraction))


def id_key(node_id: str):
    """Sort key: numeric ids numerically, then everything else as text."""
    if node_id.isdigit():
        return (0, int(node_id), "")
    return (1, 0, node_id)


@dataclass(frozen=True)
class EvacuationNetwork:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    horizon: int
    objective: Objective = field(default_factory=Objective.average)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    @cached_property
    def node_map(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def edge_map(self) -> dict[tuple[str, str], Edge]:
        return {e.key: e for e in self.edges}

    @cached_property
    def out_edges(self) -> dict[str, list[Edge]]:
        out: dict[str, list[Edge]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            out.setdefault(e.tail, []).append(e)
        for lst in out.values():
            lst.sort(key=lambda e: id_key(e.head))
        return out

    @cached_property
    def in_edges(self) -> dict[str, list[Edge]]:
        inc: dict[str, list[Edge]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            inc.setdefault(e.head, []).append(e)
        return inc

    @cached_property
    def sources(self) -> list[str]:
        return sorted((n.id for n in self.nodes if n.kind is NodeKind.SOURCE), key=id_key)

    @cached_property
    def safe_nodes(self) -> list[str]:
        return sorted((n.id for n in self.nodes if n.kind is NodeKind.SAFE), key=id_key)

    @cached_property
    def transit_nodes(self) -> list[str]:
        return sorted((n.id for n in self.nodes if n.kind is NodeKind.TRANSIT), key=id_key)

    def kind(self, node_id: str) -> NodeKind:
        return self.node_map[node_id].kind

    def demand(self, node_id: str) -> int:
        return self.node_map[node_id].demand

    @property
    def total_demand(self) -> int:
        return sum(n.demand for n in self.nodes)

    def with_horizon(self, horizon: int) -> "EvacuationNetwork":
        return EvacuationNetwork(self.nodes, self.edges, horizon, self.objective)

    def with_objective(self, objective: Objective) -> "EvacuationNetwork":
        return EvacuationNetwork(self.nodes, self.edges, self.horizon, objective)

    def with_edges(self, edges: Iterable[Edge]) -> "EvacuationNetwork":
        return EvacuationNetwork(self.nodes, tuple(edges), self.horizon, self.objective)

    def without_edge(self, tail: str, head: str) -> "EvacuationNetwork":
        return self.with_edges(e for e in self.edges if e.key != (tail, head))

    def with_deadline(self, tail: str, head: str, deadline: Optional[int]) -> "EvacuationNetwork":
        edges = []
        for e in self.edges:
            if e.key == (tail, head):
                e = Edge(e.tail, e.head, e.travel_time, e.capacity, deadline)
            edges.append(e)
        return self.with_edges(edges)

    def path_length(self, path: list[str]) -> int:
        return sum(self.edge_map[(u, v)].travel_time for u, v in zip(path, path[1:]))


def earliest_arrivals(net: EvacuationNetwork, origin: str) -> dict[str, int]:
    """Earliest arrival time at every node when leaving ``origin`` at t=0
    without waiting.  Edge deadlines restrict the entry time."""
    dist = {origin: 0}
    heap = [(0, id_key(origin), origin)]
    done = set()
    while heap:
        d, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for e in net.out_edges.get(u, ()):
            if not e.admits_entry(d):
                continue
            nd = d + e.travel_time
            if nd < dist.get(e.head, math.inf):
                dist[e.head] = nd
                heapq.heappush(heap, (nd, id_key(e.head), e.head))
    return dist


def validate(net: EvacuationNetwork) -> list[str]:
    """Return every invariant violation as a message; empty means valid."""
    problems: list[str] = []
    seen: set[str] = set()
    for n in net.nodes:
        if n.id in seen:
            problems.append(f"duplicate node id {n.id}")
        seen.add(n.id)
        if n.demand < 0:
            problems.append(f"negative demand on node {n.id}")
        if n.demand > 0 and n.kind is not NodeKind.SOURCE:
            problems.append(f"demand on non-source node {n.id}")

    edge_keys: set[tuple[str, str]] = set()
    for e in net.edges:
        label = f"edge ({e.tail},{e.head})"
        if e.tail not in seen or e.head not in seen:
            problems.append(f"{label} references an unknown node")
        if e.tail == e.head:
            problems.append(f"{label} is a self-loop")
        if e.travel_time < 1:
            problems.append(f"{label} has travel_time < 1")
        if e.capacity < 0:
            problems.append(f"{label} has negative capacity")
        if e.deadline is not None and e.deadline < 0:
            problems.append(f"{label} has negative deadline")
        if e.key in edge_keys:
            problems.append(f"duplicate {label}")
        edge_keys.add(e.key)
        if e.tail in seen and net.kind(e.tail) is NodeKind.SAFE:
            problems.append(f"safe node {e.tail} has outgoing {label}")

    if net.horizon < 1:
        problems.append("horizon must be a positive integer")
    obj = net.objective
    if obj.kind is ObjectiveKind.OUTLIER:
        if obj.fraction is None or not (0 < obj.fraction <= 1):
            problems.append("outlier fraction must lie in (0, 1]")
    if net.total_demand >= MAX_TOTAL_DEMAND:
        problems.append("total demand exceeds the integer flow range")

    safe = set(net.safe_nodes)
    for s in net.sources:
        if not net.out_edges.get(s):
            problems.append(f"source {s} has no outgoing edge")
            continue
        if problems and any("unknown node" in p for p in problems):
            continue
        arrivals = earliest_arrivals(net, s)
        best = min((arrivals[x] for x in safe if x in arrivals), default=math.inf)
        if best > net.horizon:
            problems.append(f"source {s} cannot reach any safe node within horizon")
    return problems


def shortest_route_to_safety(
    net: EvacuationNetwork,
    source: str,
    fixed_successor: Optional[dict[str, str]] = None,
) -> list[str]:
    """Travel-time shortest path from ``source`` to its nearest safe node.

    Ties are broken by edge count, then by the node-id sequence compared
    lexicographically.  Entries respect edge deadlines assuming departure at
    t=0.  With ``fixed_successor`` the search must follow the given successor
    at any node that already has one.
    """
    if net.kind(source) is not NodeKind.SOURCE:
        raise ValueError(f"{source} is not a source node")
    fixed = fixed_successor or {}
    start = (0, 0, (id_key(source),))
    best: dict[str, tuple] = {source: start}
    paths = {source: [source]}
    heap = [(start, source)]
    done: set[str] = set()
    while heap:
        label, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if net.kind(u) is NodeKind.SAFE:
            return paths[u]
        d, hops, seq = label
        if u in fixed:
            candidates = [net.edge_map[(u, fixed[u])]]
        else:
            candidates = net.out_edges.get(u, [])
        for e in candidates:
            v = e.head
            if v in done or not e.admits_entry(d):
                continue
            nd = d + e.travel_time
            if nd > net.horizon:
                continue
            new = (nd, hops + 1, seq + (id_key(v),))
            if v not in best or new < best[v]:
                best[v] = new
                paths[v] = paths[u] + [v]
                heapq.heappush(heap, (new, v))
    raise NoRoute(f"no safe node reachable from {source} within horizon {net.horizon}")


# ---------------------------------------------------------------------------
# JSON instance format

_NODE_KEYS = {"id", "kind", "demand"}
_EDGE_KEYS = {"tail", "head", "travel_time", "capacity", "deadline"}
_TOP_KEYS = {"nodes", "edges", "horizon", "objective", "metadata"}


def _require_int(value, where: str, allow_none: bool = False) -> Optional[int]:
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceError(f"{where}: expected integer, got {value!r}")
    return value


def _check_keys(obj, allowed: set[str], required: set[str], where: str):
    if not isinstance(obj, dict):
        raise InstanceError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise InstanceError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise InstanceError(f"{where}: missing key(s) {sorted(missing)}")


def network_from_dict(data: dict) -> EvacuationNetwork:
    _check_keys(data, _TOP_KEYS, {"nodes", "edges", "horizon"}, "instance")
    nodes = []
    for i, raw in enumerate(data["nodes"]):
        where = f"nodes[{i}]"
        _check_keys(raw, _NODE_KEYS, {"id", "kind"}, where)
        if not isinstance(raw["id"], str):
            raise InstanceError(f"{where}.id: expected string")
        try:
            kind = NodeKind(raw["kind"])
        except ValueError:
            raise InstanceError(f"{where}.kind: unknown node kind {raw['kind']!r}") from None
        demand = _require_int(raw.get("demand", 0), f"{where}.demand")
        nodes.append(Node(raw["id"], kind, demand))
    edges = []
    for i, raw in enumerate(data["edges"]):
        where = f"edges[{i}]"
        _check_keys(raw, _EDGE_KEYS, {"tail", "head", "travel_time", "capacity"}, where)
        edges.append(
            Edge(
                str(raw["tail"]),
                str(raw["head"]),
                _require_int(raw["travel_time"], f"{where}.travel_time"),
                _require_int(raw["capacity"], f"{where}.capacity"),
                _require_int(raw.get("deadline"), f"{where}.deadline", allow_none=True),
            )
        )
    horizon = _require_int(data["horizon"], "horizon")
    objective = Objective.average()
    if "objective" in data:
        raw = data["objective"]
        _check_keys(raw, {"type", "fraction"}, {"type"}, "objective")
        try:
            kind = ObjectiveKind(raw["type"])
        except ValueError:
            raise InstanceError(f"objective.type: unknown objective {raw['type']!r}") from None
        if kind is ObjectiveKind.OUTLIER:
            if "fraction" not in raw:
                raise InstanceError("objective.fraction: required for outlier objective")
            objective = Objective.outlier(raw["fraction"])
        else:
            if "fraction" in raw:
                raise InstanceError("objective.fraction: only allowed for outlier objective")
            objective = Objective(kind)
    return EvacuationNetwork(tuple(nodes), tuple(edges), horizon, objective)


def network_to_dict(net: EvacuationNetwork) -> dict:
    obj: dict = {"type": net.objective.kind.value}
    if net.objective.kind is ObjectiveKind.OUTLIER:
        obj["fraction"] = net.objective.fraction
    return {
        "nodes": [{"id": n.id, "kind": n.kind.value, "demand": n.demand} for n in net.nodes],
        "edges": [
            {
                "tail": e.tail,
                "head": e.head,
                "travel_time": e.travel_time,
                "capacity": e.capacity,
                "deadline": e.deadline,
            }
            for e in net.edges
        ],
        "horizon": net.horizon,
        "objective": obj,
    }


def dumps_instance(net: EvacuationNetwork, metadata: Optional[dict] = None) -> str:
    data = network_to_dict(net)
    if metadata is not None:
        data["metadata"] = metadata
    return json.dumps(data, indent=2) + "\n"


def save_instance(net: EvacuationNetwork, path, metadata: Optional[dict] = None) -> None:
    Path(path).write_text(dumps_instance(net, metadata), encoding="utf-8")


def load_instance(path, check: bool = True) -> EvacuationNetwork:
    """Parse an instance file.

    Raises InstanceError for syntax/schema problems and InvalidInstance when
    the parsed network violates invariants (unless ``check`` is False).
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    net = network_from_dict(data)
    if check:
        problems = validate(net)
        if problems:
            raise InvalidInstance(problems)
    return net


def load_metadata(path) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return data.get("metadata", {})
