"""Time-expanded graph (TEG) construction, augmentation and pruning.

Every static edge (u, v) with travel time T becomes copies (u, t) -> (v, t + T)
for each departure time t with t + T <= H and t <= deadline.  Safe-node copies
drain into a single super sink; the arc cost of a sink edge is the timestep of
its starting node, so an evacuee reaching safety at t pays t.

There are no hold-over arcs.  Departure time at a source is chosen by
injecting supply directly into any source copy (k, t).
"""

from __future__ import annotations

import csv
import io
from collections import deque
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Optional

from .network import (
    EvacuationNetwork,
    InvalidInstance,
    NodeKind,
    Objective,
    ObjectiveKind,
    id_key,
    validate,
)

PLAIN = "plain"
SINK = "sink"
COLLECTOR = "collector"
BYPASS = "bypass"

_TAG_RANK = {PLAIN: 0, COLLECTOR: 1, BYPASS: 2, SINK: 3}


class HorizonTooSmall(ValueError):
    pass


class InfeasibleAfterPrune(ValueError):
    pass


class TegNode(NamedTuple):
    base: Optional[str]
    t: int
    tag: str = PLAIN

    def label(self) -> str:
        if self.tag == PLAIN:
            return str(self.base)
        if self.tag == COLLECTOR:
            return "z"
        if self.tag == BYPASS:
            return "bypass"
        return "sink"


class TegEdge(NamedTuple):
    src: TegNode
    dst: TegNode
    capacity: Optional[int]  # None = unbounded
    base: Optional[tuple[str, str]]  # static edge this copies
    t_s: int
    cost: int


def node_order_key(node: TegNode):
    base = id_key(node.base) if node.base is not None else (2, 0, "")
    return (node.t if node.tag != SINK else 10**9, _TAG_RANK[node.tag], base)


def outlier_count(total: int, fraction: float) -> int:
    """Number of evacuees excluded as outliers: floor((1 - p) * total)."""
    keep = Fraction(str(fraction))
    return int((1 - keep) * total // 1)


class TimeExpandedGraph:
    """Immutable TEG.  Operations below return new graphs."""

    def __init__(
        self,
        net: EvacuationNetwork,
        horizon: int,
        nodes: Iterable[TegNode],
        edges: Iterable[TegEdge],
        variant: Objective,
    ):
        self.origin = net
        self.horizon = horizon
        self.nodes: tuple[TegNode, ...] = tuple(sorted(set(nodes), key=node_order_key))
        node_set = set(self.nodes)
        self.edges: tuple[TegEdge, ...] = tuple(
            sorted(
                (e for e in edges if e.src in node_set and e.dst in node_set),
                key=lambda e: (node_order_key(e.src), node_order_key(e.dst)),
            )
        )
        self.variant = variant

    def __repr__(self):
        return (
            f"TimeExpandedGraph(H={self.horizon}, variant={self.variant.kind.value}, "
            f"nodes={len(self.nodes)}, edges={len(self.edges)})"
        )

    def __eq__(self, other):
        if not isinstance(other, TimeExpandedGraph):
            return NotImplemented
        return (
            self.horizon == other.horizon
            and self.variant == other.variant
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    __hash__ = None  # type: ignore[assignment]

    @cached_property
    def node_set(self) -> frozenset:
        return frozenset(self.nodes)

    @cached_property
    def sink(self) -> TegNode:
        return TegNode(None, self.horizon, SINK)

    @cached_property
    def out_adj(self) -> dict[TegNode, list[TegEdge]]:
        adj: dict[TegNode, list[TegEdge]] = {n: [] for n in self.nodes}
        for e in self.edges:
            adj[e.src].append(e)
        return adj

    @cached_property
    def in_adj(self) -> dict[TegNode, list[TegEdge]]:
        adj: dict[TegNode, list[TegEdge]] = {n: [] for n in self.nodes}
        for e in self.edges:
            adj[e.dst].append(e)
        return adj

    def source_copies(self, source: str) -> list[TegNode]:
        return [n for n in self.nodes if n.tag == PLAIN and n.base == source]

    def copies_of(self, tail: str, head: str) -> list[TegEdge]:
        return [e for e in self.edges if e.base == (tail, head)]

    @property
    def bypass_capacity(self) -> Optional[int]:
        for e in self.edges:
            if e.src.tag == BYPASS:
                return e.capacity
        return None

    def is_dag(self) -> bool:
        indeg = {n: 0 for n in self.nodes}
        for e in self.edges:
            indeg[e.dst] += 1
        queue = deque(n for n, d in indeg.items() if d == 0)
        seen = 0
        while queue:
            u = queue.popleft()
            seen += 1
            for e in self.out_adj[u]:
                indeg[e.dst] -= 1
                if indeg[e.dst] == 0:
                    queue.append(e.dst)
        return seen == len(self.nodes)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["from_base", "from_t", "to_base", "to_t", "capacity", "t_s"])
        for e in self.edges:
            writer.writerow(
                [
                    e.src.label(),
                    e.src.t,
                    e.dst.label(),
                    e.dst.t,
                    "inf" if e.capacity is None else e.capacity,
                    e.t_s,
                ]
            )
        return buf.getvalue()

    def _rebuild(self, nodes, edges, variant=None, horizon=None) -> "TimeExpandedGraph":
        return TimeExpandedGraph(
            self.origin,
            self.horizon if horizon is None else horizon,
            nodes,
            edges,
            self.variant if variant is None else variant,
        )


def expand(net: EvacuationNetwork, horizon: Optional[int] = None) -> TimeExpandedGraph:
    """Average-variant TEG: node copies for t = 0..H, edge copies, super sink."""
    H = net.horizon if horizon is None else horizon
    if H < 1:
        raise HorizonTooSmall("horizon must be at least 1")
    problems = validate(net.with_horizon(H))
    structural = [p for p in problems if "within horizon" not in p]
    if structural:
        raise InvalidInstance(structural)
    if problems and len(problems) == len(net.sources):
        raise HorizonTooSmall(f"no source can reach safety within horizon {H}")

    nodes = [TegNode(n.id, t) for n in net.nodes for t in range(H + 1)]
    sink = TegNode(None, H, SINK)
    nodes.append(sink)
    edges = []
    for e in net.edges:
        last = H - e.travel_time
        if e.deadline is not None:
            last = min(last, e.deadline)
        for t in range(0, last + 1):
            edges.append(
                TegEdge(TegNode(e.tail, t), TegNode(e.head, t + e.travel_time), e.capacity, e.key, t, 0)
            )
    for s in net.safe_nodes:
        for t in range(H + 1):
            edges.append(TegEdge(TegNode(s, t), sink, None, None, t, t))
    return TimeExpandedGraph(net, H, nodes, edges, Objective.average())


def _require_average(teg: TimeExpandedGraph):
    if teg.variant.kind is not ObjectiveKind.AVERAGE:
        raise ValueError("augmentation requires an average-variant TEG")


def augment_completion(teg: TimeExpandedGraph) -> TimeExpandedGraph:
    """Route safe copies through per-timestep collectors z_t before the sink."""
    _require_average(teg)
    sink = teg.sink
    edges = [e for e in teg.edges if e.dst != sink]
    collectors = [TegNode(None, t, COLLECTOR) for t in range(teg.horizon + 1)]
    for e in teg.edges:
        if e.dst == sink:
            z = TegNode(None, e.src.t, COLLECTOR)
            edges.append(TegEdge(e.src, z, None, None, e.src.t, 0))
    for z in collectors:
        edges.append(TegEdge(z, sink, None, None, z.t, z.t))
    return teg._rebuild(list(teg.nodes) + collectors, edges, Objective.completion())


def augment_outlier(teg: TimeExpandedGraph, fraction: float) -> TimeExpandedGraph:
    """Add the bypass node that carries floor((1 - p) * total demand) evacuees
    to the sink at zero cost."""
    _require_average(teg)
    if not (0 < fraction <= 1):
        raise ValueError("outlier fraction must lie in (0, 1]")
    sink = teg.sink
    bypass = TegNode(None, 0, BYPASS)
    edges = list(teg.edges)
    for e in teg.edges:
        if e.dst == sink:
            edges.append(TegEdge(e.src, bypass, None, None, e.src.t, 0))
    cap = outlier_count(teg.origin.total_demand, fraction)
    edges.append(TegEdge(bypass, sink, cap, None, 0, 0))
    return teg._rebuild(list(teg.nodes) + [bypass], edges, Objective.outlier(fraction))


def _roots(teg: TimeExpandedGraph) -> list[TegNode]:
    net = teg.origin
    demanded = {k for k in net.sources if net.demand(k) > 0}
    return [n for n in teg.nodes if n.tag == PLAIN and n.base in demanded]


def prune(teg: TimeExpandedGraph) -> TimeExpandedGraph:
    """Drop nodes not reachable from a demanded source copy or unable to reach
    the super sink.  Raises InfeasibleAfterPrune if some (k, 0) is lost."""
    forward: set[TegNode] = set()
    queue = deque(_roots(teg))
    forward.update(queue)
    while queue:
        u = queue.popleft()
        for e in teg.out_adj[u]:
            if e.dst not in forward:
                forward.add(e.dst)
                queue.append(e.dst)
    backward: set[TegNode] = set()
    if teg.sink in teg.node_set:
        backward.add(teg.sink)
        queue = deque([teg.sink])
        while queue:
            v = queue.popleft()
            for e in teg.in_adj[v]:
                if e.src not in backward:
                    backward.add(e.src)
                    queue.append(e.src)
    keep = forward & backward
    net = teg.origin
    lost = [k for k in net.sources if net.demand(k) > 0 and TegNode(k, 0) not in keep]
    if lost:
        raise InfeasibleAfterPrune(
            f"source(s) {', '.join(lost)} cannot reach safety within horizon {teg.horizon}"
        )
    if len(keep) == len(teg.nodes):
        return teg
    return teg._rebuild(keep, teg.edges)


def truncate_horizon(teg: TimeExpandedGraph, new_horizon: int) -> TimeExpandedGraph:
    """Drop every timestep after ``new_horizon`` and prune."""
    if new_horizon > teg.horizon:
        raise ValueError("truncate_horizon cannot extend the horizon")
    if new_horizon == teg.horizon:
        return prune(teg)
    old_sink = teg.sink
    new_sink = TegNode(None, new_horizon, SINK)

    def relabel(n: TegNode) -> TegNode:
        return new_sink if n == old_sink else n

    nodes = [relabel(n) for n in teg.nodes if n.tag in (SINK, BYPASS) or n.t <= new_horizon]
    keep = set(nodes)
    edges = []
    for e in teg.edges:
        src, dst = relabel(e.src), relabel(e.dst)
        if src in keep and dst in keep:
            edges.append(e._replace(src=src, dst=dst))
    return prune(teg._rebuild(nodes, edges, horizon=new_horizon))


def build(net: EvacuationNetwork, horizon: Optional[int] = None, objective: Optional[Objective] = None) -> TimeExpandedGraph:
    """Expand, augment for the objective and prune."""
    objective = objective or net.objective
    teg = expand(net, horizon)
    if objective.kind is ObjectiveKind.COMPLETION:
        teg = augment_completion(teg)
    elif objective.kind is ObjectiveKind.OUTLIER:
        teg = augment_outlier(teg, objective.fraction)
    return prune(teg)


def safe_kind(net: EvacuationNetwork, node: TegNode) -> bool:
    return node.tag == PLAIN and net.kind(node.base) is NodeKind.SAFE
