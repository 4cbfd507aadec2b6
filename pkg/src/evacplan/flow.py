"""Integral min-cost dynamic flow on a time-expanded graph.

Successive shortest augmenting paths with Dijkstra on reduced costs.  All TEG
costs are non-negative, so zero initial potentials are valid.  Among equal
cost labels the path with fewer arcs wins, and remaining ties go to the
predecessor settled last; nodes settle in (distance, arcs, t, base-id) order,
which makes the result deterministic.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Optional

from .network import id_key
from .teg import PLAIN, SINK, TegEdge, TegNode, TimeExpandedGraph


class Infeasible(Exception):
    """Demand cannot be routed to safety within the horizon."""


@dataclass
class FlowResult:
    value: int  # units shipped
    cost: int
    edge_flow: dict[TegEdge, int]
    departures: dict[tuple[str, int], int]

    def sink_arrivals(self) -> list[tuple[int, int]]:
        """(t_s, units) on sink-incident edges with positive flow."""
        out = []
        for e, f in self.edge_flow.items():
            if f > 0 and e.dst.tag == SINK:
                out.append((e.t_s, f))
        return sorted(out)


class _Compiled:
    """Integer-indexed view of a TEG, built once per graph."""

    def __init__(self, teg: TimeExpandedGraph):
        self.teg = teg
        net = teg.origin
        self.total = net.total_demand
        self.nodes = list(teg.nodes)
        self.index = {n: i for i, n in enumerate(self.nodes)}
        self.sink = self.index.get(teg.sink)
        self.edges = list(teg.edges)
        self.supplies: list[tuple[str, int, list[int]]] = []
        for k in net.sources:
            d = net.demand(k)
            if d <= 0:
                continue
            copies = [self.index[n] for n in self.nodes if n.tag == PLAIN and n.base == k]
            self.supplies.append((k, d, copies))


def _compiled(teg: TimeExpandedGraph) -> _Compiled:
    comp = teg.__dict__.get("_flow_compiled")
    if comp is None:
        comp = _Compiled(teg)
        teg.__dict__["_flow_compiled"] = comp
    return comp


def min_cost_dynamic_flow(
    teg: TimeExpandedGraph,
    edge_filter: Optional[Callable[[tuple[str, str]], bool]] = None,
    max_sink_t: Optional[int] = None,
    require_full: bool = True,
) -> FlowResult:
    """Ship every evacuee from its source copies to the super sink at minimum
    total arrival cost.

    ``edge_filter`` receives a static edge key (tail, head) and says whether
    its copies may carry flow; None allows every edge (confluence relaxed).
    ``max_sink_t`` disables sink-incident edges whose start time exceeds it.
    """
    comp = _compiled(teg)
    n_teg = len(comp.nodes)
    # extra nodes: super source, one supply node per demanded source
    S = n_teg
    n = n_teg + 1 + len(comp.supplies)
    head: list[int] = []
    cap: list[int] = []
    cost: list[int] = []
    adj: list[list[int]] = [[] for _ in range(n)]
    unbounded = max(comp.total, 1)

    def add(u: int, v: int, c: int, w: int) -> int:
        idx = len(head)
        head.append(v)
        cap.append(c)
        cost.append(w)
        adj[u].append(idx)
        head.append(u)
        cap.append(0)
        cost.append(-w)
        adj[v].append(idx + 1)
        return idx

    for i, (k, d, copies) in enumerate(comp.supplies):
        sigma = n_teg + 1 + i
        add(S, sigma, d, 0)
        for c in copies:
            add(sigma, c, unbounded, 0)
    teg_arcs: list[tuple[int, TegEdge]] = []
    for e in comp.edges:
        if e.base is not None and edge_filter is not None and not edge_filter(e.base):
            continue
        if max_sink_t is not None and e.dst.tag == SINK and e.t_s > max_sink_t:
            continue
        c = unbounded if e.capacity is None else e.capacity
        if c <= 0:
            continue
        idx = add(comp.index[e.src], comp.index[e.dst], c, e.cost)
        teg_arcs.append((idx, e))

    # settle order key for tie-breaking: (t, base-id) of TEG nodes
    order = [0] * n
    for i, node in enumerate(comp.nodes):
        order[i] = i + 1
    order[S] = -2
    for i in range(len(comp.supplies)):
        order[n_teg + 1 + i] = -1

    T = comp.sink
    need = sum(d for _, d, _ in comp.supplies)
    flow_value = 0
    total_cost = 0
    pot = [0] * n
    INF = float("inf")
    while flow_value < need and T is not None:
        dist = [INF] * n
        hops = [0] * n
        parent = [-1] * n
        settled = [False] * n
        dist[S] = 0
        heap = [(0, 0, order[S], S)]
        while heap:
            d, h, _, u = heapq.heappop(heap)
            if settled[u] or d > dist[u] or (d == dist[u] and h > hops[u]):
                continue
            settled[u] = True
            pu = pot[u]
            nh = h + 1
            for a in adj[u]:
                if cap[a] <= 0:
                    continue
                v = head[a]
                if settled[v]:
                    continue
                nd = d + cost[a] + pu - pot[v]
                if nd < dist[v] or (nd == dist[v] and nh < hops[v]):
                    dist[v] = nd
                    hops[v] = nh
                    parent[v] = a
                    heapq.heappush(heap, (nd, nh, order[v], v))
                elif nd == dist[v] and nh == hops[v]:
                    parent[v] = a
        if dist[T] == INF:
            break
        dmax = max(x for x in dist if x != INF)
        for v in range(n):
            pot[v] += dist[v] if dist[v] != INF else dmax
        # bottleneck
        push = need - flow_value
        v = T
        while v != S:
            a = parent[v]
            push = min(push, cap[a])
            v = head[a ^ 1]
        v = T
        while v != S:
            a = parent[v]
            cap[a] -= push
            cap[a ^ 1] += push
            total_cost += push * cost[a]
            v = head[a ^ 1]
        flow_value += push

    if require_full and flow_value < need:
        raise Infeasible(f"only {flow_value} of {need} evacuees can reach safety")

    edge_flow: dict[TegEdge, int] = {}
    for idx, e in teg_arcs:
        f = cap[idx + 1]
        if f:
            edge_flow[e] = f
    departures: dict[tuple[str, int], int] = {}
    for i, (k, d, copies) in enumerate(comp.supplies):
        sigma = n_teg + 1 + i
        for a in adj[sigma]:
            if a % 2 == 0:
                f = cap[a + 1]
                if f:
                    node = comp.nodes[head[a]]
                    departures[(k, node.t)] = departures.get((k, node.t), 0) + f
    return FlowResult(flow_value, total_cost, edge_flow, departures)


def sorted_departures(departures: dict[tuple[str, int], int]) -> list[tuple[str, int, int]]:
    return sorted(((k, t, c) for (k, t), c in departures.items()), key=lambda r: (id_key(r[0]), r[1]))
