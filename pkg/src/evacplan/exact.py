"""Branch-and-bound over confluent successor choices.

Each search node fixes the outgoing edge of some nodes.  Its lower bound is the
optimal flow on the TEG where fixed nodes may only use their chosen edge and
free nodes may use every outgoing edge (confluence dropped).  When every node
reached from a source has a successor the bound is exact, so leaves are
evaluated by the same restricted flow.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional

from .flow import Infeasible
from .network import EvacuationNetwork, NodeKind, ObjectiveKind, id_key
from .schedule import (
    EvacuationPlan,
    ObjectiveValue,
    RouteSet,
    Schedule,
    plan_to_dict,
    solve_restricted,
)
from .teg import TimeExpandedGraph, outlier_count


class Status(str, Enum):
    OPTIMAL = "optimal"
    GAP_REACHED = "gap_reached"
    TIME_LIMIT = "time_limit"
    INFEASIBLE = "infeasible"


class CapExceeded(Exception):
    pass


@dataclass
class Limits:
    time_limit: Optional[float] = None  # seconds
    threshold_gap: float = 0.0


@dataclass
class SolveReport:
    best_plan: Optional[EvacuationPlan]
    best_value: Optional[ObjectiveValue]
    upper_bound: float
    lower_bound: float
    gap: float
    nodes_explored: int
    status: Status
    trace: list[tuple[float, float, float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "objective": None if self.best_value is None else self.best_value.value,
            "objective_kind": None if self.best_value is None else self.best_value.kind.value,
            "upper_bound": _finite(self.upper_bound),
            "lower_bound": _finite(self.lower_bound),
            "gap": _finite(self.gap),
            "nodes_explored": self.nodes_explored,
            "plan": None if self.best_plan is None else plan_to_dict(self.best_plan),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["wall_ms", "Z_U", "Z_L", "gap"])
        for row in self.trace:
            w.writerow([f"{row[0]:.3f}"] + [_fmt(x) for x in row[1:]])
        return buf.getvalue()


def _finite(x: float):
    return None if x is None or math.isinf(x) or math.isnan(x) else x


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def relative_gap(upper: float, lower: float) -> float:
    if math.isinf(upper):
        return math.inf
    if upper <= 0:
        return 0.0
    return max(0.0, (upper - lower) / upper)


# ---------------------------------------------------------------------------
# search-tree helpers


def distance_to_safety(net: EvacuationNetwork) -> dict[str, int]:
    """Static travel-time distance from every node to its nearest safe node."""
    dist = {s: 0 for s in net.safe_nodes}
    heap = [(0, id_key(s), s) for s in net.safe_nodes]
    heapq.heapify(heap)
    while heap:
        d, _, v = heapq.heappop(heap)
        if d > dist.get(v, math.inf):
            continue
        for e in net.in_edges.get(v, ()):
            nd = d + e.travel_time
            if nd < dist.get(e.tail, math.inf):
                dist[e.tail] = nd
                heapq.heappush(heap, (nd, id_key(e.tail), e.tail))
    return dist


def open_nodes(net: EvacuationNetwork, succ: dict[str, str]) -> list[str]:
    """Nodes reached from some source through fixed successors that still
    need a successor of their own."""
    seen: set[str] = set()
    result = []
    for k in net.sources:
        u = k
        while u not in seen:
            seen.add(u)
            if u in succ:
                u = succ[u]
                continue
            if net.kind(u) is not NodeKind.SAFE:
                result.append(u)
            break
    return result


def creates_cycle(succ: dict[str, str], u: str, v: str) -> bool:
    w = v
    steps = 0
    while w in succ and steps <= len(succ):
        if w == u:
            return True
        w = succ[w]
        steps += 1
    return w == u


def _candidate_heads(net, succ, u, dist_safe) -> list[str]:
    heads = []
    for e in net.out_edges.get(u, ()):
        v = e.head
        if v not in dist_safe:
            continue
        if creates_cycle(succ, u, v):
            continue
        heads.append(v)
    return heads


def _route_set_for(net: EvacuationNetwork, succ: dict[str, str]) -> RouteSet:
    """Keep only successors on some source's route."""
    keep: dict[str, str] = {}
    for k in net.sources:
        u = k
        while u in succ and u not in keep:
            keep[u] = succ[u]
            u = succ[u]
    return RouteSet(keep)


def check_fixed(net: EvacuationNetwork, fixed: dict[str, str]) -> None:
    for u, v in fixed.items():
        if (u, v) not in net.edge_map:
            raise ValueError(f"fixed route uses missing edge ({u},{v})")
    for u in fixed:
        w, seen = u, set()
        while w in fixed:
            if w in seen:
                raise ValueError(f"fixed routes contain a cycle through {w}")
            seen.add(w)
            w = fixed[w]


# ---------------------------------------------------------------------------
# branch and bound


class _Search:
    def __init__(self, teg: TimeExpandedGraph, limits: Limits, start: float):
        self.teg = teg
        self.net = teg.origin
        self.limits = limits
        self.start = start
        self.dist_safe = distance_to_safety(self.net)
        self.best_plan: Optional[EvacuationPlan] = None
        self.best_value: Optional[ObjectiveValue] = None
        self.upper = math.inf  # in objective-total units
        self.gap_pruned_min = math.inf
        self.nodes = 0
        self.trace: list[tuple[float, float, float, float]] = []
        self.timed_out = False

    def scale(self, total: float) -> float:
        if self.best_value is not None:
            count = self.best_value.count
        else:
            count = _count_for(self.teg)
        return total / count if count else 0.0

    def bound(self, succ: dict[str, str]):
        def allowed(key, succ=succ):
            tail = key[0]
            return tail not in succ or succ[tail] == key[1]

        try:
            return solve_restricted(self.teg, allowed)
        except Infeasible:
            return None

    def elapsed_ms(self) -> float:
        return (time.monotonic() - self.start) * 1000.0

    def record(self, lower_total: float):
        up = self.scale(self.upper) if not math.isinf(self.upper) else math.inf
        lo = self.scale(lower_total) if not math.isinf(lower_total) else math.inf
        if not math.isinf(up):
            lo = min(lo, up)
        self.trace.append((self.elapsed_ms(), up, lo, relative_gap(up, lo)))

    def prunable(self, bound_total: int) -> bool:
        if bound_total >= self.upper:
            return True
        g = self.limits.threshold_gap
        if g > 0 and not math.isinf(self.upper) and self.upper - bound_total <= g * self.upper:
            self.gap_pruned_min = min(self.gap_pruned_min, bound_total)
            return True
        return False

    def offer(self, succ: dict[str, str], result, value: ObjectiveValue, open_bounds) -> None:
        if value.total < self.upper:
            routes = _route_set_for(self.net, succ)
            self.best_plan = EvacuationPlan(routes, Schedule(result.departures))
            self.best_value = value
            self.upper = value.total
            self.record(min([self.upper, self.gap_pruned_min] + open_bounds()))

    def run(self, root: dict[str, str], root_bound) -> list:
        """Depth-first search; returns the stack left when stopped early."""
        result, value = root_bound
        stack: list[tuple[int, dict[str, str]]] = []
        if not open_nodes(self.net, root):
            self.offer(root, result, value, lambda: [])
            return stack
        stack.append((value.total, root))
        while stack:
            if self.limits.time_limit is not None and time.monotonic() - self.start > self.limits.time_limit:
                self.timed_out = True
                return stack
            bound_total, succ = stack.pop()
            if self.prunable(bound_total):
                continue
            self.nodes += 1
            frontier = open_nodes(self.net, succ)
            u = min(frontier, key=lambda x: (self.dist_safe.get(x, math.inf), id_key(x)))
            children = []
            for v in _candidate_heads(self.net, succ, u, self.dist_safe):
                child = dict(succ)
                child[u] = v
                solved = self.bound(child)
                if solved is None:
                    continue
                res, val = solved
                if not open_nodes(self.net, child):
                    self.offer(child, res, val, lambda: [b for b, _ in stack] + [c[0] for c in children])
                    continue
                if self.prunable(val.total):
                    continue
                children.append((val.total, id_key(v), child))
            children.sort(key=lambda c: (c[0], c[1]), reverse=True)
            for b, _, child in children:
                stack.append((b, child))
        return stack


def _count_for(teg: TimeExpandedGraph) -> int:
    D = teg.origin.total_demand
    if teg.variant.kind is ObjectiveKind.COMPLETION:
        return 1
    if teg.variant.kind is ObjectiveKind.OUTLIER:
        return D - outlier_count(D, teg.variant.fraction)
    return D


def _solve_subtree(args):
    teg, limits, root, incumbent_total = args
    search = _Search(teg, limits, time.monotonic())
    if incumbent_total is not None:
        search.upper = incumbent_total
    rb = search.bound(root)
    if rb is None:
        return None, None, search.nodes, math.inf, False
    stack = search.run(root, rb)
    low = min([search.gap_pruned_min] + [b for b, _ in stack])
    return search.best_plan, search.best_value, search.nodes, low, search.timed_out


def solve(
    teg: TimeExpandedGraph,
    fixed_routes: Optional[RouteSet | dict] = None,
    limits: Optional[Limits] = None,
    incumbent: Optional[tuple[EvacuationPlan, ObjectiveValue]] = None,
    workers: int = 1,
) -> SolveReport:
    """Exact confluent routing + scheduling on ``teg``.

    ``fixed_routes`` pins successors (LNS neighbourhoods).  ``incumbent`` is a
    known feasible plan used as the starting upper bound; it is returned if
    nothing strictly better exists.  Raises Infeasible when no confluent
    routing fits the horizon.
    """
    limits = limits or Limits()
    net = teg.origin
    if isinstance(fixed_routes, RouteSet):
        fixed = dict(fixed_routes.successor)
    else:
        fixed = dict(fixed_routes or {})
    check_fixed(net, fixed)
    start = time.monotonic()
    search = _Search(teg, limits, start)
    if incumbent is not None:
        search.best_plan, search.best_value = incumbent
        search.upper = incumbent[1].total

    root_bound = search.bound(fixed)
    if root_bound is None:
        if incumbent is not None:
            raise ValueError("incumbent given but the restricted problem has no flow")
        raise Infeasible("no feasible flow even with confluence relaxed")
    root_total = root_bound[1].total
    search.record(root_total)

    if workers > 1 and open_nodes(net, fixed):
        stack = _parallel(search, fixed, workers)
    else:
        stack = search.run(fixed, root_bound)

    if search.best_plan is None:
        if search.timed_out:
            lower = min([b for b, _ in stack] + [search.gap_pruned_min])
            return SolveReport(
                None, None, math.inf, search.scale(lower), math.inf, search.nodes, Status.TIME_LIMIT, search.trace
            )
        raise Infeasible("no confluent routing fits within the horizon")

    lower = min([search.upper, search.gap_pruned_min] + [b for b, _ in stack])
    if search.timed_out:
        status = Status.TIME_LIMIT
    elif lower < search.upper:
        status = Status.GAP_REACHED
    else:
        status = Status.OPTIMAL
    up = search.scale(search.upper)
    lo = min(search.scale(lower), up)
    search.trace.append((search.elapsed_ms(), up, lo, relative_gap(up, lo)))
    return SolveReport(
        search.best_plan,
        search.best_value,
        up,
        lo,
        relative_gap(up, lo),
        search.nodes,
        status,
        search.trace,
    )


def _parallel(search: _Search, fixed: dict[str, str], workers: int) -> list:
    """Split the first branching level across processes.  Subtrees start
    from the incumbent known at submission; the final optimum does not
    depend on the worker count."""
    net = search.net
    frontier = open_nodes(net, fixed)
    u = min(frontier, key=lambda x: (search.dist_safe.get(x, math.inf), id_key(x)))
    roots = []
    for v in _candidate_heads(net, fixed, u, search.dist_safe):
        child = dict(fixed)
        child[u] = v
        roots.append(child)
    inc = None if math.isinf(search.upper) else search.upper
    jobs = [(search.teg, search.limits, r, inc) for r in roots]
    leftover = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for r, out in zip(roots, pool.map(_solve_subtree, jobs)):
            plan, value, nodes, low, timed_out = out
            search.nodes += nodes + 1
            search.timed_out |= timed_out
            if value is not None and value.total < search.upper:
                search.best_plan, search.best_value, search.upper = plan, value, value.total
            if timed_out and not math.isinf(low):
                leftover.append((low, r))
            elif not math.isinf(low):
                search.gap_pruned_min = min(search.gap_pruned_min, low)
    return leftover


# ---------------------------------------------------------------------------
# enumeration oracle


def routing_space_size(net: EvacuationNetwork) -> int:
    size = 1
    for n in net.nodes:
        if n.kind is not NodeKind.SAFE:
            size *= max(1, len(net.out_edges.get(n.id, ())))
    return size


def enumerate_confluent_routings(net: EvacuationNetwork, cap: int = 10**6) -> Iterator[RouteSet]:
    """Every successor assignment on the nodes reachable from the sources
    that is acyclic and ends every source route at a safe node."""
    if routing_space_size(net) > cap:
        raise CapExceeded(f"routing space {routing_space_size(net)} exceeds cap {cap}")

    def rec(succ: dict[str, str]) -> Iterator[RouteSet]:
        frontier = open_nodes(net, succ)
        if not frontier:
            yield RouteSet(dict(succ))
            return
        u = min(frontier, key=id_key)
        for e in net.out_edges.get(u, ()):
            if creates_cycle(succ, u, e.head):
                continue
            succ[u] = e.head
            yield from rec(succ)
            del succ[u]

    yield from rec({})


def brute_force_optimum(teg: TimeExpandedGraph, cap: int = 10**6):
    """Best (value, routes) over all confluent routings; None if none fits."""
    best = None
    for routes in enumerate_confluent_routings(teg.origin, cap):
        try:
            _, value = solve_restricted(teg, routes.edges().__contains__)
        except Infeasible:
            continue
        if best is None or value.total < best[0].total:
            best = (value, routes)
    return best


def relaxation_bound(teg: TimeExpandedGraph, fixed_routes: Optional[dict] = None) -> Optional[ObjectiveValue]:
    """Confluence-relaxed optimum: a lower bound on every confluent plan
    that agrees with ``fixed_routes``.  None when even that has no flow."""
    search = _Search(teg, Limits(), time.monotonic())
    solved = search.bound(dict(fixed_routes or {}))
    return None if solved is None else solved[1]
