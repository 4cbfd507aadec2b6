"""Routes, schedules, plans and the fixed-route scheduling subproblem."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .flow import FlowResult, Infeasible, min_cost_dynamic_flow
from .network import EvacuationNetwork, NodeKind, ObjectiveKind, id_key
from .teg import TimeExpandedGraph, outlier_count


class PlanError(ValueError):
    pass


class CapacityViolation(PlanError):
    pass


class RouteError(PlanError):
    pass


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class RouteSet:
    """Confluent routing: each routed node maps to the head of its chosen edge."""

    successor: dict[str, str]

    def __post_init__(self):
        ordered = dict(sorted(self.successor.items(), key=lambda kv: id_key(kv[0])))
        object.__setattr__(self, "successor", ordered)

    def __hash__(self):
        return hash(tuple(self.successor.items()))

    def edges(self) -> set[tuple[str, str]]:
        return set(self.successor.items())

    def path(self, start: str) -> list[str]:
        path = [start]
        seen = {start}
        u = start
        while u in self.successor:
            u = self.successor[u]
            if u in seen:
                raise RouteError(f"successor cycle through {u}")
            seen.add(u)
            path.append(u)
        return path

    def check(self, net: EvacuationNetwork) -> None:
        for u, v in self.successor.items():
            if (u, v) not in net.edge_map:
                raise RouteError(f"route uses missing edge ({u},{v})")
        for k in net.sources:
            if k not in self.successor:
                raise RouteError(f"source {k} has no successor")
            path = self.path(k)
            if net.kind(path[-1]) is not NodeKind.SAFE:
                raise RouteError(f"route from {k} ends at non-safe node {path[-1]}")

    def restricted_to(self, nodes: Iterable[str]) -> "RouteSet":
        keep = set(nodes)
        return RouteSet({u: v for u, v in self.successor.items() if u in keep})

    def routes_from(self, sources: Iterable[str]) -> "RouteSet":
        succ: dict[str, str] = {}
        for k in sources:
            path = self.path(k)
            for u, v in zip(path, path[1:]):
                succ[u] = v
        return RouteSet(succ)


@dataclass(frozen=True)
class Schedule:
    departures: dict[tuple[str, int], int]

    def __post_init__(self):
        clean = {key: c for key, c in self.departures.items() if c}
        ordered = dict(sorted(clean.items(), key=lambda kv: (id_key(kv[0][0]), kv[0][1])))
        object.__setattr__(self, "departures", ordered)

    def total_for(self, source: str) -> int:
        return sum(c for (k, _), c in self.departures.items() if k == source)

    def cohorts(self) -> list[tuple[str, int, int]]:
        return [(k, t, c) for (k, t), c in self.departures.items()]


@dataclass(frozen=True)
class ObjectiveValue:
    """Objective of one variant.  ``total`` is the integer quantity minimized
    (sum of arrival timesteps, or the completion timestep); ``count`` its
    divisor for averages."""

    kind: ObjectiveKind
    total: int
    count: int = 1

    @property
    def value(self) -> float:
        if self.kind is ObjectiveKind.COMPLETION:
            return float(self.total)
        return self.total / self.count if self.count else 0.0


@dataclass(frozen=True)
class Metrics:
    total: int
    average: float
    completion: int
    outlier_total: int
    outlier_average: float
    fraction: float
    evacuees: int

    def objective(self, kind: ObjectiveKind) -> float:
        if kind is ObjectiveKind.AVERAGE:
            return self.average
        if kind is ObjectiveKind.COMPLETION:
            return float(self.completion)
        return self.outlier_average


@dataclass(frozen=True)
class EvacuationPlan:
    routes: RouteSet
    schedule: Schedule
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def path_lengths(self, net: EvacuationNetwork) -> dict[str, int]:
        return {k: net.path_length(self.routes.path(k)) for k in net.sources}

    def arrivals(self, net: EvacuationNetwork) -> dict[tuple[str, int], int]:
        lengths = self.path_lengths(net)
        return {(k, t): t + lengths[k] for (k, t) in self.schedule.departures}

    def arrival_list(self, net: EvacuationNetwork) -> list[tuple[int, str, int, int]]:
        """(arrival, source, departure, count) sorted by arrival then source then t."""
        lengths = self.path_lengths(net)
        rows = [(t + lengths[k], k, t, c) for (k, t), c in self.schedule.departures.items()]
        rows.sort(key=lambda r: (r[0], id_key(r[1]), r[2]))
        return rows


# ---------------------------------------------------------------------------
# plan file format


def plan_to_dict(plan: EvacuationPlan) -> dict:
    return {
        "routes": [{"node": u, "next": v} for u, v in plan.routes.successor.items()],
        "departures": [{"source": k, "t": t, "count": c} for k, t, c in plan.schedule.cohorts()],
    }


def plan_from_dict(data: dict) -> EvacuationPlan:
    if not isinstance(data, dict) or set(data) - {"routes", "departures"}:
        raise PlanError("plan: expected object with keys 'routes' and 'departures'")
    try:
        succ = {str(r["node"]): str(r["next"]) for r in data["routes"]}
        deps: dict[tuple[str, int], int] = {}
        for r in data["departures"]:
            key = (str(r["source"]), int(r["t"]))
            deps[key] = deps.get(key, 0) + int(r["count"])
    except (KeyError, TypeError, ValueError) as exc:
        raise PlanError(f"plan: malformed entry ({exc})") from None
    return EvacuationPlan(RouteSet(succ), Schedule(deps))


def dumps_plan(plan: EvacuationPlan) -> str:
    return json.dumps(plan_to_dict(plan), indent=2) + "\n"


def save_plan(plan: EvacuationPlan, path) -> None:
    Path(path).write_text(dumps_plan(plan), encoding="utf-8")


def load_plan(path) -> EvacuationPlan:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PlanError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return plan_from_dict(data)


# ---------------------------------------------------------------------------
# scheduling


def route_filter(routes: RouteSet):
    allowed = routes.edges()
    return allowed.__contains__


def objective_from_flow(teg: TimeExpandedGraph, result: FlowResult) -> ObjectiveValue:
    net = teg.origin
    kind = teg.variant.kind
    D = net.total_demand
    if kind is ObjectiveKind.COMPLETION:
        arrivals = result.sink_arrivals()
        return ObjectiveValue(kind, max((t for t, _ in arrivals), default=0))
    if kind is ObjectiveKind.OUTLIER:
        return ObjectiveValue(kind, result.cost, D - outlier_count(D, teg.variant.fraction))
    return ObjectiveValue(kind, result.cost, D)


def completion_lower_bound(teg: TimeExpandedGraph) -> int:
    net = teg.origin
    if net.total_demand == 0:
        return 0
    return min((n.t for n in teg.nodes if n.tag == "plain" and net.kind(n.base) is NodeKind.SAFE), default=0)


def solve_restricted(teg: TimeExpandedGraph, edge_filter=None) -> tuple[FlowResult, ObjectiveValue]:
    """Optimal flow for the TEG's variant with only ``edge_filter`` edges usable.

    Average/outlier: min-cost flow.  Completion: smallest T whose arrivals
    all fit by T (bisection over max-flow feasibility), then the cheapest flow
    meeting that T.
    """
    if teg.variant.kind is not ObjectiveKind.COMPLETION:
        result = min_cost_dynamic_flow(teg, edge_filter)
        return result, objective_from_flow(teg, result)
    if teg.origin.total_demand == 0:
        result = min_cost_dynamic_flow(teg, edge_filter)
        return result, ObjectiveValue(ObjectiveKind.COMPLETION, 0)
    # upper end must be feasible at all
    best = min_cost_dynamic_flow(teg, edge_filter)
    hi = objective_from_flow(teg, best).total
    lo = completion_lower_bound(teg)
    while lo < hi:
        mid = (lo + hi) // 2
        trial = min_cost_dynamic_flow(teg, edge_filter, max_sink_t=mid, require_full=False)
        if trial.value == teg.origin.total_demand:
            hi = mid
            best = trial
        else:
            lo = mid + 1
    if objective_from_flow(teg, best).total != hi:
        best = min_cost_dynamic_flow(teg, edge_filter, max_sink_t=hi)
    return best, ObjectiveValue(ObjectiveKind.COMPLETION, hi)


def schedule_fixed_routes(teg: TimeExpandedGraph, routes: RouteSet) -> tuple[Schedule, ObjectiveValue]:
    """Optimal departure schedule when every routing choice is fixed."""
    result, value = solve_restricted(teg, route_filter(routes))
    return Schedule(result.departures), value


def plan_for_routes(teg: TimeExpandedGraph, routes: RouteSet) -> tuple[EvacuationPlan, ObjectiveValue]:
    schedule, value = schedule_fixed_routes(teg, routes)
    return EvacuationPlan(routes, schedule), value


# ---------------------------------------------------------------------------
# evaluation


def edge_loads(net: EvacuationNetwork, plan: EvacuationPlan) -> dict[tuple[str, str, int], int]:
    """Entries per (tail, head, entry time) implied by the plan."""
    loads: dict[tuple[str, str, int], int] = {}
    for (k, t), c in plan.schedule.departures.items():
        path = plan.routes.path(k)
        tau = t
        for u, v in zip(path, path[1:]):
            key = (u, v, tau)
            loads[key] = loads.get(key, 0) + c
            tau += net.edge_map[(u, v)].travel_time
    return loads


def check_plan(net: EvacuationNetwork, plan: EvacuationPlan, horizon: Optional[int] = None) -> None:
    plan.routes.check(net)
    for k in net.sources:
        if plan.schedule.total_for(k) != net.demand(k):
            raise PlanError(
                f"source {k}: schedule sends {plan.schedule.total_for(k)} of {net.demand(k)} evacuees"
            )
    for (k, t), c in plan.schedule.departures.items():
        if t < 0 or c < 0:
            raise PlanError(f"negative departure entry for source {k}")
    loads = edge_loads(net, plan)
    for (u, v, tau) in sorted(loads, key=lambda key: (key[2], id_key(key[0]), id_key(key[1]))):
        e = net.edge_map[(u, v)]
        if loads[(u, v, tau)] > e.capacity:
            raise CapacityViolation(
                f"edge ({u},{v}) at t={tau} carries {loads[(u, v, tau)]} > capacity {e.capacity}"
            )
        if not e.admits_entry(tau):
            raise CapacityViolation(f"edge ({u},{v}) entered at t={tau} after its deadline {e.deadline}")
    H = net.horizon if horizon is None else horizon
    for (k, t), a in plan.arrivals(net).items():
        if a > H:
            raise PlanError(f"cohort ({k}, t={t}) arrives at {a} after horizon {H}")


def metrics_from_arrivals(arrivals: list[tuple[int, int]], fraction: float, total: int) -> Metrics:
    """``arrivals`` = (arrival timestep, evacuee count) rows sorted by the
    caller's tie order; the last floor((1-p)*total) evacuees are outliers."""
    n = sum(c for _, c in arrivals)
    tot = sum(a * c for a, c in arrivals)
    completion = max((a for a, c in arrivals if c), default=0)
    drop = outlier_count(total, fraction)
    kept = n - drop
    out_total = 0
    remaining = kept
    for a, c in arrivals:
        take = min(c, remaining)
        out_total += a * take
        remaining -= take
        if remaining <= 0:
            break
    return Metrics(
        total=tot,
        average=tot / n if n else 0.0,
        completion=completion,
        outlier_total=out_total,
        outlier_average=out_total / kept if kept > 0 else 0.0,
        fraction=fraction,
        evacuees=n,
    )


def default_fraction(net: EvacuationNetwork, fraction: Optional[float] = None) -> float:
    if fraction is not None:
        return fraction
    if net.objective.kind is ObjectiveKind.OUTLIER:
        return net.objective.fraction
    return 0.9


def evaluate_plan(net: EvacuationNetwork, plan: EvacuationPlan, fraction: Optional[float] = None) -> Metrics:
    """All three metrics computed analytically from the plan's arrivals."""
    check_plan(net, plan)
    rows = [(a, c) for a, _, _, c in plan.arrival_list(net)]
    return metrics_from_arrivals(rows, default_fraction(net, fraction), net.total_demand)


def objective_of_plan(net: EvacuationNetwork, plan: EvacuationPlan, kind: ObjectiveKind, fraction=None) -> ObjectiveValue:
    m = evaluate_plan(net, plan, fraction)
    D = net.total_demand
    if kind is ObjectiveKind.AVERAGE:
        return ObjectiveValue(kind, m.total, D)
    if kind is ObjectiveKind.COMPLETION:
        return ObjectiveValue(kind, m.completion)
    return ObjectiveValue(kind, m.outlier_total, D - outlier_count(D, m.fraction))


__all__ = [
    "CapacityViolation",
    "EvacuationPlan",
    "Infeasible",
    "Metrics",
    "ObjectiveValue",
    "PlanError",
    "RouteSet",
    "Schedule",
    "evaluate_plan",
    "min_cost_dynamic_flow",
    "schedule_fixed_routes",
]
