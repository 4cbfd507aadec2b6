"""Large neighbourhood search around the exact solver.

Each iteration keeps the current routes of a random subset of sources, lets
the exact solver re-optimize everything else, and shrinks the working horizon
when the completion time drops.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, TextIO

from .exact import Limits, SolveReport, Status, relative_gap, relaxation_bound, solve
from .flow import Infeasible
from .network import EvacuationNetwork, NoRoute, id_key, shortest_route_to_safety
from .schedule import EvacuationPlan, ObjectiveValue, RouteSet, plan_for_routes
from .teg import TimeExpandedGraph, build, truncate_horizon


@dataclass(frozen=True)
class LnsParams:
    n: int = 30
    p: float = 75.0
    p_inc: float = 0.5
    threshold_gap: float = 0.05
    inner_time_limit: Optional[float] = None  # seconds per inner solve
    horizon_shrink_threshold: int = 1
    rng_seed: int = 0
    accept_worse: bool = False

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if not 0 <= self.p <= 100:
            raise ValueError("p must lie in [0, 100]")
        if self.p_inc < 0:
            raise ValueError("p_inc must be non-negative")
        if not 0 <= self.threshold_gap < 1:
            raise ValueError("threshold_gap must lie in [0, 1)")
        if self.inner_time_limit is not None and self.inner_time_limit <= 0:
            raise ValueError("inner_time_limit must be positive")


def default_params(total_time: Optional[float] = None, **overrides) -> LnsParams:
    """n=30, p=75, p_inc=0.5, 5% gap.  A total wall-time budget is split
    evenly over the iterations."""
    params = LnsParams(**overrides)
    if total_time is not None and "inner_time_limit" not in overrides:
        params = replace(params, inner_time_limit=total_time / max(params.n, 1))
    return params


def scaling_params(total_time: Optional[float] = None, **overrides) -> LnsParams:
    """Preset used for the scalability runs: p=80, p_inc=0.5, 2% gap."""
    base = {"p": 80.0, "p_inc": 0.5, "threshold_gap": 0.02}
    base.update(overrides)
    return default_params(total_time, **base)


PRESETS = {"default": default_params, "scaling": scaling_params}


@dataclass
class TraceRow:
    iteration: int
    objective: float
    completion: int
    horizon: int
    p: float
    status: str


@dataclass
class LnsTrace:
    rows: list[TraceRow] = field(default_factory=list)

    def objectives(self) -> list[float]:
        return [r.objective for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "objective", "completion", "horizon", "p", "status"])
        for r in self.rows:
            w.writerow([r.iteration, repr(float(r.objective)), r.completion, r.horizon, _fmt_p(r.p), r.status])
        return buf.getvalue()


def _fmt_p(p: float) -> str:
    return f"{p:g}"


def fixed_count(p: float, n_sources: int) -> int:
    """ceil((100 - p)/100 * |sources|), computed exactly."""
    free = min(Fraction(str(p)), Fraction(100))
    return math.ceil((100 - free) * n_sources / 100)


def completion_of(net: EvacuationNetwork, plan: EvacuationPlan) -> int:
    rows = plan.arrival_list(net)
    return max((r[0] for r in rows), default=0)


def initial_routes(net: EvacuationNetwork) -> RouteSet:
    """Shortest route per source; larger demand claims shared nodes first and
    later sources must follow successors already chosen."""
    order = sorted(net.sources, key=lambda k: (-net.demand(k), id_key(k)))
    succ: dict[str, str] = {}
    for k in order:
        try:
            path = shortest_route_to_safety(net, k, fixed_successor=succ)
        except NoRoute as exc:
            raise Infeasible(f"no route from {k} compatible with earlier choices") from exc
        for u, v in zip(path, path[1:]):
            succ.setdefault(u, v)
    return RouteSet(succ)


# a gap this wide prunes every open branch once any incumbent exists
_FIRST_FEASIBLE = Limits(threshold_gap=0.999999)


def initial_solution(
    net: EvacuationNetwork, teg: TimeExpandedGraph, fallback: bool = True
) -> tuple[EvacuationPlan, ObjectiveValue]:
    """Shortest-route plan with its optimal schedule.

    When those routes cannot be scheduled within the horizon and ``fallback``
    is set, the first confluent plan found by the exact search is used
    instead.  Raises Infeasible if no confluent plan exists at all.
    """
    try:
        return plan_for_routes(teg, initial_routes(net))
    except Infeasible:
        if not fallback:
            raise
    report = solve(teg, limits=_FIRST_FEASIBLE)
    return report.best_plan, report.best_value


def _fixed_for(plan: EvacuationPlan, sources: list[str]) -> dict[str, str]:
    fixed: dict[str, str] = {}
    for k in sources:
        path = plan.routes.path(k)
        for u, v in zip(path, path[1:]):
            fixed[u] = v
    return fixed


def run(
    net: EvacuationNetwork,
    params: Optional[LnsParams] = None,
    teg: Optional[TimeExpandedGraph] = None,
    progress: Optional[TextIO] = None,
) -> tuple[EvacuationPlan, SolveReport, LnsTrace]:
    """Run the search from the shortest-route start.  One progress line per
    iteration is written to ``progress`` when given."""
    params = params or default_params()
    teg = teg if teg is not None else build(net)
    out = progress

    def say(msg: str) -> None:
        if out is not None:
            print(msg, file=out)

    plan, value = initial_solution(net, teg)
    rng = random.Random(params.rng_seed)
    sources = sorted(net.sources, key=id_key)
    horizon = teg.horizon
    lower = relaxation_bound(teg)
    lower_total = lower.total if lower is not None else 0
    trace = LnsTrace()
    nodes = 0
    p = float(params.p)
    limits = Limits(time_limit=params.inner_time_limit, threshold_gap=params.threshold_gap)
    say(f"lns: initial objective {value.value:g}, horizon {horizon}")

    for it in range(1, params.n + 1):
        chosen = rng.sample(sources, fixed_count(p, len(sources)))
        fixed = _fixed_for(plan, chosen)
        incumbent = None if params.accept_worse else (plan, value)
        try:
            report = solve(teg, fixed_routes=fixed, limits=limits, incumbent=incumbent)
            status = report.status.value
            nodes += report.nodes_explored
            candidate = (report.best_plan, report.best_value) if report.best_plan is not None else None
        except Infeasible:
            status, candidate = Status.INFEASIBLE.value, None
        if candidate is not None and (params.accept_worse or candidate[1].total <= value.total):
            plan, value = candidate
        done = completion_of(net, plan)
        if horizon - done > params.horizon_shrink_threshold:
            teg = truncate_horizon(teg, done)
            horizon = done
        trace.rows.append(TraceRow(it, value.value, done, horizon, p, status))
        say(f"lns: iter {it} p={_fmt_p(p)} objective {value.value:g} completion {done} horizon {horizon} [{status}]")
        p = min(100.0, p + params.p_inc)

    up = value.value
    lo = min(value.value, _scaled(lower_total, value))
    gap = relative_gap(up, lo)
    if gap <= 0:
        status = Status.OPTIMAL
    elif gap <= params.threshold_gap:
        status = Status.GAP_REACHED
    else:
        status = Status.TIME_LIMIT
    report = SolveReport(plan, value, up, lo, gap, nodes, status, [])
    return plan, report, trace


def _scaled(total: int, like: ObjectiveValue) -> float:
    return ObjectiveValue(like.kind, total, like.count).value
