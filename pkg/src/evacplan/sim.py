"""Discrete-time queue simulation of an evacuation plan.

Every road is a FIFO queue admitting at most ``capacity`` entries per
timestep.  Agents follow their source's planned route, wait at a node when
the next road is full, and are stranded when the road they need has failed.
With exact compliance and no failures nobody ever waits, so simulated
arrivals coincide with the plan's arrival times.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .network import EvacuationNetwork, NodeKind, id_key
from .schedule import EvacuationPlan, metrics_from_arrivals


@dataclass
class Agent:
    id: int
    source: str
    route: tuple[str, ...]
    prescribed_departure: int
    actual_departure: int
    arrival: Optional[int] = None  # None while unfinished

    @property
    def arrived(self) -> bool:
        return self.arrival is not None


@dataclass(frozen=True)
class Perturbation:
    """Departure-time noise.  ``kind`` is "none", "normal" (uses sigma) or
    "uniform" (integers in [lo, hi]; hi None means the plan's completion)."""

    kind: str = "none"
    sigma: float = 0.0
    lo: int = 0
    hi: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "normal", "uniform"):
            raise ValueError(f"unknown perturbation {self.kind!r}")
        if self.kind == "normal" and not self.sigma > 0:
            raise ValueError("normal perturbation needs sigma > 0")
        if self.kind == "uniform" and self.hi is not None and self.lo > self.hi:
            raise ValueError("uniform perturbation needs lo <= hi")
        if self.lo < 0:
            raise ValueError("departures cannot be negative")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "Perturbation":
        """``normal:SIGMA`` or ``uniform:LO,HI`` (HI may be omitted)."""
        name, _, arg = text.partition(":")
        name = name.strip().lower()
        if name == "none":
            return cls(seed=seed)
        if name == "normal":
            return cls("normal", sigma=float(arg), seed=seed)
        if name == "uniform":
            parts = [p.strip() for p in arg.split(",")] if arg else []
            lo = int(parts[0]) if parts and parts[0] else 0
            hi = int(parts[1]) if len(parts) > 1 and parts[1] else None
            return cls("uniform", lo=lo, hi=hi, seed=seed)
        raise ValueError(f"cannot parse perturbation {text!r}")

    def describe(self) -> str:
        if self.kind == "normal":
            return f"normal:{self.sigma:g}"
        if self.kind == "uniform":
            return f"uniform:{self.lo},{'' if self.hi is None else self.hi}"
        return "none"


@dataclass
class SimResult:
    agents: list[Agent]
    events: list[tuple[int, int, str, str]] = field(default_factory=list)

    @property
    def arrivals(self) -> dict[int, Optional[int]]:
        return {a.id: a.arrival for a in self.agents}

    @property
    def arrived_times(self) -> list[int]:
        return sorted(a.arrival for a in self.agents if a.arrival is not None)

    @property
    def unsuccessful(self) -> int:
        return sum(1 for a in self.agents if a.arrival is None)

    @property
    def total_evacuation_time(self) -> int:
        return sum(self.arrived_times)

    @property
    def completion(self) -> int:
        times = self.arrived_times
        return times[-1] if times else 0

    @property
    def average(self) -> float:
        times = self.arrived_times
        return sum(times) / len(times) if times else 0.0

    def rate_curve(self, until: Optional[int] = None) -> list[tuple[int, int]]:
        """Cumulative arrivals at every timestep 0..until (completion by default)."""
        end = self.completion if until is None else until
        counts = [0] * (end + 1)
        for t in self.arrived_times:
            if t <= end:
                counts[t] += 1
        out, run = [], 0
        for t, c in enumerate(counts):
            run += c
            out.append((t, run))
        return out

    def cohort_arrivals(self) -> dict[tuple[str, int], set]:
        """Arrival times per (source, prescribed departure)."""
        out: dict[tuple[str, int], set] = {}
        for a in self.agents:
            out.setdefault((a.source, a.prescribed_departure), set()).add(a.arrival)
        return out

    def metrics(self, fraction: float):
        rows = [(t, 1) for t in self.arrived_times]
        return metrics_from_arrivals(rows, fraction, len(rows))

    def to_dict(self) -> dict:
        return {
            "agents": len(self.agents),
            "arrived": len(self.agents) - self.unsuccessful,
            "unsuccessful": self.unsuccessful,
            "total_evacuation_time": self.total_evacuation_time,
            "average": self.average,
            "completion": self.completion,
            "quartiles": quartiles(self.arrived_times),
            "arrivals": [
                {
                    "agent": a.id,
                    "source": a.source,
                    "prescribed": a.prescribed_departure,
                    "departure": a.actual_departure,
                    "arrival": a.arrival,
                }
                for a in self.agents
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def events_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "agent", "event", "location"])
        w.writerows(self.events)
        return buf.getvalue()

    def rate_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "cumulative_arrived"])
        w.writerows(self.rate_curve())
        return buf.getvalue()


def make_agents(net: EvacuationNetwork, plan: EvacuationPlan) -> list[Agent]:
    """One agent per evacuee, numbered by source id then departure time."""
    agents: list[Agent] = []
    routes: dict[str, tuple[str, ...]] = {}
    for k, t, count in plan.schedule.cohorts():
        if k not in routes:
            routes[k] = tuple(plan.routes.path(k))
        for _ in range(count):
            agents.append(Agent(len(agents), k, routes[k], t, t))
    return agents


def plan_completion(net: EvacuationNetwork, plan: EvacuationPlan) -> int:
    return max((r[0] for r in plan.arrival_list(net)), default=0)


def perturb_departures(
    agents: Sequence[Agent], model: Perturbation, completion: int = 0
) -> dict[int, int]:
    """Actual departure per agent id.  Normal draws are rounded half up and
    clamped at 0; uniform draws are integers in [lo, hi]."""
    if model.kind == "none":
        return {a.id: a.prescribed_departure for a in agents}
    rng = np.random.default_rng(model.seed)
    if model.kind == "normal":
        mu = np.array([a.prescribed_departure for a in agents], dtype=float)
        draws = rng.normal(mu, model.sigma) if len(agents) else mu
        values = np.maximum(np.floor(draws + 0.5), 0).astype(int)
    else:
        hi = completion if model.hi is None else model.hi
        hi = max(hi, model.lo)
        values = rng.integers(model.lo, hi + 1, size=len(agents))
    return {a.id: int(v) for a, v in zip(agents, values)}


def simulate(
    net: EvacuationNetwork,
    plan: EvacuationPlan,
    perturbation: Optional[Perturbation] = None,
    failures: Optional[dict[tuple[str, str], int]] = None,
    max_time: Optional[int] = None,
) -> SimResult:
    """Run the plan.  ``failures`` maps an edge to the last timestep it still
    admits entries; agents already on it finish their traversal.  Agents not
    safe by ``max_time`` (unbounded if None) count as unsuccessful."""
    failures = dict(failures or {})
    for key in failures:
        if key not in net.edge_map:
            raise ValueError(f"failure names unknown edge {key[0]}-{key[1]}")
    agents = make_agents(net, plan)
    model = perturbation or Perturbation()
    actual = perturb_departures(agents, model, plan_completion(net, plan))
    for a in agents:
        a.actual_departure = actual[a.id]

    events: list[tuple[int, int, str, str]] = []
    # (time at node, agent id, route index)
    pending: list[tuple[int, int, int]] = []
    for a in agents:
        events.append((a.actual_departure, a.id, "depart", a.source))
        pending.append((a.actual_departure, a.id, 0))
    heapq.heapify(pending)
    queues: dict[tuple[str, str], list[tuple[int, int, int]]] = {}
    stalled: set[tuple[int, int]] = set()

    t = pending[0][0] if pending else 0
    while pending or queues:
        if max_time is not None and t > max_time:
            break
        while pending and pending[0][0] <= t:
            ready, aid, idx = heapq.heappop(pending)
            a = agents[aid]
            node = a.route[idx]
            if net.kind(node) is NodeKind.SAFE:
                a.arrival = ready
                events.append((ready, aid, "arrive", node))
            elif idx + 1 >= len(a.route):
                events.append((ready, aid, "strand", node))
            else:
                queues.setdefault((node, a.route[idx + 1]), []).append((ready, aid, idx))
        for key in sorted(queues, key=lambda k: (id_key(k[0]), id_key(k[1]))):
            waiting = sorted(queues[key])
            edge = net.edge_map[key]
            fail = failures.get(key)
            if (fail is not None and t > fail) or edge.capacity <= 0:
                for _, aid, _ in waiting:
                    events.append((t, aid, "strand", key[0]))
                del queues[key]
                continue
            admitted, rest = waiting[: edge.capacity], waiting[edge.capacity :]
            for _, aid, idx in admitted:
                events.append((t, aid, "enter_edge", f"{key[0]}-{key[1]}"))
                heapq.heappush(pending, (t + edge.travel_time, aid, idx + 1))
            for _, aid, idx in rest:
                if (aid, idx) not in stalled:
                    stalled.add((aid, idx))
                    events.append((t, aid, "stall", key[0]))
            if rest:
                queues[key] = rest
            else:
                del queues[key]
        if queues:
            t += 1
        elif pending:
            t = max(t + 1, pending[0][0])

    if max_time is not None:
        for a in agents:
            if a.arrival is not None and a.arrival > max_time:
                a.arrival = None
    rank = {"depart": 0, "arrive": 1, "strand": 2, "enter_edge": 3, "stall": 4}
    events = [e for e in events if max_time is None or e[0] <= max_time]
    events.sort(key=lambda e: (e[0], e[1], rank[e[2]]))
    return SimResult(agents, events)


def quartiles(values: Sequence[float]) -> Optional[dict]:
    if not len(values):
        return None
    q = np.percentile(np.asarray(values, dtype=float), [0, 25, 50, 75, 100])
    return {"min": float(q[0]), "q1": float(q[1]), "median": float(q[2]), "q3": float(q[3]), "max": float(q[4])}


def compare_runs(results: Sequence[SimResult], labels: Optional[Sequence[str]] = None) -> list[dict]:
    """One summary row per run: arrival quartiles, totals and failures."""
    labels = list(labels) if labels is not None else [f"run{i}" for i in range(len(results))]
    rows = []
    for label, res in zip(labels, results):
        q = quartiles(res.arrived_times) or {k: math.nan for k in ("min", "q1", "median", "q3", "max")}
        rows.append(
            {
                "run": label,
                **q,
                "average": res.average,
                "completion": res.completion,
                "total_evacuation_time": res.total_evacuation_time,
                "unsuccessful": res.unsuccessful,
            }
        )
    return rows


def rate_curves(results: Sequence[SimResult], labels: Sequence[str]) -> list[tuple[str, int, int]]:
    """Long-format curves (run, t, cumulative) over a common time axis."""
    end = max((r.completion for r in results), default=0)
    out = []
    for label, res in zip(labels, results):
        for t, c in res.rate_curve(end):
            out.append((label, t, c))
    return out
