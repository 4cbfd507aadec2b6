"""Shared test helpers: the random corpus and brute-force oracles that do not
touch the flow code."""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Optional

from evacplan.exact import brute_force_optimum
from evacplan.generators import random_instance
from evacplan.network import EvacuationNetwork, Objective, ObjectiveKind
from evacplan.schedule import RouteSet
from evacplan.teg import build, outlier_count

OBJECTIVES = (Objective.average(), Objective.completion(), Objective.outlier(0.7))


@lru_cache(maxsize=None)
def corpus_seeds(count: int) -> tuple[int, ...]:
    """First ``count`` seeds whose random instance admits a confluent plan
    (decided by exhaustive routing enumeration)."""
    seeds = []
    s = 0
    while len(seeds) < count:
        net = random_instance(s)
        if brute_force_optimum(build(net)) is not None:
            seeds.append(s)
        s += 1
    return tuple(seeds)


@lru_cache(maxsize=None)
def infeasible_seeds(limit: int) -> tuple[int, ...]:
    return tuple(s for s in range(limit) if brute_force_optimum(build(random_instance(s))) is None)


def corpus(count: int, objective: Optional[Objective] = None) -> list[EvacuationNetwork]:
    return [random_instance(s, objective=objective) for s in corpus_seeds(count)]


def _compositions(total: int, times: list[int]):
    """Multisets of ``total`` departure times drawn from ``times``."""
    return itertools.combinations_with_replacement(times, total)


def brute_force_schedule(net: EvacuationNetwork, routes: RouteSet, objective: Objective) -> Optional[int]:
    """Minimum objective total over every integral departure assignment on
    fixed routes, checking capacities and deadlines edge copy by edge copy.
    Only usable on tiny instances."""
    H = net.horizon
    options = []
    for k in net.sources:
        d = net.demand(k)
        if d == 0:
            continue
        path = routes.path(k)
        hops = []
        offset = 0
        for u, v in zip(path, path[1:]):
            e = net.edge_map[(u, v)]
            hops.append((e, offset))
            offset += e.travel_time
        length = offset
        times = []
        for t in range(H + 1):
            if t + length > H:
                continue
            if all(e.admits_entry(t + off) for e, off in hops):
                times.append(t)
        options.append([(k, combo, hops, length) for combo in _compositions(d, times)])
    best = None
    for choice in itertools.product(*options):
        load: dict[tuple, int] = {}
        arrivals = []
        ok = True
        for k, combo, hops, length in choice:
            for t in combo:
                arrivals.append(t + length)
                for e, off in hops:
                    key = (e.key, t + off)
                    load[key] = load.get(key, 0) + 1
                    if load[key] > e.capacity:
                        ok = False
        if not ok:
            continue
        arrivals.sort()
        if objective.kind is ObjectiveKind.AVERAGE:
            value = sum(arrivals)
        elif objective.kind is ObjectiveKind.COMPLETION:
            value = max(arrivals, default=0)
        else:
            keep = len(arrivals) - outlier_count(len(arrivals), objective.fraction)
            value = sum(arrivals[:keep])
        if best is None or value < best:
            best = value
    return best
