"""Literal mixed-integer model on a TEG, solved with SciPy's HiGHS backend.

Binary x per static edge selects the confluent routing; continuous phi per TEG
edge carries flow.  The completion variant adds one binary y per sink edge
with the big-M / epsilon linking constraints and minimizes C >= t * y.
Supply enters source copies through explicit injection variables so that a
route passing through another source still conserves flow.

This is an alternative backend and a cross-check; the branch-and-bound in
:mod:`evacplan.exact` is the reference solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix

from .network import NodeKind, ObjectiveKind
from .schedule import RouteSet
from .teg import PLAIN, SINK, TimeExpandedGraph

EPSILON = 0.001


@dataclass
class MipResult:
    status: str  # "optimal" | "infeasible" | "time_limit" | "error"
    objective: Optional[float]
    routes: Optional[RouteSet]


class _Builder:
    def __init__(self):
        self.cost: list[float] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.integral: list[int] = []
        self.rows: list[dict[int, float]] = []
        self.row_lb: list[float] = []
        self.row_ub: list[float] = []

    def var(self, lb=0.0, ub=np.inf, cost=0.0, integer=False) -> int:
        self.cost.append(cost)
        self.lb.append(lb)
        self.ub.append(ub)
        self.integral.append(1 if integer else 0)
        return len(self.cost) - 1

    def row(self, coeffs: dict[int, float], lo: float, hi: float) -> None:
        self.rows.append(coeffs)
        self.row_lb.append(lo)
        self.row_ub.append(hi)

    def solve(self, time_limit: Optional[float]):
        n = len(self.cost)
        r, c, v = [], [], []
        for i, coeffs in enumerate(self.rows):
            for j, a in coeffs.items():
                r.append(i)
                c.append(j)
                v.append(a)
        A = coo_matrix((v, (r, c)), shape=(len(self.rows), n)).tocsr()
        options = {"mip_rel_gap": 0.0, "presolve": True}
        if time_limit is not None:
            options["time_limit"] = time_limit
        return milp(
            c=np.array(self.cost),
            constraints=LinearConstraint(A, np.array(self.row_lb), np.array(self.row_ub)),
            integrality=np.array(self.integral),
            bounds=Bounds(np.array(self.lb), np.array(self.ub)),
            options=options,
        )


def solve_literal(
    teg: TimeExpandedGraph,
    fixed_routes: Optional[RouteSet] = None,
    time_limit: Optional[float] = None,
    epsilon: float = EPSILON,
) -> MipResult:
    """Build and solve the literal model for ``teg``'s variant.

    The returned objective is the variant's minimized total: summed arrival
    timesteps (average / outlier) or the completion timestep.
    """
    net = teg.origin
    kind = teg.variant.kind
    big_m = float(max(net.total_demand, 1))
    b = _Builder()

    x = {e.key: b.var(0, 1, integer=True) for e in net.edges}
    if fixed_routes is not None:
        for key in fixed_routes.edges():
            b.lb[x[key]] = 1.0

    for k in net.sources:
        b.row({x[e.key]: 1.0 for e in net.out_edges[k]}, 1.0, 1.0)
    for i in net.transit_nodes:
        if net.out_edges[i]:
            b.row({x[e.key]: 1.0 for e in net.out_edges[i]}, -np.inf, 1.0)

    phi = {}
    for e in teg.edges:
        weight = float(e.cost) if kind is not ObjectiveKind.COMPLETION else 0.0
        ub = np.inf if e.capacity is None else float(e.capacity)
        phi[e] = b.var(0, ub, cost=weight)
        if e.base is not None:
            # phi <= x * c
            b.row({phi[e]: 1.0, x[e.base]: -float(e.capacity)}, -np.inf, 0.0)

    inject = {}
    for node in teg.nodes:
        if node.tag == PLAIN and net.kind(node.base) is NodeKind.SOURCE and net.demand(node.base) > 0:
            inject[node] = b.var(0, np.inf)
    for k in net.sources:
        d = net.demand(k)
        if d <= 0:
            continue
        copies = [inject[n] for n in teg.nodes if n in inject and n.base == k]
        if not copies:
            return MipResult("infeasible", None, None)
        b.row({j: 1.0 for j in copies}, float(d), float(d))

    for node in teg.nodes:
        if node.tag == SINK:
            continue
        coeffs: dict[int, float] = {}
        for e in teg.in_adj[node]:
            coeffs[phi[e]] = coeffs.get(phi[e], 0.0) + 1.0
        for e in teg.out_adj[node]:
            coeffs[phi[e]] = coeffs.get(phi[e], 0.0) - 1.0
        if node in inject:
            coeffs[inject[node]] = 1.0
        if coeffs:
            b.row(coeffs, 0.0, 0.0)

    if kind is ObjectiveKind.COMPLETION:
        completion = b.var(0, np.inf, cost=1.0)
        for e in teg.in_adj[teg.sink]:
            y = b.var(0, 1, integer=True)
            # phi >= eps - M(1 - y)  and  phi <= M y
            b.row({phi[e]: 1.0, y: -big_m}, epsilon - big_m, np.inf)
            b.row({phi[e]: 1.0, y: -big_m}, -np.inf, 0.0)
            b.row({completion: 1.0, y: -float(e.t_s)}, 0.0, np.inf)

    res = b.solve(time_limit)
    if res.status == 2:
        return MipResult("infeasible", None, None)
    if res.x is None:
        return MipResult("time_limit" if res.status == 1 else "error", None, None)
    sol = res.x
    succ = {}
    for key, j in x.items():
        if sol[j] > 0.5:
            succ[key[0]] = key[1]
    routes = _reachable_routes(net, succ)
    status = "optimal" if res.status == 0 else "time_limit"
    return MipResult(status, float(res.fun), routes)


def _reachable_routes(net, succ: dict[str, str]) -> RouteSet:
    keep = {}
    for k in net.sources:
        u = k
        while u in succ and u not in keep:
            keep[u] = succ[u]
            u = succ[u]
    return RouteSet(keep)
