"""Reduction gadgets from disjoint-path problems, and gap measurement.

Two constructions are materialized as ordinary instances:

* the two-distinct-path gadget: sources s1, s2 with demands M and 2M feed
  x1, x2 through capacity-1 and capacity-2 edges, label-i edges get capacity
  i, and y1, y2 drain into one safe node t through capacity 1 and 2;
* the grid gadget for k node-disjoint paths on a subgrid: after normalizing
  every terminal into a pendant vertex, terminal edges of pair i get
  capacity i, all other edges capacity k, and source i holds M*i evacuees.

Certificates for YES fixtures are checked, never searched for.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .exact import Limits, SolveReport, solve
from .network import Edge, EvacuationNetwork, Node, NodeKind, Objective, validate
from .teg import build

DEFAULT_MAX_HORIZON = 60

Point = tuple[int, int]


class NotASubgrid(ValueError):
    pass


class FixtureError(ValueError):
    pass


def _horizon(M: int, n: int, max_horizon: Optional[int]) -> tuple[int, dict]:
    requested = M * M * n
    info = {"horizon_requested": requested, "horizon_clipped": False}
    if max_horizon is not None and requested > max_horizon:
        warnings.warn(f"horizon {requested} clipped to {max_horizon}", stacklevel=3)
        info["horizon_clipped"] = True
        return max_horizon, info
    return requested, info


# ---------------------------------------------------------------------------
# two distinct paths


@dataclass(frozen=True)
class TwoPathInstance:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, int], ...]  # (tail, head, label)
    known_yes: bool
    certificate: Optional[tuple[tuple[str, ...], tuple[str, ...]]] = None
    name: str = ""
    sources: tuple[str, str] = ("x1", "x2")
    sinks: tuple[str, str] = ("y1", "y2")

    def __post_init__(self):
        names = set(self.nodes)
        for u, v, label in self.edges:
            if label not in (1, 2):
                raise FixtureError(f"edge {u}->{v} has label {label}; labels are 1 or 2")
            if u not in names or v not in names:
                raise FixtureError(f"edge {u}->{v} uses an unknown node")
        for x in self.sources + self.sinks:
            if x not in names:
                raise FixtureError(f"terminal {x} missing")
        if self.known_yes:
            if self.certificate is None:
                raise FixtureError("a YES instance needs certificate paths")
            check_two_path_certificate(self)


def check_two_path_certificate(inst: TwoPathInstance) -> None:
    """P1 from x1 to y1, P2 from x2 to y2, edge-disjoint, P2 on label-2 edges."""
    labels = {(u, v): lab for u, v, lab in inst.edges}
    used: set[tuple[str, str]] = set()
    for i, path in enumerate(inst.certificate or ()):
        if path[0] != inst.sources[i] or path[-1] != inst.sinks[i]:
            raise FixtureError(f"certificate path {i + 1} has wrong endpoints")
        for u, v in zip(path, path[1:]):
            if (u, v) not in labels:
                raise FixtureError(f"certificate uses missing edge {u}->{v}")
            if i == 1 and labels[(u, v)] != 2:
                raise FixtureError(f"second path uses label-1 edge {u}->{v}")
            if (u, v) in used:
                raise FixtureError(f"certificate paths share edge {u}->{v}")
            used.add((u, v))


def build_two_path_gadget(
    inst: TwoPathInstance, M: int, max_horizon: Optional[int] = DEFAULT_MAX_HORIZON
) -> EvacuationNetwork:
    if M < 1:
        raise ValueError("M must be at least 1")
    x1, x2 = inst.sources
    y1, y2 = inst.sinks
    taken = set(inst.nodes)
    s1, s2, t = (_fresh(name, taken) for name in ("s1", "s2", "t"))
    nodes = [Node(s1, NodeKind.SOURCE, M), Node(s2, NodeKind.SOURCE, 2 * M)]
    nodes += [Node(v, NodeKind.TRANSIT) for v in inst.nodes]
    nodes.append(Node(t, NodeKind.SAFE))
    edges = [Edge(s1, x1, 1, 1), Edge(s2, x2, 1, 2)]
    edges += [Edge(u, v, 1, label) for u, v, label in inst.edges]
    edges += [Edge(y1, t, 1, 1), Edge(y2, t, 1, 2)]
    H, _ = _horizon(M, len(inst.nodes), max_horizon)
    return EvacuationNetwork(tuple(nodes), tuple(edges), H, Objective.average())


def two_path_metadata(inst: TwoPathInstance, M: int, max_horizon: Optional[int] = DEFAULT_MAX_HORIZON) -> dict:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, info = _horizon(M, len(inst.nodes), max_horizon)
    return {"gadget": "two-path", "fixture": inst.name, "M": M, "known": "yes" if inst.known_yes else "no", **info}


def _fresh(name: str, taken: set[str]) -> str:
    cand = name
    while cand in taken:
        cand = "_" + cand
    taken.add(cand)
    return cand


# ---------------------------------------------------------------------------
# k node-disjoint paths on a grid


def _edge(a: Point, b: Point) -> frozenset:
    return frozenset((a, b))


@dataclass(frozen=True)
class GridNdpInstance:
    rows: int
    cols: int
    vertices: frozenset  # of (x, y)
    edges: frozenset  # of frozenset({p, q})
    pairs: tuple[tuple[Point, Point], ...]  # (s_i, t_i), i = 1..k
    known_yes: bool
    certificate: Optional[tuple[tuple[Point, ...], ...]] = None
    name: str = ""
    routing_count: Optional[int] = None

    def __post_init__(self):
        check_subgrid(self.vertices, self.edges)
        terminals = [p for pair in self.pairs for p in pair]
        if len(set(terminals)) != len(terminals):
            raise FixtureError("terminals must be distinct vertices")
        for p in terminals:
            if p not in self.vertices:
                raise FixtureError(f"terminal {p} is not a vertex")
        if self.known_yes:
            if self.certificate is None:
                raise FixtureError("a YES instance needs certificate paths")
            check_grid_certificate(self)

    @property
    def k(self) -> int:
        return len(self.pairs)

    def degree(self, p: Point) -> int:
        return sum(1 for e in self.edges if p in e)

    def on_boundary(self, p: Point) -> bool:
        x, y = p
        return x in (0, self.cols - 1) or y in (0, self.rows - 1)


def check_subgrid(vertices, edges) -> None:
    for e in edges:
        a, b = tuple(e)
        if a not in vertices or b not in vertices:
            raise NotASubgrid(f"edge {a}-{b} leaves the vertex set")
        if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
            raise NotASubgrid(f"edge {a}-{b} is not a unit grid edge")


def check_grid_certificate(inst: GridNdpInstance) -> None:
    seen: set[Point] = set()
    for (s, t), path in zip(inst.pairs, inst.certificate or ()):
        if path[0] != s or path[-1] != t:
            raise FixtureError("certificate path has wrong endpoints")
        for a, b in zip(path, path[1:]):
            if _edge(a, b) not in inst.edges:
                raise FixtureError(f"certificate uses missing edge {a}-{b}")
        for p in path:
            if p in seen:
                raise FixtureError(f"certificate paths share vertex {p}")
            seen.add(p)
    if len(inst.certificate or ()) != inst.k:
        raise FixtureError("certificate needs one path per pair")


def swap_terminals(inst: GridNdpInstance) -> GridNdpInstance:
    """Exchange sources and sinks when that puts every sink on the outer
    boundary and the current assignment does not."""
    if all(inst.on_boundary(t) for _, t in inst.pairs):
        return inst
    if not all(inst.on_boundary(s) for s, _ in inst.pairs):
        raise NotASubgrid("neither terminal side lies on the outer boundary")
    cert = None if inst.certificate is None else tuple(tuple(reversed(p)) for p in inst.certificate)
    return GridNdpInstance(
        inst.rows, inst.cols, inst.vertices, inst.edges,
        tuple((t, s) for s, t in inst.pairs), inst.known_yes, cert, inst.name, inst.routing_count,
    )


def is_normalized(inst: GridNdpInstance) -> bool:
    return all(inst.degree(p) == 1 for pair in inst.pairs for p in pair)


def normalize(inst: GridNdpInstance) -> GridNdpInstance:
    """Make every terminal a pendant vertex while staying inside a grid.

    Every edge is subdivided (coordinates doubled), each terminal moves to an
    adjacent subdivision vertex, and a new leaf is hung off that vertex at a
    free grid point; the terminal moves onto the leaf.  Certificates are
    carried along.  Already-normalized input is returned unchanged.
    """
    if is_normalized(inst):
        return inst
    verts = {(2 * x, 2 * y) for x, y in inst.vertices}
    edges: set[frozenset] = set()
    for e in inst.edges:
        a, b = sorted(e)
        mid = (a[0] + b[0], a[1] + b[1])
        A, B = (2 * a[0], 2 * a[1]), (2 * b[0], 2 * b[1])
        verts.add(mid)
        edges.add(_edge(A, mid))
        edges.add(_edge(mid, B))

    def neighbours(p: Point) -> list[Point]:
        x, y = p
        return [(x + dx, y + dy) for dx, dy in ((1, 0), (0, 1), (-1, 0), (0, -1))]

    moved: dict[Point, tuple[Point, Point]] = {}  # terminal -> (subdivision vertex, leaf)
    for pair in inst.pairs:
        for p in pair:
            P = (2 * p[0], 2 * p[1])
            placed = None
            for mid in sorted(q for q in neighbours(P) if _edge(P, q) in edges):
                free = [q for q in neighbours(mid) if q not in verts]
                if free:
                    inside = [q for q in free if 0 <= q[0] <= 2 * (inst.cols - 1) and 0 <= q[1] <= 2 * (inst.rows - 1)]
                    placed = (mid, sorted(inside or free)[0])
                    break
            if placed is None:
                raise NotASubgrid(f"no free grid point for a pendant next to terminal {p}")
            mid, leaf = placed
            verts.add(leaf)
            edges.add(_edge(mid, leaf))
            moved[p] = placed

    # shift so that coordinates are non-negative
    dx = -min(x for x, _ in verts)
    dy = -min(y for _, y in verts)

    def sh(p: Point) -> Point:
        return (p[0] + dx, p[1] + dy)

    verts2 = frozenset(sh(p) for p in verts)
    edges2 = frozenset(frozenset(sh(p) for p in e) for e in edges)
    pairs = tuple((sh(moved[s][1]), sh(moved[t][1])) for s, t in inst.pairs)
    cert = None
    if inst.certificate is not None:
        cert = tuple(_lift_path(path, moved, sh) for path in inst.certificate)
    width = max(x for x, _ in verts2) + 1
    height = max(y for _, y in verts2) + 1
    return GridNdpInstance(height, width, verts2, edges2, pairs, inst.known_yes, cert, inst.name, inst.routing_count)


def _lift_path(path, moved, sh) -> tuple[Point, ...]:
    """Map a path through the subdivision, starting and ending on the leaves."""
    pts: list[Point] = []
    for a, b in zip(path, path[1:]):
        A = (2 * a[0], 2 * a[1])
        pts.append(A)
        pts.append((a[0] + b[0], a[1] + b[1]))
    pts.append((2 * path[-1][0], 2 * path[-1][1]))
    s_mid, s_leaf = moved[path[0]]
    t_mid, t_leaf = moved[path[-1]]
    # enter through the source's subdivision vertex
    if pts[1] == s_mid:
        pts = pts[1:]
    else:
        pts.insert(0, s_mid)
    if pts[-2] == t_mid:
        pts = pts[:-1]
    else:
        pts.append(t_mid)
    return tuple(sh(p) for p in [s_leaf] + pts + [t_leaf])


def grid_node_name(p: Point) -> str:
    return f"g{p[0]}_{p[1]}"


def build_grid_gadget(
    inst: GridNdpInstance, M: int, max_horizon: Optional[int] = DEFAULT_MAX_HORIZON
) -> EvacuationNetwork:
    if M < 1:
        raise ValueError("M must be at least 1")
    g = normalize(swap_terminals(inst))
    k = g.k
    source_of = {s: i + 1 for i, (s, _) in enumerate(g.pairs)}
    sink_of = {t: i + 1 for i, (_, t) in enumerate(g.pairs)}
    nodes = []
    for p in sorted(g.vertices, key=lambda q: (q[1], q[0])):
        if p in source_of:
            nodes.append(Node(grid_node_name(p), NodeKind.SOURCE, M * source_of[p]))
        elif p in sink_of:
            nodes.append(Node(grid_node_name(p), NodeKind.SAFE))
        else:
            nodes.append(Node(grid_node_name(p), NodeKind.TRANSIT))
    edges = []
    for e in sorted(g.edges, key=lambda e: sorted((q[1], q[0]) for q in e)):
        a, b = sorted(e, key=lambda q: (q[1], q[0]))
        label = source_of.get(a) or source_of.get(b) or sink_of.get(a) or sink_of.get(b)
        cap = label if label else k
        for u, v in ((a, b), (b, a)):
            if u in sink_of or v in source_of:
                continue
            edges.append(Edge(grid_node_name(u), grid_node_name(v), 1, cap))
    H, _ = _horizon(M, len(g.vertices), max_horizon)
    net = EvacuationNetwork(tuple(nodes), tuple(edges), H, Objective.average())
    problems = validate(net)
    if problems:
        raise NotASubgrid("; ".join(problems))
    return net


def grid_metadata(inst: GridNdpInstance, M: int, max_horizon: Optional[int] = DEFAULT_MAX_HORIZON) -> dict:
    g = normalize(swap_terminals(inst))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, info = _horizon(M, len(g.vertices), max_horizon)
    meta = {
        "gadget": "grid",
        "fixture": inst.name,
        "M": M,
        "k": g.k,
        "known": "yes" if inst.known_yes else "no",
        "M_relaxed": M < len(g.vertices) ** 3,
        **info,
    }
    if inst.routing_count is not None:
        meta["routing_count"] = inst.routing_count
    return meta


# ---------------------------------------------------------------------------
# fixtures and measurement


def _parse(data: dict):
    kind = data.get("kind")
    known = data.get("known")
    if known not in ("yes", "no"):
        raise FixtureError("fixture field 'known' must be 'yes' or 'no'")
    if kind == "two_path":
        cert = data.get("certificate")
        return TwoPathInstance(
            tuple(data["nodes"]),
            tuple((e["tail"], e["head"], int(e["label"])) for e in data["edges"]),
            known == "yes",
            None if cert is None else tuple(tuple(p) for p in cert),
            data.get("name", ""),
        )
    if kind == "grid_ndp":
        pt = lambda q: (int(q[0]), int(q[1]))  # noqa: E731
        cert = data.get("certificate")
        return GridNdpInstance(
            int(data["rows"]),
            int(data["cols"]),
            frozenset(pt(q) for q in data["vertices"]),
            frozenset(_edge(pt(a), pt(b)) for a, b in data["edges"]),
            tuple((pt(s), pt(t)) for s, t in data["pairs"]),
            known == "yes",
            None if cert is None else tuple(tuple(pt(q) for q in p) for p in cert),
            data.get("name", ""),
            data.get("routing_count"),
        )
    raise FixtureError(f"unknown fixture kind {kind!r}")


FIXTURES = {
    "yes1": "two_path_yes1.json",
    "no1": "two_path_no1.json",
    "grid_yes1": "grid_yes1.json",
    "grid_no1": "grid_no1.json",
    "grid_tiny": "grid_tiny.json",
}


def load_fixture(name_or_path: str):
    """A shipped fixture by short name, or a fixture file by path."""
    if name_or_path in FIXTURES:
        text = resources.files("evacplan").joinpath("fixtures", FIXTURES[name_or_path]).read_text(encoding="utf-8")
    else:
        text = Path(name_or_path).read_text(encoding="utf-8")
    return _parse(json.loads(text))


@dataclass
class GapMeasurement:
    ratio: float
    yes: SolveReport
    no: SolveReport


def measure_gap(net_yes: EvacuationNetwork, net_no: EvacuationNetwork, time_limit: Optional[float] = None) -> GapMeasurement:
    """OPT(no) / OPT(yes) for the instances' own objectives."""
    limits = Limits(time_limit=time_limit)
    ry = solve(build(net_yes), limits=limits)
    rn = solve(build(net_no), limits=limits)
    return GapMeasurement(rn.best_value.value / ry.best_value.value, ry, rn)
