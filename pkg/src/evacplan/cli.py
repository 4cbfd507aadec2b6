"""Command-line front end.

    evacplan generate sample -o sample.json
    evacplan solve sample.json --method exact --out runs/exact
    evacplan solve sample.json --method lns --seeds 1-10 --jobs 4 --out runs/lns
    evacplan simulate sample.json runs/exact/plan.json --fail 2-A@1 --out runs/fail
    evacplan report runs/exact runs/lns/seed-1 --format csv

Artifacts go to the output directory, progress to stderr.  Exit codes:
2 invalid input, 3 infeasible, 4 time limit reached without any plan.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import statistics
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from . import __version__, exact, generators, hardness, lns, mip, sim
from .flow import Infeasible
from .network import InstanceError, Objective, ObjectiveKind, dumps_instance, load_instance
from .schedule import PlanError, dumps_plan, evaluate_plan, check_plan, load_plan, plan_for_routes
from .teg import HorizonTooSmall, InfeasibleAfterPrune, build

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_NO_INCUMBENT = 4


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_duration(text: str) -> float:
    """Seconds from ``90``, ``90s``, ``5m`` or ``1h``."""
    t = text.strip().lower()
    scale = {"s": 1, "m": 60, "h": 3600}
    try:
        if t and t[-1] in scale:
            value = float(t[:-1]) * scale[t[-1]]
        else:
            value = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad duration {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("durations must be positive")
    return value


def parse_objective(text: str) -> Objective:
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    if name == "average":
        return Objective.average()
    if name == "completion":
        return Objective.completion()
    if name == "outlier":
        try:
            frac = float(arg) if arg else 0.9
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad outlier fraction in {text!r}") from None
        if not 0 < frac <= 1:
            raise argparse.ArgumentTypeError("outlier fraction must be in (0, 1]")
        return Objective.outlier(frac)
    raise argparse.ArgumentTypeError(f"unknown objective {text!r}")


def objective_text(obj: Objective) -> str:
    if obj.kind is ObjectiveKind.OUTLIER:
        return f"outlier:{obj.fraction:g}"
    return obj.kind.value


def parse_edge(text: str) -> tuple[str, str]:
    if "->" in text:
        tail, head = text.split("->", 1)
    else:
        parts = text.split("-")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"write edges as TAIL-HEAD or TAIL->HEAD, got {text!r}")
        tail, head = parts
    if not tail or not head:
        raise argparse.ArgumentTypeError(f"bad edge {text!r}")
    return tail, head


def parse_edge_at(text: str) -> tuple[tuple[str, str], int]:
    edge, sep, t = text.rpartition("@")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected TAIL-HEAD@T, got {text!r}")
    try:
        when = int(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad timestep in {text!r}") from None
    return parse_edge(edge), when


def parse_seeds(text: str) -> list[int]:
    """``3``, ``1,4,9`` or ``1-10``."""
    seeds: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part[1:]:
                lo, hi = part.split("-", 1) if not part.startswith("-") else part[1:].split("-", 1)
                seeds.extend(range(int(lo), int(hi) + 1))
            elif part:
                seeds.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    return seeds


# ---------------------------------------------------------------------------
# shared output helpers


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def write_manifest(out: Path, command: str, params: dict, inputs: dict) -> None:
    data = {
        "command": command,
        "version": __version__,
        "params": params,
        "inputs": {name: {"path": str(p), "sha256": _sha256(p)} for name, p in inputs.items()},
    }
    _write(out / "manifest.json", json.dumps(data, indent=2, sort_keys=True) + "\n")


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _json_safe(x):
    if isinstance(x, float) and (math.isinf(x) or math.isnan(x)):
        return None
    return x


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    obj = args.objective
    meta: dict = {"generator": args.kind}
    if args.kind == "sample":
        net = generators.sample_network(obj)
    elif args.kind == "random":
        net = generators.random_instance(args.seed, args.max_nodes, args.max_sources, args.max_horizon, obj)
        meta.update(seed=args.seed, max_nodes=args.max_nodes, max_sources=args.max_sources, max_horizon=args.max_horizon)
    elif args.kind == "grid":
        if args.rows < 1 or args.cols < 2 or args.sources < 1:
            raise UsageError("grid needs --rows >= 1, --cols >= 2 and --sources >= 1")
        net = generators.grid_instance(args.rows, args.cols, args.sources, args.seed, args.horizon, args.capacity)
        if obj is not None:
            net = net.with_objective(obj)
        meta.update(rows=args.rows, cols=args.cols, sources=args.sources, seed=args.seed, capacity=args.capacity)
    else:
        if args.M is None or args.M < 1:
            raise UsageError(f"{args.kind} needs --M >= 1")
        inst = hardness.load_fixture(args.fixture)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if args.kind == "two-path-gadget":
                if not isinstance(inst, hardness.TwoPathInstance):
                    raise UsageError(f"{args.fixture} is not a two-path fixture")
                net = hardness.build_two_path_gadget(inst, args.M, args.max_horizon)
                meta = hardness.two_path_metadata(inst, args.M, args.max_horizon)
            else:
                if not isinstance(inst, hardness.GridNdpInstance):
                    raise UsageError(f"{args.fixture} is not a grid fixture")
                net = hardness.build_grid_gadget(inst, args.M, args.max_horizon)
                meta = hardness.grid_metadata(inst, args.M, args.max_horizon)
        for w in caught:
            _log(f"warning: {w.message}")
        if obj is not None:
            net = net.with_objective(obj)
    if obj is not None:
        meta["objective"] = objective_text(obj)
    text = dumps_instance(net, meta)
    if args.output:
        _write(Path(args.output), text)
        _log(f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve


def _prepare_network(args):
    net = load_instance(args.instance)
    if args.objective is not None:
        net = net.with_objective(args.objective)
    for (tail, head), t in args.deadline or []:
        if (tail, head) not in net.edge_map:
            raise UsageError(f"--deadline names unknown edge {tail}-{head}")
        net = net.with_deadline(tail, head, t)
    for tail, head in args.avoid or []:
        if (tail, head) not in net.edge_map:
            raise UsageError(f"--avoid names unknown edge {tail}-{head}")
        net = net.without_edge(tail, head)
    if args.horizon is not None:
        net = net.with_horizon(args.horizon)
    return net


def _lns_params(args, seed: int) -> lns.LnsParams:
    overrides = {"rng_seed": seed}
    for name in ("n", "p", "p_inc", "threshold_gap", "horizon_shrink_threshold"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.accept_worse:
        overrides["accept_worse"] = True
    if args.inner_time_limit is not None:
        overrides["inner_time_limit"] = args.inner_time_limit
    return lns.PRESETS[args.preset](args.time_limit, **overrides)


def _solve_params(args, seed: int) -> dict:
    params = {
        "method": args.method,
        "seed": seed,
        "objective": None if args.objective is None else objective_text(args.objective),
        "deadline": [f"{a}-{b}@{t}" for (a, b), t in (args.deadline or [])],
        "avoid": [f"{a}-{b}" for a, b in (args.avoid or [])],
        "horizon": args.horizon,
        "time_limit": args.time_limit,
        "threshold_gap": args.threshold_gap,
        "workers": args.workers,
    }
    if args.method == "lns":
        p = _lns_params(args, seed)
        params["lns"] = {
            "preset": args.preset,
            "n": p.n,
            "p": p.p,
            "p_inc": p.p_inc,
            "threshold_gap": p.threshold_gap,
            "inner_time_limit": p.inner_time_limit,
            "horizon_shrink_threshold": p.horizon_shrink_threshold,
            "rng_seed": p.rng_seed,
            "accept_worse": p.accept_worse,
        }
    return params


def solve_once(args, seed: int, out: Path) -> int:
    net = _prepare_network(args)
    params = _solve_params(args, seed)
    method = args.method
    try:
        teg = build(net)
    except (HorizonTooSmall, InfeasibleAfterPrune) as exc:
        _log(f"infeasible: {exc}")
        write_manifest(out, "solve", params, {"instance": args.instance})
        return EXIT_INFEASIBLE
    trace_name, trace_text = None, None
    try:
        if method == "exact":
            limits = exact.Limits(time_limit=args.time_limit, threshold_gap=args.threshold_gap or 0.0)
            report = exact.solve(teg, limits=limits, workers=args.workers)
            trace_name, trace_text = "bounds.csv", report.trace_csv()
        elif method == "lns":
            _, report, trace = lns.run(net, _lns_params(args, seed), teg=teg, progress=sys.stderr)
            trace_name, trace_text = "trace.csv", trace.to_csv()
        else:
            result = mip.solve_literal(teg, time_limit=args.time_limit)
            if result.status == "infeasible":
                raise Infeasible("the mixed-integer model is infeasible")
            if result.routes is None:
                report = exact.SolveReport(None, None, math.inf, 0.0, math.inf, 0, exact.Status.TIME_LIMIT)
            else:
                plan, value = plan_for_routes(teg, result.routes)
                status = exact.Status.OPTIMAL if result.status == "optimal" else exact.Status.TIME_LIMIT
                low = value.value if status is exact.Status.OPTIMAL else 0.0
                report = exact.SolveReport(
                    plan, value, value.value, low, exact.relative_gap(value.value, low), 0, status
                )
    except Infeasible as exc:
        _log(f"infeasible: {exc}")
        write_manifest(out, "solve", params, {"instance": args.instance})
        _write(out / "report.json", json.dumps({"status": "infeasible", "method": method}, indent=2) + "\n")
        return EXIT_INFEASIBLE

    data = report.to_dict()
    data["method"] = method
    if report.best_plan is not None:
        m = evaluate_plan(net, report.best_plan)
        data["metrics"] = {
            "average": m.average,
            "completion": m.completion,
            "non_outlier_average": m.outlier_average,
            "non_outlier_fraction": m.fraction,
            "total": m.total,
            "evacuees": m.evacuees,
        }
        _write(out / "plan.json", dumps_plan(report.best_plan))
    _write(out / "report.json", json.dumps(data, indent=2) + "\n")
    if trace_name:
        _write(out / trace_name, trace_text)
    write_manifest(out, "solve", params, {"instance": args.instance})
    if report.best_plan is None:
        _log("time limit reached before any plan was found")
        return EXIT_NO_INCUMBENT
    _log(f"{method}: {report.best_value.kind.value} {report.best_value.value:g} [{report.status.value}] -> {out}")
    return EXIT_OK


def _fan_out(fn, args, seeds: list[int]) -> int:
    out = Path(args.out)
    targets = [(s, out if len(seeds) == 1 else out / f"seed-{s}") for s in seeds]
    if args.jobs > 1 and len(targets) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(fn, [args] * len(targets), [s for s, _ in targets], [d for _, d in targets]))
    else:
        codes = [fn(args, s, d) for s, d in targets]
    return max(codes)


def cmd_solve(args) -> int:
    seeds = args.seeds or [args.seed]
    return _fan_out(solve_once, args, seeds)


# ---------------------------------------------------------------------------
# simulate


def simulate_once(args, seed: int, out: Path) -> int:
    net = load_instance(args.instance)
    plan = load_plan(args.plan)
    check_plan(net, plan)
    pert = sim.Perturbation.parse(args.perturb, seed)
    failures = {edge: t for edge, t in (args.fail or [])}
    for tail, head in failures:
        if (tail, head) not in net.edge_map:
            raise UsageError(f"--fail names unknown edge {tail}-{head}")
    res = sim.simulate(net, plan, pert, failures, args.max_time)
    _write(out / "sim.json", res.to_json())
    _write(out / "events.csv", res.events_csv())
    _write(out / "rate.csv", res.rate_csv())
    params = {
        "seed": seed,
        "perturb": pert.describe(),
        "fail": [f"{a}-{b}@{t}" for (a, b), t in sorted(failures.items())],
        "max_time": args.max_time,
    }
    write_manifest(out, "simulate", params, {"instance": args.instance, "plan": args.plan})
    _log(
        f"simulated {len(res.agents)} agents: completion {res.completion}, "
        f"average {res.average:g}, unsuccessful {res.unsuccessful} -> {out}"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    seeds = args.seeds or [args.seed]
    return _fan_out(simulate_once, args, seeds)


# ---------------------------------------------------------------------------
# report


SOLVE_COLUMNS = ["run", "method", "seed", "objective_kind", "objective", "status", "gap",
                 "average", "completion", "non_outlier_average"]
SIM_COLUMNS = ["run", "perturb", "fail", "seed", "total_evacuation_time", "unsuccessful",
               "average", "completion", "min", "q1", "median", "q3", "max"]
SUMMARY_METRICS = ["average", "completion", "non_outlier_average"]


def _load_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _need(data: dict, key: str, path: Path):
    if key not in data:
        raise UsageError(f"{path}: missing field {key!r}")
    return data[key]


def collect_runs(dirs: list[str]) -> tuple[list[dict], list[dict], list[dict]]:
    solves, sims, curves = [], [], []
    for d in dirs:
        root = Path(d)
        mpath = root / "manifest.json"
        if not mpath.exists():
            raise UsageError(f"{root}: no manifest.json")
        manifest = _load_json(mpath)
        params = _need(manifest, "params", mpath)
        command = _need(manifest, "command", mpath)
        if command == "solve":
            rpath = root / "report.json"
            rep = _load_json(rpath)
            if _need(rep, "status", rpath) == "infeasible":
                solves.append({"run": str(root), "method": rep.get("method"), "seed": params.get("seed"),
                               "status": "infeasible", "instance": manifest["inputs"]["instance"]["sha256"]})
                continue
            metrics = _need(rep, "metrics", rpath) if rep.get("plan") is not None else {}
            solves.append({
                "run": str(root),
                "method": _need(rep, "method", rpath),
                "seed": params.get("seed"),
                "objective_kind": _need(rep, "objective_kind", rpath),
                "objective": _need(rep, "objective", rpath),
                "status": _need(rep, "status", rpath),
                "gap": rep.get("gap"),
                "average": metrics.get("average"),
                "completion": metrics.get("completion"),
                "non_outlier_average": metrics.get("non_outlier_average"),
                "instance": manifest["inputs"]["instance"]["sha256"],
            })
        elif command == "simulate":
            spath = root / "sim.json"
            res = _load_json(spath)
            q = res.get("quartiles") or {}
            sims.append({
                "run": str(root),
                "perturb": params.get("perturb"),
                "fail": ";".join(params.get("fail", [])),
                "seed": params.get("seed"),
                "total_evacuation_time": _need(res, "total_evacuation_time", spath),
                "unsuccessful": _need(res, "unsuccessful", spath),
                "average": _need(res, "average", spath),
                "completion": _need(res, "completion", spath),
                **{k: q.get(k) for k in ("min", "q1", "median", "q3", "max")},
            })
            rate = root / "rate.csv"
            if rate.exists():
                with rate.open(newline="", encoding="utf-8") as fh:
                    for row in csv.DictReader(fh):
                        curves.append({"run": str(root), "t": int(row["t"]),
                                       "cumulative_arrived": int(row["cumulative_arrived"])})
        else:
            raise UsageError(f"{mpath}: unknown command {command!r}")
    return solves, sims, curves


def summarize(solves: list[dict]) -> list[dict]:
    """Best / worst / mean / std per metric over runs of one method on one
    instance, for groups of at least two runs."""
    groups: dict[tuple, list[dict]] = {}
    for row in solves:
        if row.get("status") == "infeasible" or row.get("average") is None:
            continue
        groups.setdefault((row["instance"], row["method"]), []).append(row)
    out = []
    for (inst, method), rows in groups.items():
        if len(rows) < 2:
            continue
        entry = {"instance": inst[:12], "method": method, "runs": len(rows)}
        for metric in SUMMARY_METRICS:
            vals = [float(r[metric]) for r in rows]
            entry[f"{metric}_best"] = min(vals)
            entry[f"{metric}_worst"] = max(vals)
            entry[f"{metric}_mean"] = statistics.fmean(vals)
            entry[f"{metric}_std"] = statistics.stdev(vals)
        out.append(entry)
    return out


def _csv(rows: list[dict], columns: Optional[list[str]] = None) -> str:
    if not rows:
        return ""
    columns = columns or list(rows[0])
    buf = io.StringIO()
    w = csv.DictWriter(buf, columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
    return buf.getvalue()


def cmd_report(args) -> int:
    solves, sims, curves = collect_runs(args.runs)
    summary = summarize(solves)
    tables = {
        "solve": (solves, SOLVE_COLUMNS),
        "simulate": (sims, SIM_COLUMNS),
        "summary": (summary, None),
        "rate_curves": (curves, ["run", "t", "cumulative_arrived"]),
    }
    if args.format == "json":
        payload = {name: [{k: _json_safe(v) for k, v in r.items()} for r in rows] for name, (rows, _) in tables.items()}
        text = json.dumps(payload, indent=2) + "\n"
        if args.out:
            _write(Path(args.out) / "report.json", text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    if args.out:
        for name, (rows, cols) in tables.items():
            if rows:
                _write(Path(args.out) / f"{name}.csv", _csv(rows, cols))
        _log(f"wrote tables to {args.out}")
    else:
        parts = []
        for name, (rows, cols) in tables.items():
            if rows and name != "rate_curves":
                parts.append(f"# {name}\n" + _csv(rows, cols))
        sys.stdout.write("\n".join(parts))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evacplan",
        description="Confluent evacuation routing and scheduling",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("\n\n")[1],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write an instance file")
    g.add_argument("kind", choices=["sample", "random", "grid", "two-path-gadget", "grid-gadget"])
    g.add_argument("-o", "--output", help="output path (default: stdout)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--objective", type=parse_objective, help="average | completion | outlier:P")
    g.add_argument("--rows", type=int, default=4)
    g.add_argument("--cols", type=int, default=4)
    g.add_argument("--sources", type=int, default=3)
    g.add_argument("--capacity", type=int, default=2)
    g.add_argument("--horizon", type=int, help="grid horizon (default 2*(rows+cols))")
    g.add_argument("--max-nodes", type=int, default=8)
    g.add_argument("--max-sources", type=int, default=3)
    g.add_argument("--max-horizon", type=int, default=None,
                   help="random: horizon bound (default 6); gadgets: horizon clip (default 60)")
    g.add_argument("--fixture", default=None, help="gadget fixture name or path (yes1, no1, grid_yes1, ...)")
    g.add_argument("--M", type=int, default=None, help="gadget demand multiplier")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="compute a plan")
    s.add_argument("instance")
    s.add_argument("--method", choices=["exact", "lns", "mip"], default="exact")
    s.add_argument("--out", default="run", help="output directory (default: ./run)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--seeds", type=parse_seeds, help="several seeds, e.g. 1-10; one subdirectory each")
    s.add_argument("--jobs", type=int, default=1, help="parallel runs across seeds")
    s.add_argument("--workers", type=int, default=1, help="parallel workers inside one exact solve")
    s.add_argument("--objective", type=parse_objective)
    s.add_argument("--horizon", type=int)
    s.add_argument("--deadline", type=parse_edge_at, action="append", metavar="TAIL-HEAD@T",
                   help="last entry timestep for an edge (repeatable)")
    s.add_argument("--avoid", type=parse_edge, action="append", metavar="TAIL-HEAD",
                   help="remove an edge before solving (repeatable)")
    s.add_argument("--time-limit", type=parse_duration, help="wall time, e.g. 30s, 10m")
    s.add_argument("--threshold-gap", type=float)
    s.add_argument("--preset", choices=sorted(lns.PRESETS), default="default")
    s.add_argument("--n", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--p-inc", dest="p_inc", type=float)
    s.add_argument("--inner-time-limit", type=parse_duration)
    s.add_argument("--shrink-threshold", dest="horizon_shrink_threshold", type=int)
    s.add_argument("--accept-worse", action="store_true")
    s.set_defaults(func=cmd_solve)

    m = sub.add_parser("simulate", help="run a plan through the queue simulator")
    m.add_argument("instance")
    m.add_argument("plan")
    m.add_argument("--out", default="sim", help="output directory (default: ./sim)")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--seeds", type=parse_seeds)
    m.add_argument("--jobs", type=int, default=1)
    m.add_argument("--perturb", default="none", help="none | normal:SIGMA | uniform:LO,HI")
    m.add_argument("--fail", type=parse_edge_at, action="append", metavar="TAIL-HEAD@T",
                   help="edge admits no entries after T (repeatable)")
    m.add_argument("--max-time", type=int)
    m.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="tabulate solve and simulate runs")
    r.add_argument("runs", nargs="+", help="run directories")
    r.add_argument("--format", choices=["json", "csv"], default="csv")
    r.add_argument("--out", help="write tables into this directory instead of stdout")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "generate" and args.kind == "random" and args.max_horizon is None:
        args.max_horizon = 6
    if args.command == "generate" and args.kind.endswith("gadget"):
        if args.max_horizon is None:
            args.max_horizon = hardness.DEFAULT_MAX_HORIZON
        if args.fixture is None:
            args.fixture = "yes1" if args.kind == "two-path-gadget" else "grid_yes1"
    if args.command == "simulate":
        try:
            sim.Perturbation.parse(args.perturb)
        except ValueError as exc:
            parser.error(str(exc))
    if args.command == "solve" and args.threshold_gap is not None and not 0 <= args.threshold_gap < 1:
        parser.error("--threshold-gap must lie in [0, 1)")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (InstanceError, PlanError, hardness.FixtureError, hardness.NotASubgrid, ValueError) as exc:
        _log(f"error: {exc}")
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
