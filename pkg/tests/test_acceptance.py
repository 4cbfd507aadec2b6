"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import time

import pytest

from evacplan import cli
from evacplan.exact import Status, brute_force_optimum, solve
from evacplan.flow import Infeasible
from evacplan.generators import congested_fixture, failure_fixture, random_instance, sample_network
from evacplan.hardness import build_two_path_gadget, load_fixture, measure_gap
from evacplan.lns import LnsParams, default_params, run
from evacplan.mip import solve_literal
from evacplan.network import Objective, ObjectiveKind
from evacplan.schedule import check_plan, evaluate_plan, plan_to_dict
from evacplan.sim import Perturbation, quartiles, simulate
from evacplan.teg import build

from helpers import OBJECTIVES, corpus_seeds, infeasible_seeds

CORPUS = 200
FRACTION = 0.7
pytestmark = pytest.mark.filterwarnings("ignore:horizon .* clipped")


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        assert ok, detail

    return emit


def _solved(seed, objective):
    return solve(build(random_instance(seed, objective=objective)))


def test_c1_sample_worked_example(verdict):
    start = time.perf_counter()
    avg = solve(build(sample_network()))
    ct = solve(build(sample_network(Objective.completion())))
    elapsed = time.perf_counter() - start
    plan = avg.best_plan
    m = evaluate_plan(sample_network(), plan)
    ok = (
        plan.routes.path("0") == ["0", "2", "A"]
        and plan.routes.path("1") == ["1", "2", "A"]
        and plan.schedule.departures == {("0", 1): 1, ("1", 0): 1}
        and m.average == 2.5
        and m.completion == 3
        and ct.best_value.value == 3
        and elapsed < 1
    )
    verdict(1, ok, f"routes 0-2-A, 1-2-A; departures t=1,t=0; average {m.average}, completion {ct.best_value.value}; {elapsed:.3f}s")


def test_c2_oracle_equivalence(verdict):
    start = time.perf_counter()
    mismatches = []
    for seed in corpus_seeds(CORPUS):
        net = random_instance(seed)
        assert len(net.nodes) <= 8 and len(net.sources) <= 3 and net.horizon <= 6
    for objective in OBJECTIVES:
        for seed in corpus_seeds(CORPUS):
            teg = build(random_instance(seed, objective=objective))
            oracle = brute_force_optimum(teg)
            report = solve(teg)
            if report.status is not Status.OPTIMAL or report.best_value.total != oracle[0].total:
                mismatches.append((objective.kind.value, seed))
    for seed in infeasible_seeds(max(corpus_seeds(CORPUS)) + 1):
        try:
            solve(build(random_instance(seed)))
            mismatches.append(("infeasible", seed))
        except Infeasible:
            pass
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 300
    verdict(2, ok, f"{CORPUS} instances x 3 objectives, {len(mismatches)} mismatches; {elapsed:.1f}s")


def test_c3_lns_soundness(verdict):
    start = time.perf_counter()
    bad_opt, bad_mono = [], []
    full = LnsParams(n=8, p=75, p_inc=5, threshold_gap=0)
    for objective in OBJECTIVES:
        for seed in corpus_seeds(CORPUS):
            net = random_instance(seed, objective=objective)
            opt = brute_force_optimum(build(net))[0].total
            _, report, trace = run(net, full)
            if trace.rows[-1].p != 100 or report.best_value.total != opt:
                bad_opt.append((objective.kind.value, seed))
            plan, _, trace = run(net, default_params(rng_seed=seed))
            objs = trace.objectives()
            try:
                check_plan(net, plan)
            except ValueError:
                bad_mono.append((objective.kind.value, seed))
            if any(b > a for a, b in zip(objs, objs[1:])):
                bad_mono.append((objective.kind.value, seed))
    elapsed = time.perf_counter() - start
    ok = not bad_opt and not bad_mono and elapsed < 600
    verdict(
        3, ok,
        f"p->100 optimum mismatches {len(bad_opt)}, default-param feasibility/monotonicity failures {len(bad_mono)}; {elapsed:.1f}s",
    )


def test_c4_variant_dominance(verdict):
    violations = []
    count = 0
    for seed in corpus_seeds(CORPUS):
        plans = {}
        for objective in (Objective.average(), Objective.completion(), Objective.outlier(FRACTION)):
            report = _solved(seed, objective)
            if report.status is not Status.OPTIMAL:
                break
            plans[objective.kind] = report.best_plan
        else:
            count += 1
            net = random_instance(seed)
            metrics = {k: evaluate_plan(net, p, FRACTION) for k, p in plans.items()}
            a, c, o = ObjectiveKind.AVERAGE, ObjectiveKind.COMPLETION, ObjectiveKind.OUTLIER
            if any(metrics[a].total > metrics[k].total for k in (c, o)):
                violations.append(("average", seed))
            if any(metrics[c].completion > metrics[k].completion for k in (a, o)):
                violations.append(("completion", seed))
            if any(metrics[o].outlier_total > metrics[k].outlier_total for k in (a, c)):
                violations.append(("outlier", seed))
    ok = not violations and count == CORPUS
    verdict(4, ok, f"{count} instances solved to optimality under all variants, {len(violations)} dominance violations")


def test_c5_completion_formulation_equivalence(verdict):
    start = time.perf_counter()
    mismatches = []
    for seed in corpus_seeds(CORPUS):
        teg = build(random_instance(seed, objective=Objective.completion()))
        searched = solve(teg).best_value.total
        oracle = brute_force_optimum(teg)[0].total
        literal = solve_literal(teg)
        if literal.status != "optimal" or round(literal.objective) != searched or searched != oracle:
            mismatches.append(seed)
    elapsed = time.perf_counter() - start
    verdict(
        5, not mismatches,
        f"monotone search vs big-M model (eps=0.001, M=sum d) vs enumeration on {CORPUS} instances, {len(mismatches)} mismatches; {elapsed:.1f}s",
    )


def test_c6_simulator_agreement(verdict):
    mismatches = []
    cohorts = 0
    for objective in OBJECTIVES:
        for seed in corpus_seeds(CORPUS):
            net = random_instance(seed, objective=objective)
            plan = _solved(seed, objective).best_plan
            res = simulate(net, plan)
            expected = {(k, t): {a} for a, k, t, _ in plan.arrival_list(net)}
            cohorts += len(expected)
            if res.cohort_arrivals() != expected or res.unsuccessful:
                mismatches.append((objective.kind.value, seed))
    verdict(6, not mismatches, f"{cohorts} cohorts over {CORPUS} instances x 3 plans, {len(mismatches)} disagreements")


def test_c7_perturbation_reproduction(verdict):
    net = congested_fixture()
    plan = solve(build(net)).best_plan
    base = quartiles(simulate(net, plan).arrived_times)["median"]
    normal = quartiles(simulate(net, plan, Perturbation("normal", sigma=0.5, seed=0)).arrived_times)["median"]
    uniform = quartiles(simulate(net, plan, Perturbation("uniform", seed=0)).arrived_times)["median"]
    ok = abs(normal - base) <= 1 and uniform > base
    verdict(7, ok, f"medians: compliant {base:g}, normal(0.5) {normal:g}, uniform(0, completion) {uniform:g}")


def test_c8_failure_ordering(verdict):
    net, bridge, fail_at = failure_fixture()
    failures = {bridge: fail_at}
    plans = {
        "original": solve(build(net)).best_plan,
        "avoid": solve(build(net.without_edge(*bridge))).best_plan,
        "deadline": solve(build(net.with_deadline(*bridge, fail_at))).best_plan,
    }
    res = {k: simulate(net, p, failures=failures) for k, p in plans.items()}
    ok = (
        res["original"].unsuccessful > 0
        and res["avoid"].unsuccessful == 0
        and res["deadline"].unsuccessful == 0
        and res["avoid"].total_evacuation_time > res["deadline"].total_evacuation_time
    )
    detail = ", ".join(f"{k}: stranded {r.unsuccessful}, total {r.total_evacuation_time}" for k, r in res.items())
    verdict(8, ok, detail)


def test_c9_hardness_gap(verdict):
    yes, no = load_fixture("yes1"), load_fixture("no1")
    ratios, slowest = [], 0.0
    for M in (2, 4, 6):
        t0 = time.perf_counter()
        gap = measure_gap(build_two_path_gadget(yes, M), build_two_path_gadget(no, M))
        slowest = max(slowest, time.perf_counter() - t0)
        ratios.append(gap.ratio)
    ok = all(r > 1 for r in ratios) and ratios[0] < ratios[1] < ratios[2] < 1.5 and slowest < 60
    verdict(9, ok, "ratios " + ", ".join(f"M={M}: {r:.4f}" for M, r in zip((2, 4, 6), ratios)) + f"; slowest pair {slowest:.2f}s")


def test_c10_determinism(verdict, tmp_path):
    instance = tmp_path / "congested.json"
    instance.write_text(cli.dumps_instance(congested_fixture()))
    for d in ("a", "b"):
        out = tmp_path / d
        cli.main(["solve", str(instance), "--out", str(out / "exact")])
        cli.main(["solve", str(instance), "--method", "lns", "--n", "5", "--seed", "3", "--out", str(out / "lns")])
        cli.main(["simulate", str(instance), str(out / "exact" / "plan.json"), "--perturb", "normal:1",
                  "--seed", "4", "--out", str(out / "sim")])
    names = [
        "exact/plan.json", "exact/report.json", "exact/manifest.json",
        "lns/plan.json", "lns/report.json", "lns/trace.csv",
        "sim/events.csv", "sim/sim.json", "sim/rate.csv",
    ]
    differ = [n for n in names if (tmp_path / "a" / n).read_bytes() != (tmp_path / "b" / n).read_bytes()]
    in_process = plan_to_dict(solve(build(congested_fixture())).best_plan) == plan_to_dict(
        solve(build(congested_fixture())).best_plan
    )
    ok = not differ and in_process
    verdict(10, ok, f"{len(names)} artifacts compared byte for byte, differing: {differ or 'none'}")
