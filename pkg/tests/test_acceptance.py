"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is
printed in the terminal summary (and by running this file directly)."""

import contextlib
import json
import time

import numpy as np
import pytest

from boa import cli, harness, offline
from boa.cost import NYC_BBOX, CostMetric, region_c_max
from boa.genbench import (SyntheticConfig, gen_small, gen_synthetic, order_adversary,
                          order_random)
from boa.offline import brute_force_solve, budget_ssp_optimal, build_flow_network
from boa.online import (ArrivalStream, FixedThreshold, Unbounded, extract_ot_threshold,
                        greedy_rt_expectation, greedy_rt_runs, kappa_support, ot_lower_bound,
                        rt_lower_bound, run_online)
from boa.toy import GREEDY_PAIRS, OPT_PAIRS, OT_PAIRS, toy_instance

from .paths import DATA

RESULTS: dict[int, tuple[bool, str]] = {}
N_SMALL = 500


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@contextlib.contextmanager
def recording_flows():
    """Collect augmentation-cost sequences of every solver call in the block."""
    seen = []
    inner = offline.min_cost_max_flow

    def wrapped(net, budget=None):
        res = inner(net, budget)
        seen.append(res.augmentation_costs)
        return res

    offline.min_cost_max_flow = wrapped
    try:
        yield seen
    finally:
        offline.min_cost_max_flow = inner


def non_decreasing(seq) -> bool:
    return all(b >= a for a, b in zip(seq, seq[1:]))


# Flow sequences from criteria 1 and 2, checked again by criterion 3.
FLOWS: list[list[int]] = []


def _small_instances():
    rng = np.random.default_rng(0)
    return [gen_small(rng, 6) for _ in range(N_SMALL)]


@pytest.fixture(scope="module")
def small_results():
    """Exact, brute-force and online outcomes on the seeded small set."""
    t0 = time.perf_counter()
    out = []
    with recording_flows() as seen:
        for inst in _small_instances():
            stream = ArrivalStream.from_workers(inst.workers)
            exact = budget_ssp_optimal(inst)
            bf = brute_force_solve(inst)
            exp = greedy_rt_expectation(stream, inst.batch, inst.metric, inst.c_max)
            ot = None
            if bf.n_optima == 1 and exact.size > 0:
                tau = extract_ot_threshold(exact)
                ot = run_online(stream, inst.batch, inst.metric, FixedThreshold(tau)).size
            out.append((inst, exact, bf, exp, ot))
    FLOWS.extend(seen)
    return out, time.perf_counter() - t0


def test_criterion_01_toy_reproduction():
    t0 = time.perf_counter()
    with recording_flows() as seen:
        inst = toy_instance()
        stream = ArrivalStream.from_workers(inst.workers)
        opt = budget_ssp_optimal(inst)
        alg1 = offline.algorithm1_optimal(inst)
    FLOWS.extend(seen)
    greedy = run_online(stream, inst.batch, inst.metric, Unbounded()).matching
    runs = greedy_rt_runs(stream, inst.batch, inst.metric, inst.c_max)
    sizes = {r.kappa: r.size for r in runs}
    exp = greedy_rt_expectation(stream, inst.batch, inst.metric, inst.c_max)
    ot = run_online(stream, inst.batch, inst.metric, FixedThreshold(5)).matching
    secs = time.perf_counter() - t0
    checks = {
        "opt 4/9": (opt.size, opt.total_cost, opt.as_set()) == (4, 9, OPT_PAIRS)
                   and (alg1.size, alg1.total_cost) == (4, 9),
        "greedy 2/10": (greedy.size, greedy.total_cost, greedy.as_set()) == (2, 10, GREEDY_PAIRS),
        "rt sizes 2/3/2/2": sizes == {0: 2, 1: 3, 2: 2, 3: 2},
        "rt expectation 2.5": exp == 2.5,
        "ot 4/10": (ot.size, ot.total_cost, ot.as_set()) == (4, 10, OT_PAIRS),
        "under 1 s": secs < 1.0,
    }
    failed = [k for k, ok in checks.items() if not ok]
    record(1, not failed, f"failed={failed} expectation={exp} rt_sizes={sizes} ({secs:.2f}s)")


def test_criterion_02_oracle_equivalence(small_results):
    results, secs = small_results
    bad = [i for i, (_, exact, bf, _, _) in enumerate(results) if exact.size != bf.matching.size]
    record(2, not bad and len(results) >= 500 and secs < 60,
           f"{len(results)} instances, {len(bad)} mismatches ({secs:.1f}s, includes online runs)")


def test_criterion_03_ssp_convexity(small_results):
    with recording_flows() as seen:
        for seed in range(50):
            inst = gen_synthetic(SyntheticConfig(200, 200, 100, 60, seed=seed))
            offline.min_cost_max_flow(build_flow_network(inst))
            budget_ssp_optimal(inst)
    calls = FLOWS + seen
    bad = sum(not non_decreasing(s) for s in calls)
    record(3, bad == 0 and len(seen) == 100 and len(FLOWS) > N_SMALL,
           f"{len(calls)} solver calls, {bad} violations")


def test_criterion_04_rt_bound(small_results):
    results = small_results[0]
    bad = [i for i, (inst, exact, _, exp, _) in enumerate(results)
           if exp < rt_lower_bound(exact.size, inst.c_max) - 1e-9]
    record(4, not bad, f"{len(results)} instances, {len(bad)} violations")


def test_criterion_05_ot_bound(small_results):
    checked = [(i, ot, ot_lower_bound(exact.costs())) for i, (_, exact, _, _, ot)
               in enumerate(small_results[0]) if ot is not None]
    bad = [c for c in checked if c[1] < c[2]]
    record(5, not bad, f"{len(checked)} unique-optimum instances, {len(bad)} violations")


def test_criterion_06_fig5_ordering():
    t0 = time.perf_counter()
    spec = harness.SweepSpec(SyntheticConfig(1500, 1500, 750, 60, seed=0), "budget", [750],
                             "adversary", 20, ("opt-exact", "greedy", "greedy-rt-exp", "greedy-ot"))
    rows = {r.algorithm: r.mean_size for r in harness.run_sweep(spec)}
    secs = time.perf_counter() - t0
    opt, ot, rt, gr = (rows[a] for a in ("opt-exact", "greedy-ot", "greedy-rt-exp", "greedy"))
    ok = ot >= rt >= gr and max(ot, rt, gr) <= opt and ot >= 1.1 * gr and secs < 300
    record(6, ok, f"opt={opt:.2f} ot={ot:.2f} rt-exp={rt:.2f} greedy={gr:.2f} ({secs:.0f}s)")


def test_criterion_07_adversary_hurts_greedy():
    adv, rnd = [], []
    for seed in range(20):
        inst = gen_synthetic(SyntheticConfig(seed=seed))
        adv.append(run_online(order_adversary(inst), inst.batch, inst.metric, Unbounded()).size)
        rnd.append(run_online(order_random(inst), inst.batch, inst.metric, Unbounded()).size)
    record(7, np.mean(adv) <= np.mean(rnd),
           f"mean greedy adversary={np.mean(adv):.2f} random={np.mean(rnd):.2f} over 20 seeds")


def test_criterion_08_kappa_support():
    a, b = list(kappa_support(16)), list(kappa_support(1000))
    record(8, a == [0, 1, 2, 3] and b == list(range(8)), f"support(16)={a} |support(1000)|={len(b)}")


def test_criterion_09_geo_diagonal():
    d = region_c_max(NYC_BBOX, CostMetric.EUCLIDEAN)
    record(9, abs(d - 41.7027) <= 0.02 * 41.7027, f"diagonal {d:.4f} km")


def test_criterion_10_real_pipeline_golden(tmp_path):
    fx = DATA / "pickups_50.csv"
    row = harness.run_real(fx, fx, NYC_BBOX, task_seed=7, budget=30, n_tasks=60)
    out = tmp_path / "real.csv"
    harness.write_real_csv(row, out)
    golden = out.read_bytes() == (DATA / "real_golden.csv").read_bytes()
    ok = golden and row.sizes["greedy-ot"] >= row.sizes["greedy"]
    record(10, ok, f"golden={'match' if golden else 'DIFFERS'} sizes={row.sizes}")


def _cli_runs(d):
    """(argv, outputs) for every subcommand; paths relative to ``d``."""
    cfg = d / "cfg.json"
    cfg.write_text(json.dumps(SyntheticConfig(150, 150, 75, 60, seed=1).to_dict()))
    spec = d / "spec.json"
    spec.write_text(json.dumps(harness.SweepSpec(
        SyntheticConfig(100, 100, 50, 60), "n_workers", [50, 100], "random", 2,
        harness.ALGORITHMS).to_dict()))
    fx = str(DATA / "pickups_50.csv")
    runs = [(["gen", "--config", str(cfg), "--out", str(d / "inst.json")], ["inst.json"]),
            (["gen", "--config", str(cfg), "--seed", "9", "--out", str(d / "hist.json")], ["hist.json"])]
    for algo in harness.ALGORITHMS:
        for order in harness.ARRIVAL_MODELS:
            name = f"{algo}-{order}.json"
            argv = ["run", "--instance", str(d / "inst.json"), "--algo", algo, "--order", order,
                    "--seed", "3", "--ot-history", str(d / "hist.json"), "--out", str(d / name)]
            runs.append((argv, [name]))
    runs += [
        (["sweep", "--spec", str(spec), "--out", str(d / "sweep.csv")], ["sweep.csv", "sweep.csv.spec.json"]),
        (["oracle-check", "--trials", "30", "--seed", "2", "--toy", "--out", str(d / "oracle.json")], ["oracle.json"]),
        (["ingest", "--csv", fx, "--out", str(d / "workers.json")], ["workers.json"]),
        (["real", "--pickups", fx, "--history", fx, "--budget", "30", "--tasks", "60", "--seed", "7",
          "--out", str(d / "real.csv")], ["real.csv"]),
    ]
    return runs


def test_criterion_11_cli_determinism(tmp_path):
    outputs = []
    for rep in ("a", "b"):
        d = tmp_path / rep
        d.mkdir()
        files = {}
        for argv, names in _cli_runs(d):
            code = cli.main(argv)
            assert code == 0, f"{argv[0]} exited {code}"
            files.update({n: (d / n).read_bytes() for n in names})
        outputs.append(files)
    a, b = outputs
    differ = sorted(n for n in a if a[n] != b[n])
    record(11, not differ, f"{len(a)} output files, differing: {differ}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
