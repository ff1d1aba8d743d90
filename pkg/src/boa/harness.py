"""Experiment drivers: parameter sweeps, oracle cross-checks, the pickup-trace table."""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .cost import CostMetric, GeoBoundingBox, region_c_max
from .genbench import (REAL_VELOCITY, SyntheticConfig, gen_real_tasks, gen_small, gen_synthetic,
                       ingest_pickups_csv, instance_to_dict, order_adversary, order_random)
from .model import Instance, Matching, validate_matching
from .offline import algorithm1_optimal, brute_force_solve, budget_ssp_optimal
from .online import (ArrivalStream, EmptyHistoryError, FixedThreshold, RandomExp, Unbounded,
                     extract_ot_threshold, greedy_rt_runs, ot_lower_bound, rt_lower_bound,
                     run_online)

log = logging.getLogger(__name__)

ALGORITHMS = ("opt-alg1", "opt-exact", "greedy", "greedy-rt", "greedy-rt-exp", "greedy-ot")
SWEEPABLE = ("n_workers", "n_tasks", "budget", "deadline_window")
ARRIVAL_MODELS = ("adversary", "random")
# Offset between a target instance seed and its "historical" sibling.
HISTORY_SEED_OFFSET = 1_000_003


class ValidationFailure(AssertionError):
    """An algorithm produced a matching that violates the instance constraints."""


def derived_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, stream]).generate_state(1)[0])


def arrival_stream(inst: Instance, model: str) -> ArrivalStream:
    if model == "adversary":
        return order_adversary(inst)
    if model == "random":
        return order_random(inst)
    raise ValueError(f"unknown arrival model {model!r}")


def check_valid(m: Matching, inst: Instance, label: str) -> None:
    problems = validate_matching(m, inst)
    if problems:
        raise ValidationFailure(f"{label}: {problems}")


@dataclass
class Outcome:
    """One algorithm on one instance."""

    algorithm: str
    size: float
    used_budget: float
    seconds: float
    error: str | None = None
    extra: dict = field(default_factory=dict)


def run_algorithms(inst: Instance, model: str, algorithms: Sequence[str], seed: int,
                   history: Instance | None = None, tau: float | None = None) -> list[Outcome]:
    """Run the selected algorithms on one instance under one arrival model.

    The offline optima are computed on the instance as seen by the stream
    (adversary ordering reassigns arrival times). Greedy-OT takes its
    threshold from ``tau`` if given, else from the exact optimum of
    ``history`` under the same arrival model.
    """
    stream = arrival_stream(inst, model)
    inst = inst.with_workers(stream.workers)
    out = []
    for algo in algorithms:
        t0 = time.perf_counter()
        extra: dict = {}
        try:
            if algo == "opt-alg1":
                m = algorithm1_optimal(inst)
            elif algo == "opt-exact":
                m = budget_ssp_optimal(inst)
            elif algo == "greedy":
                m = run_online(stream, inst.batch, inst.metric, Unbounded()).matching
            elif algo == "greedy-rt":
                trace = run_online(stream, inst.batch, inst.metric,
                                   RandomExp(inst.c_max, derived_seed(seed, 1)))
                m = trace.matching
                extra["kappa"] = trace.kappa
            elif algo == "greedy-rt-exp":
                runs = greedy_rt_runs(stream, inst.batch, inst.metric, inst.c_max)
                for r in runs:
                    check_valid(r.matching, inst, f"{algo} kappa={r.kappa}")
                secs = time.perf_counter() - t0
                extra["sizes"] = [r.size for r in runs]
                out.append(Outcome(algo, sum(r.size for r in runs) / len(runs),
                                   sum(r.matching.total_cost for r in runs) / len(runs), secs,
                                   extra=extra))
                continue
            elif algo == "greedy-ot":
                if tau is None:
                    if history is None:
                        raise ValueError("greedy-ot needs a historical instance or a threshold")
                    h_stream = arrival_stream(history, model)
                    tau = extract_ot_threshold(budget_ssp_optimal(history.with_workers(h_stream.workers)))
                extra["tau"] = tau
                m = run_online(stream, inst.batch, inst.metric, FixedThreshold(tau)).matching
            else:
                raise ValueError(f"unknown algorithm {algo!r}")
        except (EmptyHistoryError, ValueError) as exc:
            out.append(Outcome(algo, float("nan"), float("nan"), 0.0, error=str(exc)))
            continue
        secs = time.perf_counter() - t0
        check_valid(m, inst, algo)
        out.append(Outcome(algo, m.size, m.total_cost, secs, extra=extra))
    return out


# --- sweeps ----------------------------------------------------------------

@dataclass
class SweepSpec:
    base: SyntheticConfig
    param: str
    values: list
    arrival: str = "adversary"
    seeds: int = 20
    algorithms: tuple[str, ...] = ("opt-exact", "greedy", "greedy-rt", "greedy-rt-exp", "greedy-ot")

    def __post_init__(self):
        self.algorithms = tuple(self.algorithms)
        if self.param not in SWEEPABLE:
            raise ValueError(f"param must be one of {SWEEPABLE}")
        if not self.values:
            raise ValueError("value list is empty")
        if self.seeds < 1:
            raise ValueError("need at least one seed")
        if self.arrival not in ARRIVAL_MODELS:
            raise ValueError(f"arrival must be one of {ARRIVAL_MODELS}")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}")

    def to_dict(self) -> dict:
        return {"base": self.base.to_dict(), "param": self.param, "values": list(self.values),
                "arrival": self.arrival, "seeds": self.seeds, "algorithms": list(self.algorithms)}

    @classmethod
    def from_dict(cls, d: dict) -> SweepSpec:
        d = dict(d)
        d["base"] = SyntheticConfig.from_dict(d.get("base", {}))
        return cls(**d)


@dataclass
class ResultRow:
    value: float
    algorithm: str
    mean_size: float
    mean_used_budget: float
    mean_seconds: float
    n_seeds: int
    error: str = ""


def _sweep_point(spec: SweepSpec, value, k: int) -> list[tuple]:
    """All algorithms at one (value, seed index); returns sortable records."""
    seed = spec.base.seed + k
    try:
        cfg = replace(spec.base, **{spec.param: value}, seed=seed)
        hist = gen_synthetic(replace(cfg, seed=seed + HISTORY_SEED_OFFSET))
        inst = gen_synthetic(cfg)
    except ValueError as exc:
        return [(value, a, k, Outcome(a, float("nan"), float("nan"), 0.0, error=str(exc)))
                for a in spec.algorithms]
    outcomes = run_algorithms(inst, spec.arrival, spec.algorithms, seed, history=hist)
    return [(value, o.algorithm, k, o) for o in outcomes]


def run_sweep(spec: SweepSpec, jobs: int = 1,
              progress: Callable[[str], None] | None = None) -> list[ResultRow]:
    points = [(v, k) for v in spec.values for k in range(spec.seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_sweep_point, [spec] * len(points),
                                   [p[0] for p in points], [p[1] for p in points]))
    else:
        chunks = []
        for v, k in points:
            chunks.append(_sweep_point(spec, v, k))
            if progress:
                progress(f"{spec.param}={v} seed#{k} done")
    records = [r for chunk in chunks for r in chunk]
    order = {a: i for i, a in enumerate(spec.algorithms)}
    vindex = {v: i for i, v in enumerate(spec.values)}
    records.sort(key=lambda r: (vindex[r[0]], order[r[1]], r[2]))

    rows = []
    for v in spec.values:
        for a in spec.algorithms:
            outs = [r[3] for r in records if r[0] == v and r[1] == a]
            errors = sorted({o.error for o in outs if o.error})
            good = [o for o in outs if not o.error]
            if good:
                rows.append(ResultRow(v, a, float(np.mean([o.size for o in good])),
                                      float(np.mean([o.used_budget for o in good])),
                                      float(np.mean([o.seconds for o in good])), len(good),
                                      "; ".join(errors)))
            else:
                rows.append(ResultRow(v, a, float("nan"), float("nan"), float("nan"), 0,
                                      "; ".join(errors)))
    return rows


def write_results_csv(rows: Sequence[ResultRow], path: str | Path, timing: bool = False) -> None:
    """Deterministic CSV; wall-clock seconds only with ``timing``."""
    cols = ["value", "algorithm", "mean_size", "mean_used_budget", "n_seeds", "error"]
    if timing:
        cols.insert(4, "mean_seconds")
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(cols)
        for r in rows:
            rec = {"value": repr(r.value), "algorithm": r.algorithm, "mean_size": repr(r.mean_size),
                   "mean_used_budget": repr(r.mean_used_budget), "mean_seconds": repr(r.mean_seconds),
                   "n_seeds": r.n_seeds, "error": r.error}
            out.writerow([rec[c] for c in cols])


# --- oracle cross-check ----------------------------------------------------

@dataclass
class OracleReport:
    trials: int = 0
    oracle_mismatches: int = 0
    rt_violations: int = 0
    ot_checked: int = 0  # unique-optimum, non-empty instances
    ot_violations: int = 0
    structure_violations: int = 0
    alg1_below_exact: int = 0
    alg1_max_gap: int = 0
    offenders: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.oracle_mismatches or self.rt_violations or self.ot_violations
                    or self.structure_violations)

    def summary(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "offenders"}
        d["ok"] = self.ok
        d["n_offenders"] = len(self.offenders)
        return d


def check_instance(inst: Instance, report: OracleReport, label: str = "") -> None:
    """Cross-check one desk-scale instance; tallies go into ``report``."""
    stream = ArrivalStream.from_workers(inst.workers)
    problems = []
    bf = brute_force_solve(inst)
    exact = budget_ssp_optimal(inst)
    alg1 = algorithm1_optimal(inst)
    for name, m in (("brute", bf.matching), ("exact", exact), ("alg1", alg1)):
        check_valid(m, inst, name)
    if exact.size != bf.matching.size:
        report.oracle_mismatches += 1
        problems.append(f"exact size {exact.size} != brute force {bf.matching.size}")
    gap = exact.size - alg1.size
    if gap > 0:
        report.alg1_below_exact += 1
        report.alg1_max_gap = max(report.alg1_max_gap, gap)

    runs = greedy_rt_runs(stream, inst.batch, inst.metric, inst.c_max)
    for r in runs:
        check_valid(r.matching, inst, f"rt kappa={r.kappa}")
    expectation = sum(r.size for r in runs) / len(runs)
    if expectation < rt_lower_bound(exact.size, inst.c_max) - 1e-9:
        report.rt_violations += 1
        problems.append(f"Greedy-RT expectation {expectation} below bound")

    if bf.n_optima == 1 and exact.size > 0:
        report.ot_checked += 1
        c_star = extract_ot_threshold(exact)
        ot = run_online(stream, inst.batch, inst.metric, FixedThreshold(c_star)).matching
        check_valid(ot, inst, "ot")
        bound = ot_lower_bound(exact.costs())
        if ot.size < bound:
            report.ot_violations += 1
            problems.append(f"Greedy-OT size {ot.size} below bound {bound}")
        opt_w = {p.worker_id for p in exact.pairs}
        opt_t = {p.task_id for p in exact.pairs}
        for p in ot.pairs:
            if p.cost < c_star - 1e-9 and p.worker_id not in opt_w and p.task_id not in opt_t:
                report.structure_violations += 1
                problems.append(f"Greedy-OT pair {p} disjoint from the optimum")
                break
    report.trials += 1
    if problems:
        report.offenders.append({"label": label, "problems": problems,
                                 "instance": instance_to_dict(inst)})


def oracle_check(trials: int, size_bound: int = 6, seed: int = 0) -> OracleReport:
    if size_bound > 10:
        raise ValueError("size_bound must be <= 10 for exhaustive search")
    rng = np.random.default_rng(seed)
    report = OracleReport()
    for i in range(trials):
        check_instance(gen_small(rng, size_bound), report, label=f"trial {i}")
    return report


# --- pickup traces ---------------------------------------------------------

@dataclass
class RealRow:
    label: str
    n_workers: int
    ot_threshold: float
    sizes: dict[str, int]
    used: dict[str, float]
    seconds: dict[str, float]


REAL_ALGORITHMS = ("opt-exact", "greedy", "greedy-rt", "greedy-rt-exp", "greedy-ot")


def run_real(pickups_csv: str | Path, historical_csv: str | Path, bbox: GeoBoundingBox,
             task_seed: int, budget: float, n_tasks: int = 6000,
             window: tuple[float, float] = (0.0, 12.0), lifetime: float = 180.0,
             velocity: float = REAL_VELOCITY, label: str | None = None) -> RealRow:
    """One row of the pickup-trace table: historical day guides the target day."""
    horizon = (window[1] - window[0]) * 60.0
    tasks = gen_real_tasks(bbox, n_tasks, (0.0, horizon), lifetime, task_seed, budget)
    c_max = region_c_max(bbox, CostMetric.EUCLIDEAN)
    hist = Instance(ingest_pickups_csv(historical_csv, bbox, window, velocity), tasks,
                    CostMetric.EUCLIDEAN, c_max)
    target = Instance(ingest_pickups_csv(pickups_csv, bbox, window, velocity), tasks,
                      CostMetric.EUCLIDEAN, c_max)
    tau = extract_ot_threshold(budget_ssp_optimal(hist))
    outcomes = run_algorithms(target, "random", REAL_ALGORITHMS, task_seed, tau=tau)
    return RealRow(label or Path(pickups_csv).stem, len(target.workers), tau,
                   {o.algorithm: o.size for o in outcomes},
                   {o.algorithm: o.used_budget for o in outcomes},
                   {o.algorithm: o.seconds for o in outcomes})


def write_real_csv(row: RealRow, path: str | Path, timing: bool = False) -> None:
    """Table-shaped output: one quantity line, optionally one time line."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["date", "workers", "opt_threshold_km", "measure", *REAL_ALGORITHMS])
        out.writerow([row.label, row.n_workers, repr(row.ot_threshold), "quantity",
                      *(repr(row.sizes[a]) for a in REAL_ALGORITHMS)])
        out.writerow([row.label, row.n_workers, repr(row.ot_threshold), "used_budget_km",
                      *(repr(row.used[a]) for a in REAL_ALGORITHMS)])
        if timing:
            out.writerow([row.label, row.n_workers, repr(row.ot_threshold), "time_secs",
                          *(f"{row.seconds[a]:.3f}" for a in REAL_ALGORITHMS)])
