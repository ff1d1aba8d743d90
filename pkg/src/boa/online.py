"""One-pass threshold greedy: simple Greedy, Greedy-RT and Greedy-OT.

All three share `run_online`; they differ only in how the cost cap is chosen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cost import CostMetric, distances_from
from .model import EPS, Matching, Pair, TaskBatch, Worker

NO_FEASIBLE_TASK = "no-feasible-task"
OVER_THRESHOLD = "over-threshold"
OVER_BUDGET = "over-budget"


class EmptyHistoryError(ValueError):
    """No historical pairs to take a threshold from."""


@dataclass(frozen=True)
class ArrivalStream:
    workers: tuple[Worker, ...]

    def __post_init__(self):
        object.__setattr__(self, "workers", tuple(self.workers))
        times = [w.arrival for w in self.workers]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("stream arrival times must be non-decreasing")

    @classmethod
    def from_workers(cls, workers: Sequence[Worker]) -> ArrivalStream:
        return cls(tuple(sorted(workers, key=lambda w: (w.arrival, w.id))))

    def __len__(self) -> int:
        return len(self.workers)

    def __iter__(self):
        return iter(self.workers)


@dataclass(frozen=True)
class Unbounded:
    """Simple greedy: no cost cap."""

    def resolve(self) -> tuple[float, int | None]:
        return math.inf, None


@dataclass(frozen=True)
class FixedThreshold:
    tau: float

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"threshold must be finite and positive, got {self.tau}")

    def resolve(self) -> tuple[float, int | None]:
        return self.tau, None


@dataclass(frozen=True)
class RandomExp:
    """Greedy-RT: draw kappa once per run and cap costs at e**kappa."""

    c_max: float
    seed: int | None = None

    def __post_init__(self):
        if not self.c_max > 0:
            raise ValueError("c_max must be positive")

    def resolve(self) -> tuple[float, int | None]:
        kappa = sample_kappa(self.c_max, np.random.default_rng(self.seed))
        return math.exp(kappa), kappa


ThresholdPolicy = Unbounded | FixedThreshold | RandomExp


@dataclass(frozen=True)
class Decision:
    worker_id: int
    task_id: int | None
    reason: str | None = None  # set only for rejections


@dataclass(frozen=True)
class RunTrace:
    matching: Matching
    decisions: tuple[Decision, ...]
    unspent: float
    tau: float
    kappa: int | None = None

    @property
    def size(self) -> int:
        return self.matching.size


def kappa_support(c_max: float) -> range:
    """Exponent grades 0..ceil(ln(c_max + 1))."""
    if not c_max > 0:
        raise ValueError(f"c_max must be positive, got {c_max}")
    return range(math.ceil(math.log(c_max + 1)) + 1)


def sample_kappa(c_max: float, rng: np.random.Generator) -> int:
    support = kappa_support(c_max)
    return int(rng.integers(0, len(support)))


def extract_ot_threshold(historical_opt: Matching) -> float:
    if not historical_opt.pairs:
        raise EmptyHistoryError("historical optimum is empty; no threshold to extract")
    return max(p.cost for p in historical_opt.pairs)


def run_online(stream: ArrivalStream | Sequence[Worker], batch: TaskBatch,
               metric: CostMetric, policy: ThresholdPolicy) -> RunTrace:
    tau, kappa = policy.resolve()
    tasks = sorted(batch.tasks, key=lambda t: t.id)
    tx = np.array([t.loc.x for t in tasks], dtype=float)
    ty = np.array([t.loc.y for t in tasks], dtype=float)
    deadline = np.array([t.deadline for t in tasks], dtype=float)
    free = np.ones(len(tasks), dtype=bool)
    budget = batch.budget
    used = 0.0
    pairs: list[Pair] = []
    decisions: list[Decision] = []

    for w in stream:
        if not tasks:
            decisions.append(Decision(w.id, None, NO_FEASIBLE_TASK))
            continue
        cost = distances_from(w.loc.x, w.loc.y, tx, ty, metric)
        cand = free & (w.arrival + cost / w.velocity <= deadline + EPS)
        if not cand.any():
            decisions.append(Decision(w.id, None, NO_FEASIBLE_TASK))
            continue
        cand &= cost <= tau + EPS
        if not cand.any():
            decisions.append(Decision(w.id, None, OVER_THRESHOLD))
            continue
        cand &= used + cost <= budget + EPS
        if not cand.any():
            decisions.append(Decision(w.id, None, OVER_BUDGET))
            continue
        # argmin returns the first minimum, i.e. the smallest task id on ties
        j = int(np.argmin(np.where(cand, cost, np.inf)))
        c = float(cost[j])
        free[j] = False
        used += c
        pairs.append(Pair(w.id, tasks[j].id, c))
        decisions.append(Decision(w.id, tasks[j].id))

    m = Matching.from_pairs(pairs)
    return RunTrace(m, tuple(decisions), budget - m.total_cost, tau, kappa)


def greedy_rt_runs(stream, batch: TaskBatch, metric: CostMetric, c_max: float) -> list[RunTrace]:
    """One run per kappa grade, threshold pinned at e**kappa."""
    out = []
    for k in kappa_support(c_max):
        trace = run_online(stream, batch, metric, FixedThreshold(math.exp(k)))
        out.append(RunTrace(trace.matching, trace.decisions, trace.unspent, trace.tau, k))
    return out


def greedy_rt_expectation(stream, batch: TaskBatch, metric: CostMetric, c_max: float) -> float:
    """Exact expected Greedy-RT matching size (uniform kappa)."""
    runs = greedy_rt_runs(stream, batch, metric, c_max)
    return sum(r.size for r in runs) / len(runs)


def rt_lower_bound(opt_size: int, c_max: float) -> float:
    """Greedy-RT guarantee: |O| / (ceil(ln(c_max + 1)) + 1)."""
    return opt_size / len(kappa_support(c_max))


def ot_lower_bound(opt_costs: Sequence[float], epsilon: float = 0.0) -> int:
    """Greedy-OT guarantee in pairs: floor(sum(c) / ((max c + eps) * n) * n)."""
    if not opt_costs:
        return 0
    n = len(opt_costs)
    ratio = math.fsum(opt_costs) / ((max(opt_costs) + epsilon) * n)
    # small slack so an exact integer ratio is not floored one step low
    return math.floor(ratio * n + 1e-9)
