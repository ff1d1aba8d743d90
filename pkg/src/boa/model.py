"""Domain types shared by every solver: workers, tasks, instances, matchings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .cost import CostMetric, Location, distance, pairwise_costs

# Absolute slack on every inclusive constraint comparison (deadline, budget, threshold).
EPS = 1e-9


class InvalidReferenceError(KeyError):
    """A matching names a worker or task id the instance does not contain."""


@dataclass(frozen=True)
class Worker:
    id: int
    loc: Location
    arrival: float
    velocity: float

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"worker id must be non-negative, got {self.id}")
        if not (math.isfinite(self.arrival) and self.arrival >= 0):
            raise ValueError(f"worker {self.id}: bad arrival {self.arrival}")
        if not (self.velocity > 0 and math.isfinite(self.velocity)):
            raise ValueError(f"worker {self.id}: velocity must be positive")


@dataclass(frozen=True)
class Task:
    id: int
    loc: Location
    release: float
    deadline: float

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"task id must be non-negative, got {self.id}")
        if not (self.release >= 0 and math.isfinite(self.deadline) and self.deadline > self.release):
            raise ValueError(f"task {self.id}: need 0 <= release < deadline")


@dataclass(frozen=True)
class TaskBatch:
    tasks: tuple[Task, ...]
    budget: float

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if not (self.budget >= 0 and math.isfinite(self.budget)):
            raise ValueError(f"budget must be finite and non-negative, got {self.budget}")
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate task ids in batch")


@dataclass(frozen=True)
class Instance:
    workers: tuple[Worker, ...]
    batch: TaskBatch
    metric: CostMetric
    c_max: float

    def __post_init__(self):
        object.__setattr__(self, "workers", tuple(self.workers))
        object.__setattr__(self, "metric", CostMetric(self.metric))
        if not self.c_max > 0:
            raise ValueError("c_max must be positive")
        ids = [w.id for w in self.workers]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate worker ids")

    @property
    def tasks(self) -> tuple[Task, ...]:
        return self.batch.tasks

    @property
    def budget(self) -> float:
        return self.batch.budget

    def with_workers(self, workers: Iterable[Worker]) -> Instance:
        return replace(self, workers=tuple(workers))

    def with_budget(self, budget: float) -> Instance:
        return replace(self, batch=TaskBatch(self.batch.tasks, budget))

    def cost_matrix(self) -> np.ndarray:
        return pairwise_costs(
            np.array([w.loc.x for w in self.workers], dtype=float),
            np.array([w.loc.y for w in self.workers], dtype=float),
            np.array([t.loc.x for t in self.tasks], dtype=float),
            np.array([t.loc.y for t in self.tasks], dtype=float),
            self.metric,
        ).reshape(len(self.workers), len(self.tasks))

    def feasibility_matrix(self, costs: np.ndarray | None = None) -> np.ndarray:
        """Boolean |W| x |T| deadline-feasibility mask (same test as `is_feasible`)."""
        if costs is None:
            costs = self.cost_matrix()
        arrival = np.array([w.arrival for w in self.workers], dtype=float)
        velocity = np.array([w.velocity for w in self.workers], dtype=float)
        deadline = np.array([t.deadline for t in self.tasks], dtype=float)
        return arrival[:, None] + costs / velocity[:, None] <= deadline[None, :] + EPS

    def max_pair_cost(self) -> float:
        if not self.workers or not self.tasks:
            return 0.0
        return float(self.cost_matrix().max())


@dataclass(frozen=True)
class Pair:
    worker_id: int
    task_id: int
    cost: float


@dataclass(frozen=True)
class Matching:
    pairs: tuple[Pair, ...] = ()
    total_cost: float = field(default=0.0)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Pair]) -> Matching:
        pairs = tuple(pairs)
        return cls(pairs, math.fsum(p.cost for p in pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def size(self) -> int:
        return len(self.pairs)

    def costs(self) -> list[float]:
        return [p.cost for p in self.pairs]

    def as_set(self) -> set[tuple[int, int]]:
        return {(p.worker_id, p.task_id) for p in self.pairs}


def travel_cost(w: Worker, t: Task, metric: CostMetric) -> float:
    return distance(w.loc, t.loc, metric)


def is_feasible(w: Worker, t: Task, metric: CostMetric) -> bool:
    """Deadline test: the worker reaches the task no later than its deadline."""
    return w.arrival + travel_cost(w, t, metric) / w.velocity <= t.deadline + EPS


@dataclass(frozen=True)
class Violation:
    kind: str  # one-to-one | budget | deadline | cost | total
    detail: str


def validate_matching(m: Matching, inst: Instance) -> list[Violation]:
    """Check a matching against the instance; an empty list means valid.

    Raises InvalidReferenceError if a pair names an unknown worker or task.
    """
    workers = {w.id: w for w in inst.workers}
    tasks = {t.id: t for t in inst.tasks}
    out: list[Violation] = []
    seen_w: set[int] = set()
    seen_t: set[int] = set()
    for p in m.pairs:
        if p.worker_id not in workers:
            raise InvalidReferenceError(f"unknown worker id {p.worker_id}")
        if p.task_id not in tasks:
            raise InvalidReferenceError(f"unknown task id {p.task_id}")
        if p.worker_id in seen_w:
            out.append(Violation("one-to-one", f"worker {p.worker_id} matched twice"))
        if p.task_id in seen_t:
            out.append(Violation("one-to-one", f"task {p.task_id} matched twice"))
        seen_w.add(p.worker_id)
        seen_t.add(p.task_id)
        w, t = workers[p.worker_id], tasks[p.task_id]
        if not is_feasible(w, t, inst.metric):
            out.append(Violation("deadline", f"({p.worker_id}, {p.task_id}) misses deadline {t.deadline}"))
        true_cost = travel_cost(w, t, inst.metric)
        if abs(true_cost - p.cost) > EPS:
            out.append(Violation("cost", f"({p.worker_id}, {p.task_id}) cost {p.cost} != {true_cost}"))
    if abs(m.total_cost - math.fsum(p.cost for p in m.pairs)) > EPS:
        out.append(Violation("total", f"total_cost {m.total_cost} is not the sum of pair costs"))
    if m.total_cost > inst.budget + EPS:
        out.append(Violation("budget", f"total cost {m.total_cost} exceeds budget {inst.budget}"))
    return out


def make_pair(w: Worker, t: Task, metric: CostMetric) -> Pair:
    return Pair(w.id, t.id, travel_cost(w, t, metric))


def sorted_by_arrival(workers: Sequence[Worker]) -> list[Worker]:
    return sorted(workers, key=lambda w: (w.arrival, w.id))
