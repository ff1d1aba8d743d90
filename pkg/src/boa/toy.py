"""The six-worker, six-task running example, realised as coordinates.

Only the example's costs are published, so the coordinates here were
constructed to reproduce every stated number: OPT {(w3,t2),(w4,t5),
(w5,t1),(w6,t4)} costing 9, simple greedy {(w1,t1),(w2,t2)} costing 10,
per-grade Greedy-RT sizes 2/3/2/2 and Greedy-OT (tau = 5) size 4 cost 10.

All tasks are released at 0 with deadline 10, worker w_i arrives at time i,
budget 10, 8x8 square under Manhattan distance (c_max = 16). Velocities
differ per worker so that exactly the intended pairs are deadline-feasible.
"""

from __future__ import annotations

import math

from .cost import CostMetric, Location
from .model import Instance, Task, TaskBatch, Worker
from .offline import algorithm1_optimal, brute_force_optimal, budget_ssp_optimal
from .online import (ArrivalStream, FixedThreshold, Unbounded, extract_ot_threshold,
                     greedy_rt_expectation, greedy_rt_runs, run_online)

# (x, y, velocity) for w1..w6
WORKERS = [(8, 0, 0.8), (6.75, 5.25, 0.8), (4, 5, 0.5), (8, 8, 1.0), (1, 1, 0.5), (0, 7, 0.5)]
# (x, y) for t1..t6
TASKS = [(2, 0), (4, 4), (3, 2), (0, 8), (3, 8), (2, 6)]

BUDGET = 10.0
C_MAX = 16.0
DEADLINE = 10.0

OPT_PAIRS = {(3, 2), (4, 5), (5, 1), (6, 4)}
GREEDY_PAIRS = {(1, 1), (2, 2)}
OT_PAIRS = {(2, 2), (3, 6), (5, 1), (6, 4)}
RT_SIZES = {0: 2, 1: 3, 2: 2, 3: 2}
RT_BUDGETS = {0: 2.0, 1: 4.0, 2: 10.0, 3: 10.0}


def toy_instance(budget: float = BUDGET) -> Instance:
    workers = [Worker(i + 1, Location(x, y), float(i + 1), v) for i, (x, y, v) in enumerate(WORKERS)]
    tasks = [Task(j + 1, Location(x, y), 0.0, DEADLINE) for j, (x, y) in enumerate(TASKS)]
    return Instance(workers, TaskBatch(tasks, budget), CostMetric.MANHATTAN, C_MAX)


def _summary(m):
    return m.size, m.total_cost, sorted(m.as_set())


def replay() -> dict:
    """Recompute every number of the running example."""
    inst = toy_instance()
    stream = ArrivalStream.from_workers(inst.workers)
    opt = algorithm1_optimal(inst)
    greedy = run_online(stream, inst.batch, inst.metric, Unbounded())
    tau = extract_ot_threshold(opt)
    ot = run_online(stream, inst.batch, inst.metric, FixedThreshold(tau))
    rt = greedy_rt_runs(stream, inst.batch, inst.metric, inst.c_max)
    return {
        "opt_alg1": _summary(opt),
        "opt_exact": _summary(budget_ssp_optimal(inst)),
        "opt_brute": _summary(brute_force_optimal(inst)),
        "greedy": _summary(greedy.matching),
        "rt_sizes": {r.kappa: r.size for r in rt},
        "rt_budgets": {r.kappa: r.matching.total_cost for r in rt},
        "rt_thresholds": {r.kappa: math.exp(r.kappa) for r in rt},
        "rt_expectation": greedy_rt_expectation(stream, inst.batch, inst.metric, inst.c_max),
        "ot_threshold": tau,
        "ot": _summary(ot.matching),
    }
