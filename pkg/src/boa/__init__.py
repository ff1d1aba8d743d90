"""Budget-aware online task assignment: offline optimum, threshold greedy, experiments."""

from .cost import CostMetric, GeoBoundingBox, Location, Rect, region_c_max
from .model import Instance, Matching, Pair, Task, TaskBatch, Worker, validate_matching
from .offline import algorithm1_optimal, brute_force_optimal, budget_ssp_optimal, min_cost_max_flow
from .online import (ArrivalStream, FixedThreshold, RandomExp, Unbounded, greedy_rt_expectation,
                     kappa_support, run_online)

__version__ = "0.1.0"
