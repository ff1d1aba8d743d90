import math

import numpy as np
import pytest

from boa.model import CostMetric, Location, Matching, Pair, Task, TaskBatch, Worker
from boa.online import (NO_FEASIBLE_TASK, OVER_BUDGET, OVER_THRESHOLD, ArrivalStream,
                        EmptyHistoryError, FixedThreshold, RandomExp, Unbounded,
                        extract_ot_threshold, greedy_rt_expectation, greedy_rt_runs,
                        kappa_support, ot_lower_bound, rt_lower_bound, run_online, sample_kappa)
from boa.toy import GREEDY_PAIRS, OT_PAIRS, RT_BUDGETS, RT_SIZES


def test_kappa_support_goldens():
    assert list(kappa_support(16)) == [0, 1, 2, 3]
    assert len(kappa_support(1000)) == 8
    assert list(kappa_support(math.e - 1)) == [0, 1]
    assert list(kappa_support(1)) == [0, 1]
    for bad in (0, -3):
        with pytest.raises(ValueError):
            kappa_support(bad)


def test_sample_kappa_uniform():
    rng = np.random.default_rng(12345)
    draws = np.array([sample_kappa(16, rng) for _ in range(100_000)])
    freq = np.bincount(draws, minlength=4) / draws.size
    assert len(freq) == 4
    assert np.all(np.abs(freq - 0.25) <= 0.0125)


def test_sample_kappa_deterministic():
    a = [sample_kappa(1, np.random.default_rng(3)) for _ in range(5)]
    assert set(a) <= {0, 1} and len(set(a)) == 1
    assert RandomExp(16, seed=9).resolve() == RandomExp(16, seed=9).resolve()


def test_policy_validation():
    with pytest.raises(ValueError):
        FixedThreshold(math.inf)
    with pytest.raises(ValueError):
        FixedThreshold(0)
    with pytest.raises(ValueError):
        RandomExp(0)


def test_stream_must_be_sorted():
    a = Worker(1, Location(0, 0), 5.0, 1.0)
    b = Worker(2, Location(0, 0), 1.0, 1.0)
    with pytest.raises(ValueError):
        ArrivalStream((a, b))
    assert [w.id for w in ArrivalStream.from_workers([a, b])] == [2, 1]


def test_extract_threshold():
    m = Matching.from_pairs([Pair(i, i, c) for i, c in enumerate([1, 5, 2, 1])])
    assert extract_ot_threshold(m) == 5
    assert extract_ot_threshold(Matching.from_pairs([Pair(0, 0, 3.25)])) == 3.25
    with pytest.raises(EmptyHistoryError):
        extract_ot_threshold(Matching.from_pairs([]))


def test_toy_greedy(toy, toy_stream):
    tr = run_online(toy_stream, toy.batch, toy.metric, Unbounded())
    assert tr.matching.as_set() == GREEDY_PAIRS
    assert (tr.size, tr.matching.total_cost, tr.unspent) == (2, 10, 0)


def test_toy_fixed_thresholds(toy, toy_stream):
    tr = run_online(toy_stream, toy.batch, toy.metric, FixedThreshold(math.e))
    assert (tr.size, tr.matching.total_cost) == (3, 4)
    ot = run_online(toy_stream, toy.batch, toy.metric, FixedThreshold(5))
    assert ot.matching.as_set() == OT_PAIRS and ot.matching.total_cost == 10


def test_toy_rt_runs(toy, toy_stream):
    runs = greedy_rt_runs(toy_stream, toy.batch, toy.metric, toy.c_max)
    assert {r.kappa: r.size for r in runs} == RT_SIZES
    assert {r.kappa: r.matching.total_cost for r in runs} == RT_BUDGETS
    exp = greedy_rt_expectation(toy_stream, toy.batch, toy.metric, toy.c_max)
    assert exp == sum(RT_SIZES.values()) / 4


def test_decision_trace(toy, toy_stream):
    tr = run_online(toy_stream, toy.batch, toy.metric, FixedThreshold(math.e))
    assert len(tr.decisions) == len(toy_stream)
    accepted = {(d.worker_id, d.task_id) for d in tr.decisions if d.reason is None}
    assert accepted == tr.matching.as_set()
    assert all(d.task_id is None for d in tr.decisions if d.reason)


def _single(worker_kw, tasks, budget=10.0, policy=Unbounded()):
    w = Worker(1, Location(0, 0), **worker_kw)
    batch = TaskBatch(tasks, budget)
    return run_online(ArrivalStream((w,)), batch, CostMetric.MANHATTAN, policy)


def test_rejection_reasons():
    far = [Task(1, Location(0, 5), 0.0, 10.0)]
    assert _single(dict(arrival=8.0, velocity=1.0), far).decisions[0].reason == NO_FEASIBLE_TASK
    assert _single(dict(arrival=0.0, velocity=1.0), far, policy=FixedThreshold(4)).decisions[0].reason == OVER_THRESHOLD
    assert _single(dict(arrival=0.0, velocity=1.0), far, budget=4).decisions[0].reason == OVER_BUDGET
    assert _single(dict(arrival=0.0, velocity=1.0), []).decisions[0].reason == NO_FEASIBLE_TASK


def test_tie_goes_to_smallest_task_id():
    tasks = [Task(7, Location(0, 2), 0.0, 10.0), Task(3, Location(2, 0), 0.0, 10.0)]
    tr = _single(dict(arrival=0.0, velocity=1.0), tasks)
    assert tr.matching.pairs[0].task_id == 3


def test_no_feasible_pairs_expectation_zero():
    w = Worker(1, Location(0, 0), 9.0, 1.0)
    batch = TaskBatch([Task(1, Location(5, 5), 0.0, 10.0)], 100)
    assert greedy_rt_expectation(ArrivalStream((w,)), batch, CostMetric.MANHATTAN, 20) == 0


def test_bounds():
    assert rt_lower_bound(8, 16) == 2
    assert ot_lower_bound([1, 1, 2, 5]) == 1
    assert ot_lower_bound([2, 2, 2]) == 3
    assert ot_lower_bound([]) == 0
    assert ot_lower_bound([1, 1, 2, 5], epsilon=1.0) == 1
