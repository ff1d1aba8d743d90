"""Offline optimum via min-cost max-flow, plus an exhaustive oracle.

The network is source -> worker -> task -> sink with unit capacities.
Costs are scaled to integers (`COST_SCALE`) inside the solver so that
potentials stay exact; decoded pairs carry the original float costs.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numba
import numpy as np

from .model import EPS, Instance, Matching, Pair

COST_SCALE = 10 ** 6
BRUTE_FORCE_LIMIT = 10
_INF = float("inf")
_INT_INF = np.iinfo(np.int64).max // 4


class SizeLimitError(ValueError):
    pass


class SolverInvariantError(AssertionError):
    """Augmentation costs came out decreasing; the solver is broken."""


class FlowNetwork:
    """Residual network stored as parallel edge arrays.

    Edge ``e`` and ``e ^ 1`` are twins: every forward edge is stored
    together with a zero-capacity reverse edge of negated cost, so
    ``cap[e] + cap[e ^ 1]`` is conserved by augmentation.
    """

    def __init__(self, n_vertices: int, source: int, sink: int):
        self.n_vertices = n_vertices
        self.source = source
        self.sink = sink
        self._tail: list[int] = []
        self._head: list[int] = []
        self._cap: list[int] = []
        self._cost: list[int] = []
        self._fcost: list[float] = []
        self._pair: list[tuple[int, int]] = []  # per forward edge; (-1, -1) if not worker->task
        self._arrays = None

    def add_edge(self, u: int, v: int, capacity: int, cost: int,
                 pair: tuple[int, int] | None = None, float_cost: float = 0.0) -> int:
        """Append forward edge u->v and its reverse twin; returns the forward index."""
        if self._arrays is not None:
            raise RuntimeError("network already frozen for solving")
        e = 2 * len(self._head)
        self._tail.append(u)
        self._head.append(v)
        self._cap.append(capacity)
        self._cost.append(cost)
        self._fcost.append(float_cost)
        self._pair.append(pair if pair is not None else (-1, -1))
        return e

    def add_edges(self, tails, heads, capacity: int, costs, pairs=None, float_costs=None) -> None:
        n = len(tails)
        self._tail.extend(int(u) for u in tails)
        self._head.extend(int(v) for v in heads)
        self._cap.extend([capacity] * n)
        self._cost.extend(int(c) for c in costs)
        self._fcost.extend([0.0] * n if float_costs is None else (float(c) for c in float_costs))
        self._pair.extend([(-1, -1)] * n if pairs is None else pairs)

    @property
    def n_forward_edges(self) -> int:
        return len(self._head)

    def forward_edges(self) -> list[tuple[int, int, int, int]]:
        """(tail, head, capacity, cost) of every forward edge, insertion order."""
        return list(zip(self._tail, self._head, self._cap, self._cost))

    def arrays(self):
        """Interleaved residual arrays plus a CSR adjacency; built once."""
        if self._arrays is None:
            m = len(self._head)
            tail = np.array(self._tail, dtype=np.int64)
            head_f = np.array(self._head, dtype=np.int64)
            head = np.empty(2 * m, dtype=np.int64)
            head[0::2], head[1::2] = head_f, tail
            cap = np.zeros(2 * m, dtype=np.int64)
            cap[0::2] = self._cap
            cost = np.empty(2 * m, dtype=np.int64)
            cost[0::2] = self._cost
            cost[1::2] = -cost[0::2]
            fcost = np.empty(2 * m, dtype=np.float64)
            fcost[0::2] = self._fcost
            fcost[1::2] = -fcost[0::2]
            src = np.empty(2 * m, dtype=np.int64)
            src[0::2], src[1::2] = tail, head_f
            order = np.argsort(src, kind="stable")
            ptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
            np.add.at(ptr, src + 1, 1)
            self._arrays = (head, cap, cost, fcost, np.cumsum(ptr), order.astype(np.int64))
        return self._arrays

    @property
    def residual_capacity(self) -> np.ndarray:
        return self.arrays()[1]

    def matched_pairs(self) -> list[Pair]:
        cap = self.arrays()[1]
        return [Pair(w, t, c) for k, ((w, t), c) in enumerate(zip(self._pair, self._fcost))
                if w >= 0 and cap[2 * k] == 0]


def scale_cost(c: float) -> int:
    return int(round(c * COST_SCALE))


def build_flow_network(inst: Instance) -> FlowNetwork:
    """Source 0, workers 1..|W|, tasks |W|+1..|W|+|T|, sink last.

    Worker->task edges are added only for deadline-feasible pairs.
    """
    n_w, n_t = len(inst.workers), len(inst.tasks)
    net = FlowNetwork(n_w + n_t + 2, source=0, sink=n_w + n_t + 1)
    net.add_edges([net.source] * n_w, range(1, n_w + 1), 1, [0] * n_w)
    net.add_edges(range(n_w + 1, n_w + n_t + 1), [net.sink] * n_t, 1, [0] * n_t)
    if n_w == 0 or n_t == 0:
        return net
    costs = inst.cost_matrix()
    rows, cols = np.nonzero(inst.feasibility_matrix(costs))
    fc = costs[rows, cols]
    wid = [inst.workers[i].id for i in rows]
    tid = [inst.tasks[j].id for j in cols]
    net.add_edges(rows + 1, cols + 1 + n_w, 1, np.rint(fc * COST_SCALE).astype(np.int64),
                  pairs=list(zip(wid, tid)), float_costs=fc)
    return net


@dataclass
class FlowResult:
    flow: int
    augmentation_costs: list[int]  # true path costs, scaled, in discovery order
    pairs: list[Pair]

    @property
    def total_scaled_cost(self) -> int:
        return sum(self.augmentation_costs)


@numba.njit(cache=True)
def _ssp(n, source, sink, head, cap, cost, fcost, ptr, adj, budget, use_budget):
    inf = np.iinfo(np.int64).max // 4
    pot = np.zeros(n, dtype=np.int64)  # valid start: original costs are >= 0
    dist = np.empty(n, dtype=np.int64)
    parent = np.empty(n, dtype=np.int64)
    done = np.empty(n, dtype=np.bool_)
    aug = np.empty(n, dtype=np.int64)
    n_aug = 0
    spent = 0.0
    while True:
        dist[:] = inf
        parent[:] = -1
        done[:] = False
        dist[source] = 0
        heap = [(np.int64(0), np.int64(source))]
        while len(heap) > 0:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            if u == sink:
                break
            pu = pot[u]
            for k in range(ptr[u], ptr[u + 1]):
                e = adj[k]
                if cap[e] <= 0:
                    continue
                v = head[e]
                if done[v]:
                    continue
                nd = d + cost[e] + pu - pot[v]
                if nd < dist[v]:
                    dist[v] = nd
                    parent[v] = e
                    heapq.heappush(heap, (nd, v))
        d_sink = dist[sink]
        if d_sink >= inf:
            break
        if use_budget:
            step = 0.0
            v = sink
            while v != source:
                e = parent[v]
                step += fcost[e]
                v = head[e ^ 1]
            if spent + step > budget + 1e-9:
                break
            spent += step
        # Unsettled vertices get d_sink, which keeps every reduced cost >= 0.
        for v in range(n):
            pot[v] += d_sink if dist[v] > d_sink else dist[v]
        v = sink
        while v != source:
            e = parent[v]
            cap[e] -= 1
            cap[e ^ 1] += 1
            v = head[e ^ 1]
        aug[n_aug] = pot[sink] - pot[source]
        n_aug += 1
    return aug[:n_aug]


def min_cost_max_flow(net: FlowNetwork, budget: float | None = None) -> FlowResult:
    """Successive shortest paths with vertex potentials (Dijkstra on reduced costs).

    With ``budget`` set, stops before the first augmentation whose path
    would push the matched float cost past the budget. Mutates ``net``.
    """
    head, cap, cost, fcost, ptr, adj = net.arrays()
    aug = _ssp(net.n_vertices, net.source, net.sink, head, cap, cost, fcost, ptr, adj,
               0.0 if budget is None else float(budget), budget is not None)
    aug = [int(a) for a in aug]
    for a, b in zip(aug, aug[1:]):
        if b < a:
            raise SolverInvariantError(f"augmentation costs decreased: {aug}")
    return FlowResult(len(aug), aug, net.matched_pairs())


def _sort_key(p: Pair):
    return (p.cost, p.worker_id, p.task_id)


def algorithm1_optimal(inst: Instance) -> Matching:
    """Min-cost max-flow, then admit pairs cheapest-first while the budget allows.

    An unaffordable pair is skipped, not a stopping point.
    """
    result = min_cost_max_flow(build_flow_network(inst))
    chosen, used = [], 0.0
    for p in sorted(result.pairs, key=_sort_key):
        if used + p.cost <= inst.budget + EPS:
            chosen.append(p)
            used += p.cost
    return Matching.from_pairs(chosen)


def budget_ssp_optimal(inst: Instance) -> Matching:
    """Largest matching with total cost within budget.

    Exact because SSP augmentation costs are non-decreasing: the k-th flow
    is the cheapest k-matching, so truncating at the budget is optimal.
    """
    result = min_cost_max_flow(build_flow_network(inst), budget=inst.budget)
    return Matching.from_pairs(sorted(result.pairs, key=lambda p: (p.worker_id, p.task_id)))


@dataclass
class BruteForceResult:
    matching: Matching
    n_optima: int  # matchings tying the optimum (max size, then min cost within EPS)


def brute_force_solve(inst: Instance) -> BruteForceResult:
    """Subset DP over tasks: best[mask] = cheapest way to cover exactly ``mask``."""
    n_w, n_t = len(inst.workers), len(inst.tasks)
    if n_w > BRUTE_FORCE_LIMIT or n_t > BRUTE_FORCE_LIMIT:
        raise SizeLimitError(f"brute force limited to {BRUTE_FORCE_LIMIT}x{BRUTE_FORCE_LIMIT}")
    n_masks = 1 << n_t
    costs = inst.cost_matrix()
    feasible = inst.feasibility_matrix(costs)
    best = [_INF] * n_masks
    count = [0] * n_masks
    best[0], count[0] = 0.0, 1
    layers = []  # per worker: mask -> task index taken, or -1
    for i in range(n_w):
        new_best = best[:]
        new_count = count[:]
        choice = [-1] * n_masks
        options = [j for j in range(n_t) if feasible[i, j]]
        for mask in range(n_masks):
            for j in options:
                bit = 1 << j
                if not mask & bit:
                    continue
                prev = best[mask ^ bit]
                if prev == _INF:
                    continue
                cand = prev + float(costs[i, j])
                if cand < new_best[mask] - EPS:
                    new_best[mask] = cand
                    new_count[mask] = count[mask ^ bit]
                    choice[mask] = j
                elif abs(cand - new_best[mask]) <= EPS:
                    new_count[mask] += count[mask ^ bit]
        best, count = new_best, new_count
        layers.append(choice)

    top_size, top_cost, top_mask, n_opt = 0, 0.0, 0, 1
    for mask in range(1, n_masks):
        c = best[mask]
        if c == _INF or c > inst.budget + EPS:
            continue
        k = bin(mask).count("1")
        if k > top_size or (k == top_size and c < top_cost - EPS):
            top_size, top_cost, top_mask, n_opt = k, c, mask, count[mask]
        elif k == top_size and abs(c - top_cost) <= EPS:
            n_opt += count[mask]

    # Walk layers backwards; a layer only records strict improvements, so a
    # set entry means that worker took task j for this mask.
    pairs = []
    mask = top_mask
    for i in range(n_w - 1, -1, -1):
        j = layers[i][mask]
        if j >= 0:
            pairs.append(Pair(inst.workers[i].id, inst.tasks[j].id, float(costs[i, j])))
            mask ^= 1 << j
    assert mask == 0
    pairs.reverse()
    return BruteForceResult(Matching.from_pairs(pairs), n_opt)


def brute_force_optimal(inst: Instance) -> Matching:
    return brute_force_solve(inst).matching
