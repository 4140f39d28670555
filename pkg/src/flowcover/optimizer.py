"""Weighted set cover formulation of polling-switch selection.

Every switch that carries traffic becomes a *poll-all* candidate set holding
the flows crossing it; every flow also gets a singleton *single-flow* set.
A set returning ``k`` entries costs ``l_req + l_reply(k)`` bytes.

Two solvers are provided. :func:`greedy_cover` is the classic
cost-effectiveness greedy (H_k approximation) driven by a lazy heap.
:func:`exact_cover` is a branch-and-bound over the poll-all sets.

Why branch on poll-all sets only: fix the subset ``T`` of poll-all sets in a
cover. The flows left uncovered by ``T`` can only be covered by their own
singletons, so the cheapest cover containing exactly ``T`` is ``T`` plus the
singleton closure of the remainder. Minimizing over all ``T`` is therefore
exact. At a search node with uncovered flows ``U`` and undecided sets ``R``,
any completion pays, for each ``f`` in ``U``, at least
``min(w_single(f), min over s in R containing f of w_s / |s & U|)`` when
every chosen set's weight is spread evenly over the uncovered flows it
contains. Summing gives a lower bound; the singleton closure of ``U`` is a
feasible completion and serves as an upper bound that tightens the
incumbent at every node.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import (
    DEFAULT_MODEL,
    CostModel,
    Flow,
    PollingScheme,
    Topology,
    poll_cost,
)


@dataclass(frozen=True, order=True)
class PollAll:
    switch: int


@dataclass(frozen=True, order=True)
class SingleFlow:
    flow: int


@dataclass(frozen=True)
class CandidateSet:
    flow_ids: frozenset
    action: PollAll | SingleFlow

    def __post_init__(self):
        object.__setattr__(self, "flow_ids", frozenset(self.flow_ids))
        if isinstance(self.action, SingleFlow) and self.flow_ids != {self.action.flow}:
            raise ValueError("a single-flow set must contain exactly its flow")

    @classmethod
    def _trusted(cls, flow_ids: frozenset, action):
        # Construction fast path: skips validation already guaranteed by the caller.
        obj = object.__new__(cls)
        object.__setattr__(obj, "flow_ids", flow_ids)
        object.__setattr__(obj, "action", action)
        return obj

    def tie_key(self) -> tuple:
        """(cardinality, kind, id): poll-all sets sort before single-flow sets."""
        if isinstance(self.action, PollAll):
            return (len(self.flow_ids), 0, self.action.switch)
        return (len(self.flow_ids), 1, self.action.flow)


@dataclass(frozen=True)
class WeightedSetSystem:
    universe: frozenset
    sets: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.sets) != len(self.weights):
            raise ValueError("sets and weights must align")


@dataclass(frozen=True)
class CoverSolution:
    chosen: tuple
    total_weight: int
    proven: bool = True


class UncoverableError(ValueError):
    """Some universe element belongs to no candidate set."""


def construct_weighted_sets(
    topo: Topology, flows: Iterable[Flow], model: CostModel = DEFAULT_MODEL
) -> WeightedSetSystem:
    by_switch = defaultdict(list)
    singles = []
    for flow in flows:
        for v in flow.path:
            if not 0 <= v < topo.n:
                raise ValueError(f"flow {flow.id}: switch {v} is not in the topology")
            by_switch[v].append(flow.id)
        singles.append(flow.id)
    singles.sort()
    if len(singles) != len(set(singles)):
        raise ValueError("duplicate flow id")

    sets, weights = [], []
    for v in sorted(by_switch):
        members = by_switch[v]
        sets.append(CandidateSet._trusted(frozenset(members), PollAll(v)))
        weights.append(poll_cost(model, len(members)))
    one = poll_cost(model, 1)
    for f in singles:
        sets.append(CandidateSet._trusted(frozenset((f,)), SingleFlow(f)))
        weights.append(one)
    return WeightedSetSystem(frozenset(singles), tuple(sets), tuple(weights))


def audit_system(system: WeightedSetSystem, model: CostModel = DEFAULT_MODEL) -> None:
    """Raise ValueError if ``system`` breaks any structural or weight invariant."""
    union = set()
    for s, w in zip(system.sets, system.weights):
        if not s.flow_ids <= system.universe:
            raise ValueError(f"{s.action} holds flows outside the universe")
        if w != poll_cost(model, len(s.flow_ids)):
            raise ValueError(f"{s.action} has weight {w}, expected {poll_cost(model, len(s.flow_ids))}")
        union |= s.flow_ids
    if union != system.universe:
        raise ValueError("candidate sets do not cover the universe")


def _membership(system: WeightedSetSystem) -> dict:
    member = defaultdict(list)
    for i, s in enumerate(system.sets):
        for f in s.flow_ids:
            member[f].append(i)
    missing = system.universe - member.keys()
    if missing:
        raise UncoverableError(f"{len(missing)} flow(s) belong to no set, e.g. {min(missing)}")
    return member


def greedy_cover(system: WeightedSetSystem) -> CoverSolution:
    """Pick the set with the lowest weight per newly covered flow until done.

    Heap entries carry the uncovered count they were scored with. A set's
    ratio can only grow as coverage grows, so a popped entry whose count is
    still current is the true minimum; stale entries are re-scored and pushed
    back. Ties fall through to ``CandidateSet.tie_key`` and the set index.
    """
    sets, weights = system.sets, system.weights
    member = _membership(system)
    uncovered = [len(s.flow_ids) for s in sets]
    # Weights and counts are small integers: equal rationals give equal
    # floats, distinct ones stay distinct.
    heap = [
        (weights[i] / k, *sets[i].tie_key(), i, k)
        for i, k in enumerate(uncovered)
        if k
    ]
    heapq.heapify(heap)

    covered = set()
    chosen = []
    total = 0
    target = len(system.universe)
    while len(covered) < target:
        ratio, card, kind, ident, i, k = heapq.heappop(heap)
        now = uncovered[i]
        if now == 0:
            continue
        if now != k:
            heapq.heappush(heap, (weights[i] / now, card, kind, ident, i, now))
            continue
        chosen.append(i)
        total += weights[i]
        for f in sets[i].flow_ids:
            if f not in covered:
                covered.add(f)
                for j in member[f]:
                    uncovered[j] -= 1
    return CoverSolution(tuple(chosen), total)


def exact_cover(system: WeightedSetSystem, budget: int = 1_000_000) -> CoverSolution:
    """Minimum-weight cover by branch-and-bound over the poll-all sets.

    ``budget`` caps the number of search nodes; when it runs out the best
    cover found so far is returned with ``proven=False``.
    """
    member = _membership(system)
    flows = sorted(system.universe)
    bit = {f: 1 << k for k, f in enumerate(flows)}

    single_w = {}
    for i, s in enumerate(system.sets):
        if isinstance(s.action, SingleFlow):
            f = s.action.flow
            if f not in single_w or system.weights[i] < system.weights[single_w[f]]:
                single_w[f] = i
    no_single = [f for f in flows if f not in single_w]
    if no_single:
        raise UncoverableError(f"flow {no_single[0]} has no single-flow set to close with")
    single_idx = [single_w[f] for f in flows]
    single_cost = [system.weights[i] for i in single_idx]

    polls = [i for i, s in enumerate(system.sets) if not isinstance(s.action, SingleFlow)]
    polls.sort(key=lambda i: (system.weights[i] / len(system.sets[i].flow_ids), system.sets[i].tie_key(), i))
    masks = [sum(bit[f] for f in system.sets[i].flow_ids) for i in polls]
    pw = [system.weights[i] for i in polls]
    full = (1 << len(flows)) - 1
    del member

    def closure(covered):
        rest = full & ~covered
        cost = 0
        k = 0
        while rest:
            if rest & 1:
                cost += single_cost[k]
            rest >>= 1
            k += 1
        return cost

    def lower_bound(depth, covered):
        rest = full & ~covered
        bound = 0.0
        k = 0
        while rest:
            if rest & 1:
                fb = 1 << k
                best = single_cost[k]
                for j in range(depth, len(polls)):
                    if masks[j] & fb:
                        share = pw[j] / (masks[j] & ~covered).bit_count()
                        if share < best:
                            best = share
                bound += best
            rest >>= 1
            k += 1
        return bound

    greedy = greedy_cover(system)
    best_cost = greedy.total_weight
    best_pick = None  # None: incumbent is the greedy solution
    nodes = 0
    exhausted = False

    def search(depth, covered, partial, picked):
        nonlocal best_cost, best_pick, nodes, exhausted
        if exhausted:
            return
        nodes += 1
        if nodes > budget:
            exhausted = True
            return
        closed = partial + closure(covered)
        if closed < best_cost:
            best_cost = closed
            best_pick = (picked, covered)
        if depth == len(polls) or covered == full:
            return
        # Integer costs: any strictly better completion sits at least 1 below.
        if partial + lower_bound(depth, covered) > best_cost - 1 + 1e-6:
            return
        if masks[depth] & ~covered:
            search(depth + 1, covered | masks[depth], partial + pw[depth], picked + (polls[depth],))
        search(depth + 1, covered, partial, picked)

    search(0, 0, 0, ())

    if best_pick is None:
        return CoverSolution(tuple(sorted(greedy.chosen)), greedy.total_weight, not exhausted)
    picked, covered = best_pick
    chosen = list(picked)
    for k in range(len(flows)):
        if not covered >> k & 1:
            chosen.append(single_idx[k])
    return CoverSolution(tuple(sorted(chosen)), best_cost, not exhausted)


def decode_scheme(
    system: WeightedSetSystem, solution: CoverSolution, flows: Iterable[Flow]
) -> PollingScheme:
    """Turn chosen sets into polls; single polls go to the last switch on the path."""
    paths = {f.id: f.path for f in flows}
    poll_all = set()
    single = []
    for i in solution.chosen:
        action = system.sets[i].action
        if isinstance(action, PollAll):
            poll_all.add(action.switch)
        else:
            single.append(action.flow)
    single_polls = {
        (f, paths[f][-1])
        for f in set(single)
        if not any(v in poll_all for v in paths[f])
    }
    return PollingScheme(frozenset(poll_all), frozenset(single_polls))


def solve(
    topo: Topology,
    flows: Sequence[Flow],
    model: CostModel = DEFAULT_MODEL,
    exact: bool = False,
    budget: int = 1_000_000,
) -> tuple[PollingScheme, CoverSolution]:
    """Construct, solve, and decode in one call."""
    system = construct_weighted_sets(topo, flows, model)
    solution = exact_cover(system, budget) if exact else greedy_cover(system)
    return decode_scheme(system, solution, flows), solution
