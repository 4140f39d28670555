"""Measurement metrics and seeded scenario drivers.

Each ``run_*`` function returns a list of flat dict records (one per
observation) ready for :func:`write_records`. Sub-streams are derived from
the single ``seed`` argument, so a run is a pure function of its arguments
(timing columns of the overhead scenario excepted).
"""

from __future__ import annotations

import csv
import gc
import heapq
import json
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import simkit
from .churn import (
    ChurnEvent,
    apply_churn,
    initial_state,
    maybe_recompute,
    state_cost,
    uncovered_flows,
)
from .model import (
    DEFAULT_MODEL,
    CostModel,
    Flow,
    PollingScheme,
    Topology,
    flows_at,
    per_flow_baseline_cost,
    poll_cost,
    scheme_cost,
)
from .optimizer import construct_weighted_sets, greedy_cover, solve


class UncoveredFlowError(ValueError):
    pass


@dataclass(frozen=True)
class MeasurementReport:
    flow_ids: np.ndarray
    real_bytes: np.ndarray
    measured_bytes: np.ndarray
    polled_switch: np.ndarray
    afr: float
    tm_accuracy: float
    total_cost_bytes: int
    baseline_cost_bytes: int


def polled_switch(scheme: PollingScheme, flow: Flow, singles: dict | None = None) -> int:
    """Switch whose counter reports ``flow``: its single poll, else the first
    poll-all switch along the path."""
    if singles is None:
        singles = dict(scheme.single_polls)
    v = singles.get(flow.id)
    if v is not None:
        return v
    for v in flow.path:
        if v in scheme.poll_all:
            return v
    raise UncoveredFlowError(f"flow {flow.id} is not covered by the scheme")


def measure(
    scheme: PollingScheme,
    counters: simkit.CounterTable,
    flows: Sequence[Flow],
    model: CostModel = DEFAULT_MODEL,
    n_switches: int | None = None,
) -> MeasurementReport:
    """Read each flow's byte count from its polled switch and score it.

    AFR is the share of flows read back byte-exact. TM accuracy is
    ``1 - sum|measured - real| / sum(real)``.
    """
    singles = dict(scheme.single_polls)
    m = len(flows)
    ids = np.empty(m, dtype=np.int64)
    real = np.empty(m, dtype=np.int64)
    got = np.empty(m, dtype=np.int64)
    where = np.empty(m, dtype=np.int64)
    row = counters._row
    for k, flow in enumerate(flows):
        v = polled_switch(scheme, flow, singles)
        ids[k] = flow.id
        real[k] = flow.volume_bytes
        where[k] = v
        got[k] = counters.counts[row[flow.id], flow.path.index(v)]
    afr = float(np.mean(got == real)) if m else 1.0
    total_real = int(real.sum())
    err = int(np.abs(got - real).sum())
    tm = 1.0 - err / total_real if total_real else 1.0
    if n_switches is None:
        n_switches = 1 + max((max(f.path) for f in flows), default=max(scheme.poll_all, default=0))
    cost = scheme_cost(model, scheme, flows_at(flows, n_switches))
    return MeasurementReport(ids, real, got, where, afr, tm, cost, per_flow_baseline_cost(model, m))


# --- scenario plumbing --------------------------------------------------------


def make_topology(kind: str, n: int, seed: int, p=None, alpha=None, beta=None) -> Topology:
    if kind == "er":
        return simkit.gen_erdos_renyi(n, p, seed=seed)
    if kind == "waxman":
        return simkit.gen_waxman(
            n,
            simkit.WAXMAN_ALPHA if alpha is None else alpha,
            simkit.WAXMAN_BETA if beta is None else beta,
            seed=seed,
        )
    raise ValueError(f"unknown topology kind {kind!r}")


def _sub_seed(seed: int, *tags: int) -> int:
    return int(np.random.SeedSequence([seed, *tags]).generate_state(1, np.uint64)[0])


def savings(flowcover_cost: int, baseline_cost: int) -> float:
    return 1.0 - flowcover_cost / baseline_cost if baseline_cost else 0.0


# --- scenarios ------------------------------------------------------------------


def run_cost_experiment(
    kind: str = "er",
    n: int = 200,
    m_values: Iterable[int] = (1000, 20000, 100000),
    seed: int = 0,
    model: CostModel = DEFAULT_MODEL,
    volume_range=simkit.DEFAULT_VOLUME_RANGE,
    **topo_params,
) -> list[dict]:
    """FlowCover cost against the per-flow baseline for growing flow counts."""
    topo = make_topology(kind, n, _sub_seed(seed, 0), **topo_params)
    router = simkit.Router(topo)
    records = []
    for m in m_values:
        flows = simkit.gen_flows(topo, m, volume_range, seed=_sub_seed(seed, 1, m), router=router)
        scheme, _ = solve(topo, flows, model)
        cost = scheme_cost(model, scheme, flows_at(flows, topo.n))
        base = per_flow_baseline_cost(model, m)
        records.append(
            {
                "topology": kind,
                "n": n,
                "m": m,
                "seed": seed,
                "flowcover_cost": cost,
                "baseline_cost": base,
                "savings": round(savings(cost, base), 6),
            }
        )
    return records


def poll_all_sweep_costs(
    topo: Topology, flows: Sequence[Flow], model: CostModel = DEFAULT_MODEL
) -> list[int]:
    """Total cost after polling k = 0..n switches chosen most-uncovered-first.

    Flows not yet covered by a polled switch are collected one by one. Ties
    go to the lower switch id; once everything is covered the remaining
    (now useless) switches follow in id order.
    """
    at = flows_at(flows, topo.n)
    paths = {f.id: f.path for f in flows}
    fresh = {v: len(at[v]) for v in topo.switches}
    heap = [(-fresh[v], v) for v in topo.switches]
    heapq.heapify(heap)
    covered = set()
    polled = 0
    costs = [per_flow_baseline_cost(model, len(flows))]
    while heap:
        neg, v = heapq.heappop(heap)
        if -neg != fresh[v]:
            heapq.heappush(heap, (-fresh[v], v))
            continue
        polled += poll_cost(model, len(at[v]))
        for f in at[v]:
            if f not in covered:
                covered.add(f)
                for w in paths[f]:
                    fresh[w] -= 1
        fresh[v] = -1  # retired
        costs.append(polled + (len(flows) - len(covered)) * model.single_poll_cost)
    return costs


def run_poll_all_sweep(
    n: int = 100,
    m: int = 20000,
    seed: int = 0,
    kind: str = "er",
    model: CostModel = DEFAULT_MODEL,
    volume_range=simkit.DEFAULT_VOLUME_RANGE,
    **topo_params,
) -> list[dict]:
    topo = make_topology(kind, n, _sub_seed(seed, 0), **topo_params)
    flows = simkit.gen_flows(topo, m, volume_range, seed=_sub_seed(seed, 1, m))
    base = per_flow_baseline_cost(model, m)
    return [
        {"k": k, "total_cost": c, "baseline_cost": base}
        for k, c in enumerate(poll_all_sweep_costs(topo, flows, model))
    ]


def time_solve(
    topo: Topology, flows: Sequence[Flow], model: CostModel = DEFAULT_MODEL, repeats: int = 3
) -> tuple[float, float]:
    """Best-of-``repeats`` wall time for construction and for the greedy solve."""
    construct = solve_t = float("inf")
    for _ in range(repeats):
        c, s = _time_once(topo, flows, model)
        construct, solve_t = min(construct, c), min(solve_t, s)
    return construct, solve_t


def _time_once(topo, flows, model):
    # the cyclic collector is paused while timing, as timeit does, so its
    # pauses do not land on arbitrary runs
    gc.collect()
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        t0 = time.perf_counter()
        system = construct_weighted_sets(topo, flows, model)
        t1 = time.perf_counter()
        greedy_cover(system)
        t2 = time.perf_counter()
    finally:
        if was_enabled:
            gc.enable()
    return t1 - t0, t2 - t1


def run_overhead_experiment(
    n: int = 200,
    m_values: Iterable[int] = tuple(range(10_000, 100_001, 10_000)),
    seed: int = 0,
    n_values: Iterable[int] = (50, 100, 200, 300, 400),
    m_fixed: int = 20000,
    repeats: int = 5,
    model: CostModel = DEFAULT_MODEL,
) -> list[dict]:
    """Construction and greedy times over flow counts, then over switch counts.

    Each point reports its best of ``repeats`` runs. The repeats are
    interleaved (every round times every point once), so a burst of outside
    load spoils one sample of several points rather than all samples of one.
    """
    topo = make_topology("er", n, _sub_seed(seed, 0))
    points = [
        ("flows", topo, simkit.gen_flows(topo, m, seed=_sub_seed(seed, 1, m)))
        for m in m_values
    ]
    for nn in n_values:
        t = make_topology("er", nn, _sub_seed(seed, 2, nn))
        points.append(("switches", t, simkit.gen_flows(t, m_fixed, seed=_sub_seed(seed, 3, m_fixed))))
    best = [[float("inf"), float("inf")] for _ in points]
    for _ in range(repeats):
        for k, (_, t, flows) in enumerate(points):
            c, s = _time_once(t, flows, model)
            best[k][0] = min(best[k][0], c)
            best[k][1] = min(best[k][1], s)
    return [
        {
            "sweep": sweep,
            "n": t.n,
            "m": len(flows),
            "construct_s": round(c, 6),
            "solve_s": round(s, 6),
            "total_s": round(c + s, 6),
        }
        for (sweep, t, flows), (c, s) in zip(points, best)
    ]


def accuracy_run(
    topo: Topology,
    m: int,
    loss_rate: float,
    loss_ratio: float,
    seed: int,
    model: CostModel = DEFAULT_MODEL,
    flows: Sequence[Flow] | None = None,
    scheme: PollingScheme | None = None,
) -> MeasurementReport:
    """One polled measurement of ``m`` flows over a lossy copy of ``topo``."""
    lossy = simkit.mark_loss_switches(topo, loss_ratio, _sub_seed(seed, 2))
    if flows is None:
        flows = simkit.gen_flows(lossy, m, seed=_sub_seed(seed, 1, m))
    if scheme is None:
        scheme, _ = solve(lossy, flows, model)
    counters = simkit.simulate_counters(lossy, flows, loss_rate, _sub_seed(seed, 3))
    return measure(scheme, counters, flows, model, topo.n)


def run_accuracy_experiment(
    kind: str = "er",
    n: int = 200,
    m_values: Iterable[int] = (20000,),
    loss_rates: Iterable[float] = (0.01,),
    loss_ratios: Iterable[float] = (0.1,),
    seed: int = 0,
    model: CostModel = DEFAULT_MODEL,
    **topo_params,
) -> list[dict]:
    """AFR and TM accuracy over a grid of flow counts, loss rates and ratios.

    Topology, flows and loss switches depend only on the seed, so a sweep
    along one axis keeps the others fixed.
    """
    topo = make_topology(kind, n, _sub_seed(seed, 0), **topo_params)
    router = simkit.Router(topo)
    records = []
    for m in m_values:
        flows = simkit.gen_flows(topo, m, seed=_sub_seed(seed, 1, m), router=router)
        scheme, _ = solve(topo, flows, model)
        for ratio in loss_ratios:
            for rate in loss_rates:
                rep = accuracy_run(topo, m, rate, ratio, seed, model, flows, scheme)
                records.append(
                    {
                        "topology": kind,
                        "n": n,
                        "m": m,
                        "loss_rate": rate,
                        "loss_ratio": ratio,
                        "seed": seed,
                        "afr": round(rep.afr, 6),
                        "tm_accuracy": round(rep.tm_accuracy, 6),
                        "total_cost": rep.total_cost_bytes,
                        "baseline_cost": rep.baseline_cost_bytes,
                    }
                )
    return records


def run_churn_experiment(
    n: int = 200,
    m0: int = 10000,
    rounds: int = 60,
    churn_max: int = 2000,
    recompute_interval: int = 5,
    seed: int = 0,
    model: CostModel = DEFAULT_MODEL,
    trace: list | None = None,
    churn_model: str = "split",
) -> list[dict]:
    """Patched scheme versus a twin re-solved every round.

    ``churn_model="split"`` draws one event count uniformly from
    ``[0, churn_max]`` and makes each event an arrival or an expiry with equal
    odds, so at most ``churn_max`` events happen per round.
    ``"independent"`` draws the arrival and the expiry counts separately from
    ``[0, churn_max]``; the population then random-walks far from ``m0``.
    Expiries pick among flows active at the start of the round (capped at
    that count). Costs are taken after the round's events and recompute
    check. Events are appended to ``trace`` when given.
    """
    if churn_model not in ("split", "independent"):
        raise ValueError(f"unknown churn model {churn_model!r}")
    topo = make_topology("er", n, _sub_seed(seed, 0))
    router = simkit.Router(topo)
    flows = simkit.gen_flows(topo, m0, seed=_sub_seed(seed, 1, m0), router=router)
    state = initial_state(topo, flows, recompute_interval, model)
    rng = simkit.rng_for(seed, 6)
    next_id = m0
    records = []
    for t in range(rounds):
        if churn_model == "split":
            events = int(rng.integers(0, churn_max + 1))
            n_arrive = int(rng.binomial(events, 0.5))
            n_expire = events - n_arrive
        else:
            n_arrive = int(rng.integers(0, churn_max + 1))
            n_expire = int(rng.integers(0, churn_max + 1))
        ids = np.array(sorted(state.active_flows), dtype=np.int64)
        n_expire = min(n_expire, ids.size)
        gone = sorted(rng.choice(ids, size=n_expire, replace=False).tolist()) if n_expire else []
        new = simkit.gen_flows(
            topo, n_arrive, seed=_sub_seed(seed, 7, t), first_id=next_id, router=router
        )
        next_id += n_arrive
        if trace is not None:
            trace.extend(ChurnEvent(t, "arrive", f.id, f) for f in new)
            trace.extend(ChurnEvent(t, "expire", f) for f in gone)

        state = apply_churn(state, new, gone)
        state = maybe_recompute(state, topo, model)
        active = [state.active_flows[k] for k in sorted(state.active_flows)]
        fresh, _ = solve(topo, active, model)
        records.append(
            {
                "round": t,
                "arrivals": n_arrive,
                "expiries": n_expire,
                "active_flows": len(active),
                "patched_cost": state_cost(state, model),
                "recompute_cost": scheme_cost(model, fresh, flows_at(active, topo.n)),
                "baseline_cost": per_flow_baseline_cost(model, len(active)),
                "uncovered": len(uncovered_flows(state)),
            }
        )
    return records


# --- output ---------------------------------------------------------------------


def write_records(records: Sequence[dict], fh, fmt: str = "csv") -> None:
    """CSV with a header row, or one JSON object per line."""
    if fmt == "json":
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=False) + "\n")
        return
    if fmt != "csv":
        raise ValueError(f"unknown record format {fmt!r}")
    if not records:
        return
    writer = csv.DictWriter(fh, fieldnames=list(records[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(records)
