"""Keeping a polling scheme valid while flows come and go.

Arrivals already crossing a poll-all switch need nothing; any other arrival
gets a single-flow poll at the last switch on its path. Expiries drop the
flow's single poll if it has one. A full re-solve runs every
``recompute_interval`` polling rounds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .model import DEFAULT_MODEL, CostModel, Flow, PollingScheme, Topology, poll_cost
from .optimizer import solve


@dataclass(frozen=True)
class ChurnState:
    scheme: PollingScheme
    active_flows: Mapping[int, Flow]
    polls_since_recompute: int = 0
    recompute_interval: int = 5

    def __post_init__(self):
        if self.recompute_interval < 1:
            raise ValueError("recompute interval must be at least one round")


def initial_state(
    topo: Topology,
    flows: Iterable[Flow],
    recompute_interval: int = 5,
    model: CostModel = DEFAULT_MODEL,
) -> ChurnState:
    """Solve the starting flow set with the greedy optimizer."""
    flows = list(flows)
    scheme, _ = solve(topo, flows, model)
    return ChurnState(scheme, {f.id: f for f in flows}, 0, recompute_interval)


def _arrive(poll_all, singles, active, flow):
    if flow.id in active:
        raise ValueError(f"flow {flow.id} is already active")
    active[flow.id] = flow
    if not any(v in poll_all for v in flow.path):
        singles[flow.id] = flow.path[-1]


def _expire(singles, active, flow_id):
    if flow_id not in active:
        raise KeyError(f"flow {flow_id} is not active")
    del active[flow_id]
    singles.pop(flow_id, None)


def apply_churn(
    state: ChurnState, arrivals: Iterable[Flow] = (), expiries: Iterable[int] = ()
) -> ChurnState:
    """Apply a batch of events (arrivals first, then expiries) in one copy."""
    active = dict(state.active_flows)
    singles = dict(state.scheme.single_polls)
    poll_all = state.scheme.poll_all
    for flow in arrivals:
        _arrive(poll_all, singles, active, flow)
    for flow_id in expiries:
        _expire(singles, active, flow_id)
    scheme = PollingScheme(poll_all, frozenset(singles.items()))
    return replace(state, scheme=scheme, active_flows=active)


def on_flow_arrival(state: ChurnState, flow: Flow) -> ChurnState:
    return apply_churn(state, arrivals=(flow,))


def on_flow_expiry(state: ChurnState, flow_id: int) -> ChurnState:
    return apply_churn(state, expiries=(flow_id,))


def maybe_recompute(
    state: ChurnState, topo: Topology, model: CostModel = DEFAULT_MODEL
) -> ChurnState:
    count = state.polls_since_recompute + 1
    if count < state.recompute_interval:
        return replace(state, polls_since_recompute=count)
    flows = [state.active_flows[k] for k in sorted(state.active_flows)]
    scheme, _ = solve(topo, flows, model)
    return replace(state, scheme=scheme, polls_since_recompute=0)


def state_cost(state: ChurnState, model: CostModel = DEFAULT_MODEL) -> int:
    """Bytes for one collection round under the state's current scheme.

    Poll-all replies shrink with the flows still crossing the switch; an idle
    polled switch still pays request plus an empty reply.
    """
    load = dict.fromkeys(state.scheme.poll_all, 0)
    for flow in state.active_flows.values():
        for v in flow.path:
            if v in load:
                load[v] += 1
    total = sum(poll_cost(model, k) for k in load.values())
    return total + len(state.scheme.single_polls) * model.single_poll_cost


def uncovered_flows(state: ChurnState) -> list[int]:
    """Active flow ids the scheme misses; empty whenever the invariants hold."""
    singles = {f for f, _ in state.scheme.single_polls}
    poll_all = state.scheme.poll_all
    return sorted(
        f.id
        for f in state.active_flows.values()
        if f.id not in singles and not any(v in poll_all for v in f.path)
    )


# --- event traces -----------------------------------------------------------


@dataclass(frozen=True)
class ChurnEvent:
    round: int
    kind: str  # "arrive" or "expire"
    flow_id: int
    flow: Flow | None = None


def format_event(event: ChurnEvent) -> str:
    if event.kind == "arrive":
        f = event.flow
        path = ",".join(map(str, f.path))
        return (
            f"t={event.round} arrive id={f.id} path={path} "
            f"vol={f.volume_bytes} pkt={f.packet_size_bytes}"
        )
    return f"t={event.round} expire id={event.flow_id}"


def parse_event(line: str) -> ChurnEvent:
    head, kind, *fields = line.split()
    if not head.startswith("t="):
        raise ValueError(f"bad trace line: {line!r}")
    t = int(head[2:])
    kv = dict(item.split("=", 1) for item in fields)
    if kind == "expire":
        return ChurnEvent(t, kind, int(kv["id"]))
    if kind == "arrive":
        flow = Flow(
            int(kv["id"]),
            tuple(int(v) for v in kv["path"].split(",")),
            int(kv["vol"]),
            int(kv["pkt"]),
        )
        return ChurnEvent(t, kind, flow.id, flow)
    raise ValueError(f"unknown trace event {kind!r}")


def write_trace(events: Iterable[ChurnEvent], fh) -> None:
    for event in events:
        fh.write(format_event(event) + "\n")


def read_trace(fh) -> list[ChurnEvent]:
    return [parse_event(line) for line in fh if line.strip() and not line.startswith("#")]


def replay_trace(
    state: ChurnState,
    events: Iterable[ChurnEvent],
    topo: Topology,
    model: CostModel = DEFAULT_MODEL,
    rounds: int | None = None,
):
    """Yield ``(round, state)`` after each round's events and recompute check.

    With ``rounds`` given, every round ``0..rounds-1`` is replayed, including
    quiet ones; otherwise only rounds that appear in the trace.
    """
    by_round = {}
    for e in events:
        by_round.setdefault(e.round, []).append(e)
    order = range(rounds) if rounds is not None else sorted(by_round)
    for t in order:
        batch = by_round.get(t, [])
        state = apply_churn(
            state,
            [e.flow for e in batch if e.kind == "arrive"],
            [e.flow_id for e in batch if e.kind == "expire"],
        )
        state = maybe_recompute(state, topo, model)
        yield t, state
