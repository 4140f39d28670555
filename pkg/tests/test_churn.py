from __future__ import annotations

import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowcover import simkit
from flowcover.churn import (
    ChurnEvent,
    ChurnState,
    apply_churn,
    format_event,
    initial_state,
    maybe_recompute,
    on_flow_arrival,
    on_flow_expiry,
    parse_event,
    read_trace,
    replay_trace,
    state_cost,
    uncovered_flows,
    write_trace,
)
from flowcover.model import DEFAULT_MODEL, Flow, PollingScheme, Topology, flows_at, scheme_cost
from flowcover.optimizer import solve


def line(n):
    return Topology(n, frozenset((i, i + 1) for i in range(n - 1)))


def state_with(poll_all=(), flows=(), singles=(), interval=5, counter=0):
    return ChurnState(
        PollingScheme(frozenset(poll_all), frozenset(singles)),
        {f.id: f for f in flows},
        counter,
        interval,
    )


def test_arrival_through_poll_all_switch_leaves_scheme():
    s = state_with(poll_all={2})
    after = on_flow_arrival(s, Flow(0, (1, 2, 3), 1500))
    assert after.scheme == s.scheme
    assert 0 in after.active_flows


def test_arrival_disjoint_adds_single_at_last_switch():
    s = state_with(poll_all={0})
    after = on_flow_arrival(s, Flow(4, (2, 3), 1500))
    assert after.scheme.single_polls == {(4, 3)}
    assert after.scheme.poll_all == {0}


def test_arrival_into_empty_scheme():
    after = on_flow_arrival(state_with(), Flow(1, (0, 1), 1500))
    assert after.scheme.single_polls == {(1, 1)}


def test_arrival_duplicate_id_rejected():
    f = Flow(1, (0, 1), 1500)
    with pytest.raises(ValueError, match="already active"):
        on_flow_arrival(state_with(flows=[f], singles={(1, 1)}), f)


def test_expiry_of_single_polled_flow():
    f = Flow(1, (0, 1), 1500)
    after = on_flow_expiry(state_with(flows=[f], singles={(1, 1)}), 1)
    assert after.scheme.single_polls == frozenset()
    assert after.active_flows == {}


def test_expiry_of_poll_all_covered_flow_drops_one_entry_per_polled_switch():
    a, b = Flow(0, (0, 1, 2), 1500), Flow(1, (1, 2), 1500)
    s = state_with(poll_all={1, 2}, flows=[a, b])
    after = on_flow_expiry(s, 0)
    assert after.scheme == s.scheme
    assert state_cost(s) - state_cost(after) == 2 * 96


def test_expiry_of_last_flow_leaves_empty_replies():
    s = state_with(poll_all={1, 2}, flows=[Flow(0, (1, 2), 1500)])
    assert state_cost(on_flow_expiry(s, 0)) == 2 * (122 + 78)


def test_expiry_unknown_id():
    with pytest.raises(KeyError):
        on_flow_expiry(state_with(), 3)


def test_state_cost_matches_scheme_cost():
    topo = simkit.gen_erdos_renyi(20, seed=1)
    flows = simkit.gen_flows(topo, 200, seed=1)
    s = initial_state(topo, flows)
    assert state_cost(s) == scheme_cost(DEFAULT_MODEL, s.scheme, flows_at(flows, topo.n))


def test_recompute_counter_below_interval():
    s = state_with(counter=3, flows=[Flow(0, (0, 1), 1500)], singles={(0, 1)})
    after = maybe_recompute(s, line(2))
    assert after.polls_since_recompute == 4 and after.scheme == s.scheme


def test_recompute_at_interval_gives_fresh_greedy():
    topo = simkit.gen_erdos_renyi(15, seed=4)
    flows = simkit.gen_flows(topo, 60, seed=4)
    # a deliberately poor scheme: one single poll per flow
    s = state_with(flows=flows, singles={(f.id, f.path[-1]) for f in flows}, counter=4)
    after = maybe_recompute(s, topo)
    assert after.polls_since_recompute == 0
    assert after.scheme == solve(topo, flows)[0]


def test_interval_one_recomputes_every_round():
    topo = simkit.gen_erdos_renyi(15, seed=4)
    s = initial_state(topo, simkit.gen_flows(topo, 30, seed=4), recompute_interval=1)
    arrivals = simkit.gen_flows(topo, 10, seed=5, first_id=100)
    s = maybe_recompute(apply_churn(s, arrivals), topo)
    assert s.polls_since_recompute == 0
    assert s.scheme == solve(topo, sorted(s.active_flows.values(), key=lambda f: f.id))[0]


def test_bad_interval():
    with pytest.raises(ValueError):
        state_with(interval=0)


# --- properties ------------------------------------------------------------------


@st.composite
def churn_scripts(draw):
    seed = draw(st.integers(0, 2**32))
    topo = simkit.gen_erdos_renyi(12, seed=seed)
    flows = simkit.gen_flows(topo, draw(st.integers(0, 20)), seed=seed)
    pool = simkit.gen_flows(topo, 15, seed=seed + 1, first_id=1000)
    ops = draw(st.lists(st.tuples(st.booleans(), st.integers(0, 10**6)), max_size=30))
    return topo, flows, pool, ops


@settings(max_examples=60, deadline=None)
@given(churn_scripts())
def test_coverage_preserved_under_churn(script):
    topo, flows, pool, ops = script
    s = initial_state(topo, flows, recompute_interval=3)
    spare = list(pool)
    for arrive, pick in ops:
        if arrive and spare:
            s = on_flow_arrival(s, spare.pop())
        elif s.active_flows:
            ids = sorted(s.active_flows)
            s = on_flow_expiry(s, ids[pick % len(ids)])
        s = maybe_recompute(s, topo)
        assert uncovered_flows(s) == []
        assert {f for f, _ in s.scheme.single_polls} <= set(s.active_flows)


@settings(max_examples=60, deadline=None)
@given(churn_scripts())
def test_arrival_then_expiry_restores_scheme(script):
    topo, flows, pool, _ = script
    s = initial_state(topo, flows)
    for f in pool:
        back = on_flow_expiry(on_flow_arrival(s, f), f.id)
        assert back.scheme == s.scheme
        assert dict(back.active_flows) == dict(s.active_flows)


# --- traces ---------------------------------------------------------------------


def test_event_format_round_trip():
    arrive = ChurnEvent(3, "arrive", 7, Flow(7, (1, 4, 2), 4500, 1500))
    assert format_event(arrive) == "t=3 arrive id=7 path=1,4,2 vol=4500 pkt=1500"
    assert parse_event(format_event(arrive)) == arrive
    expire = ChurnEvent(9, "expire", 7)
    assert format_event(expire) == "t=9 expire id=7"
    assert parse_event(format_event(expire)) == expire


@pytest.mark.parametrize("bad", ["3 expire id=1", "t=1 vanish id=2"])
def test_parse_event_rejects(bad):
    with pytest.raises(ValueError):
        parse_event(bad)


def test_trace_replay_matches_direct_application():
    topo = simkit.gen_erdos_renyi(20, seed=2)
    flows = simkit.gen_flows(topo, 50, seed=2)
    arrivals = simkit.gen_flows(topo, 12, seed=3, first_id=50)
    events = [ChurnEvent(t % 4, "arrive", f.id, f) for t, f in enumerate(arrivals)]
    events += [ChurnEvent(2, "expire", 3), ChurnEvent(3, "expire", 51)]
    buf = io.StringIO()
    write_trace(events, buf)
    buf.seek(0)
    parsed = read_trace(buf)
    assert parsed == events

    start = initial_state(topo, flows, recompute_interval=2)
    replayed = list(replay_trace(start, parsed, topo, rounds=6))
    assert [t for t, _ in replayed] == list(range(6))

    s = start
    for t in range(6):
        batch = [e for e in events if e.round == t]
        s = apply_churn(s, [e.flow for e in batch if e.kind == "arrive"],
                        [e.flow_id for e in batch if e.kind == "expire"])
        s = maybe_recompute(s, topo)
        assert replayed[t][1] == s
