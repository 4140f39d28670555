"""Domain types and the OpenFlow 1.0 flow-statistics byte-cost model.

All types are immutable; every function here is pure.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping


@dataclass(frozen=True)
class CostModel:
    """On-wire lengths (bytes) of flow-statistics messages."""

    l_req: int = 122
    l_reply_header: int = 78
    l_single_flow_entry: int = 96

    def __post_init__(self):
        for name in ("l_req", "l_reply_header", "l_single_flow_entry"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def single_poll_cost(self) -> int:
        return self.l_req + reply_length(self, 1)


DEFAULT_MODEL = CostModel()


@dataclass(frozen=True)
class Topology:
    """Undirected switch graph on switch ids ``0..n-1``.

    ``links`` holds normalized ``(u, v)`` pairs with ``u < v``. ``coordinates``
    is only set for geometric generators (Waxman).
    """

    n: int
    links: frozenset
    loss_switches: frozenset = frozenset()
    coordinates: tuple | None = None
    _adj: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("topology needs at least one switch")
        links = frozenset(_norm_link(u, v) for u, v in self.links)
        for u, v in links:
            if u == v:
                raise ValueError(f"self-loop on switch {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"link ({u}, {v}) has an unknown endpoint")
        loss = frozenset(int(v) for v in self.loss_switches)
        if any(not 0 <= v < self.n for v in loss):
            raise ValueError("loss switch outside topology")
        if self.coordinates is not None and len(self.coordinates) != self.n:
            raise ValueError("coordinates must cover every switch")
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "loss_switches", loss)
        adj = [[] for _ in range(self.n)]
        for u, v in links:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    @property
    def switches(self) -> range:
        return range(self.n)

    def neighbors(self, v: int) -> tuple:
        """Neighbors of ``v`` in ascending id order."""
        return self._adj[v]

    def has_link(self, u: int, v: int) -> bool:
        return _norm_link(u, v) in self.links

    def is_connected(self) -> bool:
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for w in self._adj[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == self.n

    def with_loss_switches(self, loss_switches: Iterable[int]) -> Topology:
        return Topology(self.n, self.links, frozenset(loss_switches), self.coordinates)


def _norm_link(u, v):
    u, v = int(u), int(v)
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Flow:
    id: int
    path: tuple
    volume_bytes: int
    packet_size_bytes: int = 1500

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(int(v) for v in self.path))
        if not self.path:
            raise ValueError(f"flow {self.id}: empty path")
        if len(set(self.path)) != len(self.path):
            raise ValueError(f"flow {self.id}: path repeats a switch")
        if self.packet_size_bytes <= 0:
            raise ValueError(f"flow {self.id}: packet size must be positive")
        if self.volume_bytes < 0 or self.volume_bytes % self.packet_size_bytes:
            raise ValueError(
                f"flow {self.id}: volume must be a nonnegative multiple of the packet size"
            )

    @property
    def packets(self) -> int:
        return self.volume_bytes // self.packet_size_bytes


def check_flow(topo: Topology, flow: Flow) -> None:
    """Raise ValueError unless ``flow.path`` is a walk over existing links of ``topo``."""
    for v in flow.path:
        if not 0 <= v < topo.n:
            raise ValueError(f"flow {flow.id}: switch {v} is not in the topology")
    for u, v in zip(flow.path, flow.path[1:]):
        if not topo.has_link(u, v):
            raise ValueError(f"flow {flow.id}: no link between {u} and {v}")


@dataclass(frozen=True)
class PollingScheme:
    """Poll-all switches plus ``(flow id, switch id)`` single-flow polls."""

    poll_all: frozenset = frozenset()
    single_polls: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "poll_all", frozenset(int(v) for v in self.poll_all))
        singles = frozenset((int(f), int(v)) for f, v in self.single_polls)
        flows = [f for f, _ in singles]
        if len(flows) != len(set(flows)):
            raise ValueError("a flow appears in more than one single poll")
        object.__setattr__(self, "single_polls", singles)

    def single_switch(self, flow_id: int) -> int | None:
        for f, v in self.single_polls:
            if f == flow_id:
                return v
        return None


def check_scheme(scheme: PollingScheme, flows: Iterable[Flow]) -> None:
    """Raise ValueError if a single poll names a switch off its flow's path."""
    paths = {f.id: f.path for f in flows}
    for f, v in scheme.single_polls:
        if f not in paths:
            raise ValueError(f"single poll for unknown flow {f}")
        if v not in paths[f]:
            raise ValueError(f"single poll ({f}, {v}): switch not on the flow path")


def reply_length(model: CostModel, n_entries: int) -> int:
    return model.l_reply_header + n_entries * model.l_single_flow_entry


def poll_cost(model: CostModel, n_entries: int) -> int:
    """Request plus reply bytes for one poll returning ``n_entries`` flow entries."""
    return model.l_req + reply_length(model, n_entries)


def flows_at(flows: Iterable[Flow], n: int) -> dict[int, set]:
    """Map every switch ``0..n-1`` to the ids of flows whose path crosses it."""
    table = {v: set() for v in range(n)}
    for flow in flows:
        for v in flow.path:
            table[v].add(flow.id)
    return table


def scheme_cost(model: CostModel, scheme: PollingScheme, flows_at: Mapping[int, set]) -> int:
    total = 0
    for v in scheme.poll_all:
        if v not in flows_at:
            raise ValueError(f"poll-all switch {v} is unknown")
        total += poll_cost(model, len(flows_at[v]))
    return total + len(scheme.single_polls) * model.single_poll_cost


def per_flow_baseline_cost(model: CostModel, flow_count: int) -> int:
    return flow_count * model.single_poll_cost


def covers(scheme: PollingScheme, flow: Flow) -> bool:
    if any(v in scheme.poll_all for v in flow.path):
        return True
    return any(f == flow.id for f, _ in scheme.single_polls)
