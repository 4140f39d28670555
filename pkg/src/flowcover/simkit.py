"""Seeded generators for topologies, flows, loss switches and flow counters.

Every generator takes an integer seed and owns its random stream, so
identical ``(parameters, seed)`` always reproduce identical objects. The
streams come from numpy's PCG64, which is platform independent.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import Flow, Topology

PACKET_SIZE = 1500
DEFAULT_VOLUME_RANGE = (15_000, 15_000_000)
WAXMAN_ALPHA = 0.15
WAXMAN_BETA = 0.2
MAX_ATTEMPTS = 100


class GenerationError(RuntimeError):
    """A generator could not satisfy its constraints."""


def rng_for(seed: int, *tags: int) -> np.random.Generator:
    """Independent stream for ``seed``; ``tags`` split it into sub-streams."""
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *tags])))


def default_er_p(n: int) -> float:
    return min(1.0, 2 * math.log(n) / n)


def _connected_topology(draw, rng):
    for _ in range(MAX_ATTEMPTS):
        topo = draw(rng)
        if topo.is_connected():
            return topo
    raise GenerationError(f"no connected graph after {MAX_ATTEMPTS} attempts")


def gen_erdos_renyi(n: int, p: float | None = None, seed: int = 0) -> Topology:
    """G(n, p) graph, resampled until connected. ``p`` defaults to 2 ln(n) / n."""
    if n < 2:
        raise ValueError("need at least two switches")
    p = default_er_p(n) if p is None else p
    if not 0 < p <= 1:
        raise ValueError("edge probability must be in (0, 1]")
    iu, ju = np.triu_indices(n, k=1)

    def draw(rng):
        keep = rng.random(iu.size) < p
        return Topology(n, frozenset(zip(iu[keep].tolist(), ju[keep].tolist())))

    return _connected_topology(draw, rng_for(seed, 1))


def gen_waxman(
    n: int, alpha: float = WAXMAN_ALPHA, beta: float = WAXMAN_BETA, seed: int = 0
) -> Topology:
    """Waxman graph on uniform points in the unit square.

    Pair ``(u, v)`` is linked with probability ``alpha * exp(-d / (beta * L))``
    where ``L`` is the largest pairwise distance. Points and links are redrawn
    together until the graph is connected.
    """
    if n < 2:
        raise ValueError("need at least two switches")
    if not (0 < alpha <= 1 and 0 < beta):
        raise ValueError("alpha must be in (0, 1] and beta positive")
    iu, ju = np.triu_indices(n, k=1)

    def draw(rng):
        pts = rng.random((n, 2))
        d = np.hypot(*(pts[iu] - pts[ju]).T)
        L = d.max()
        prob = alpha * np.exp(-d / (beta * L)) if L > 0 else np.full(d.shape, alpha)
        keep = rng.random(iu.size) < prob
        coords = tuple((float(x), float(y)) for x, y in pts)
        return Topology(n, frozenset(zip(iu[keep].tolist(), ju[keep].tolist())), coordinates=coords)

    return _connected_topology(draw, rng_for(seed, 2))


def mark_loss_switches(topo: Topology, ratio: float, seed: int) -> Topology:
    if not 0 <= ratio <= 1:
        raise ValueError("loss switch ratio must be in [0, 1]")
    count = math.floor(ratio * topo.n + 0.5)
    picked = rng_for(seed, 3).choice(topo.n, size=count, replace=False)
    return topo.with_loss_switches(int(v) for v in picked)


def bfs_parents(topo: Topology, src: int) -> list:
    """Breadth-first tree from ``src``; each node keeps its first discoverer.

    Neighbors are expanded in ascending id order, so among equal-length paths
    the one through lower-numbered switches wins.
    """
    parent = [-1] * topo.n
    parent[src] = src
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for w in topo.neighbors(u):
            if parent[w] < 0:
                parent[w] = u
                queue.append(w)
    return parent


def shortest_path(topo: Topology, src: int, dst: int, parents=None) -> tuple:
    parent = bfs_parents(topo, src) if parents is None else parents
    if parent[dst] < 0:
        raise ValueError(f"switch {dst} unreachable from {src}")
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    path.reverse()
    return tuple(path)


class Router:
    """Memoizing shortest-path router; one BFS tree per source switch."""

    def __init__(self, topo: Topology):
        self.topo = topo
        self._trees = {}
        self._paths = {}

    def path(self, src: int, dst: int) -> tuple:
        key = (src, dst)
        p = self._paths.get(key)
        if p is None:
            tree = self._trees.get(src)
            if tree is None:
                tree = self._trees[src] = bfs_parents(self.topo, src)
            p = self._paths[key] = shortest_path(self.topo, src, dst, tree)
        return p


def gen_flows(
    topo: Topology,
    m: int,
    volume_range: tuple = DEFAULT_VOLUME_RANGE,
    seed: int = 0,
    first_id: int = 0,
    packet_size: int = PACKET_SIZE,
    router: Router | None = None,
) -> list[Flow]:
    """``m`` flows between uniform ordered switch pairs, routed on shortest paths.

    Volumes are log-uniform over ``volume_range`` and rounded down to whole
    packets (never below one packet).
    """
    if m < 0:
        raise ValueError("flow count must be nonnegative")
    if topo.n < 2 and m:
        raise ValueError("need two switches to place a flow")
    lo, hi = volume_range
    if not 0 < lo <= hi:
        raise ValueError("volume range must satisfy 0 < low <= high")
    rng = rng_for(seed, 4)
    src = rng.integers(0, topo.n, size=m)
    dst = rng.integers(0, topo.n - 1, size=m) if m else src
    dst = dst + (dst >= src)
    vol = np.exp(rng.uniform(math.log(lo), math.log(hi), size=m))
    packets = np.maximum(np.floor(vol / packet_size).astype(np.int64), 1)
    router = router or Router(topo)
    return [
        Flow(first_id + k, router.path(s, d), p * packet_size, packet_size)
        for k, (s, d, p) in enumerate(zip(src.tolist(), dst.tolist(), packets.tolist()))
    ]


@dataclass(frozen=True)
class CounterTable:
    """Bytes each flow's entry counted at each switch along its path.

    ``counts[k, i]`` belongs to ``flow_ids[k]`` at position ``i`` of its path;
    positions past the path end hold -1.
    """

    flow_ids: np.ndarray
    paths: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "_row", {int(f): k for k, f in enumerate(self.flow_ids)})

    def at(self, switch: int, flow_id: int) -> int:
        k = self._row[flow_id]
        hits = np.flatnonzero(self.paths[k] == switch)
        if hits.size == 0:
            raise KeyError(f"flow {flow_id} does not cross switch {switch}")
        return int(self.counts[k, hits[0]])

    def row(self, flow_id: int) -> np.ndarray:
        k = self._row[flow_id]
        return self.counts[k][self.paths[k] >= 0]


def _padded_paths(flows: Sequence[Flow]) -> np.ndarray:
    width = max((len(f.path) for f in flows), default=0)
    paths = np.full((len(flows), width), -1, dtype=np.int64)
    for k, f in enumerate(flows):
        paths[k, : len(f.path)] = f.path
    return paths


def simulate_counters(
    topo: Topology, flows: Sequence[Flow], loss_rate: float, seed: int
) -> CounterTable:
    """Push every packet down its path and record per-switch byte counters.

    A packet is counted at a loss switch before it may be dropped there, so
    the dropping switch still sees it. Each packet is dropped independently;
    the surviving packet count after one lossy hop is drawn as a binomial,
    which has exactly the same distribution as per-packet draws.
    """
    if not 0 <= loss_rate <= 1:
        raise ValueError("loss rate must be in [0, 1]")
    rng = rng_for(seed, 5)
    paths = _padded_paths(flows)
    m, width = paths.shape
    alive = np.array([f.packets for f in flows], dtype=np.int64)
    pkt = np.array([f.packet_size_bytes for f in flows], dtype=np.int64)
    counts = np.full((m, width), -1, dtype=np.int64)
    lossy = np.zeros(topo.n + 1, dtype=bool)
    lossy[list(topo.loss_switches)] = True  # index -1 (padding) stays False
    for i in range(width):
        col = paths[:, i]
        on = col >= 0
        counts[on, i] = alive[on] * pkt[on]
        hit = on & lossy[col]
        if hit.any() and loss_rate > 0:
            alive[hit] = rng.binomial(alive[hit], 1.0 - loss_rate)
    ids = np.array([f.id for f in flows], dtype=np.int64)
    return CounterTable(ids, paths, counts)
