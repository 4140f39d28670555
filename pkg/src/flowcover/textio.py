"""Line-oriented text formats for topologies, flows, schemes and cover solutions.

Grammar (one record per line, fields separated by single spaces, ``#`` starts
a comment line, blank lines are ignored)::

    topo n=<n>
    link <u> <v>                    u < v
    loss <v>
    coord <v> <x> <y>               floats in repr form (round-trips exactly)
    flow id=<i> path=<v1,v2,...> vol=<bytes> pkt=<bytes>

    scheme
    pollall <v>
    single <flow> <v>

    solution weight=<bytes> proven=<0|1>
    pick <set index>

Writers emit records in sorted order (``pick`` lines keep selection order),
so equal objects serialize to equal bytes.
"""

from __future__ import annotations

import io
from typing import Iterable

from .model import Flow, PollingScheme, Topology, check_flow
from .optimizer import CoverSolution


def _kv(fields):
    try:
        return dict(item.split("=", 1) for item in fields)
    except ValueError:
        raise ValueError(f"malformed key=value fields: {' '.join(fields)!r}") from None


def _lines(text):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield no, line.split()


def format_flow(flow: Flow) -> str:
    path = ",".join(map(str, flow.path))
    return f"flow id={flow.id} path={path} vol={flow.volume_bytes} pkt={flow.packet_size_bytes}"


def parse_flow(fields) -> Flow:
    kv = _kv(fields)
    return Flow(
        int(kv["id"]),
        tuple(int(v) for v in kv["path"].split(",")),
        int(kv["vol"]),
        int(kv["pkt"]),
    )


def dumps_network(topo: Topology, flows: Iterable[Flow] = ()) -> str:
    out = io.StringIO()
    out.write(f"topo n={topo.n}\n")
    for u, v in sorted(topo.links):
        out.write(f"link {u} {v}\n")
    for v in sorted(topo.loss_switches):
        out.write(f"loss {v}\n")
    if topo.coordinates is not None:
        for v, (x, y) in enumerate(topo.coordinates):
            out.write(f"coord {v} {x!r} {y!r}\n")
    for flow in sorted(flows, key=lambda f: f.id):
        out.write(format_flow(flow) + "\n")
    return out.getvalue()


def loads_network(text: str) -> tuple[Topology, list[Flow]]:
    """Parse a topology with optional flows; checks connectivity and flow paths."""
    n = None
    links, loss, coords, flows = [], [], {}, []
    for no, (tag, *rest) in _lines(text):
        try:
            if tag == "topo":
                n = int(_kv(rest)["n"])
            elif tag == "link":
                links.append((int(rest[0]), int(rest[1])))
            elif tag == "loss":
                loss.append(int(rest[0]))
            elif tag == "coord":
                coords[int(rest[0])] = (float(rest[1]), float(rest[2]))
            elif tag == "flow":
                flows.append(parse_flow(rest))
            else:
                raise ValueError(f"unknown record {tag!r}")
        except (IndexError, KeyError, ValueError) as exc:
            raise ValueError(f"line {no}: {exc}") from None
    if n is None:
        raise ValueError("missing 'topo n=<n>' header")
    coordinates = None
    if coords:
        if sorted(coords) != list(range(n)):
            raise ValueError("coordinates must be given for every switch")
        coordinates = tuple(coords[v] for v in range(n))
    topo = Topology(n, frozenset(links), frozenset(loss), coordinates)
    if not topo.is_connected():
        raise ValueError("topology is not connected")
    seen = set()
    for flow in flows:
        check_flow(topo, flow)
        if flow.id in seen:
            raise ValueError(f"duplicate flow id {flow.id}")
        seen.add(flow.id)
    return topo, flows


def dumps_scheme(scheme: PollingScheme) -> str:
    lines = ["scheme"]
    lines += [f"pollall {v}" for v in sorted(scheme.poll_all)]
    lines += [f"single {f} {v}" for f, v in sorted(scheme.single_polls)]
    return "\n".join(lines) + "\n"


def loads_scheme(text: str) -> PollingScheme:
    poll_all, singles = set(), set()
    header = False
    for no, (tag, *rest) in _lines(text):
        if tag == "scheme":
            header = True
        elif tag == "pollall":
            poll_all.add(int(rest[0]))
        elif tag == "single":
            singles.add((int(rest[0]), int(rest[1])))
        else:
            raise ValueError(f"line {no}: unknown record {tag!r}")
    if not header:
        raise ValueError("missing 'scheme' header")
    return PollingScheme(frozenset(poll_all), frozenset(singles))


def dumps_solution(solution: CoverSolution) -> str:
    lines = [f"solution weight={solution.total_weight} proven={int(solution.proven)}"]
    lines += [f"pick {i}" for i in solution.chosen]
    return "\n".join(lines) + "\n"


def loads_solution(text: str) -> CoverSolution:
    head = None
    picks = []
    for no, (tag, *rest) in _lines(text):
        if tag == "solution":
            head = _kv(rest)
        elif tag == "pick":
            picks.append(int(rest[0]))
        else:
            raise ValueError(f"line {no}: unknown record {tag!r}")
    if head is None:
        raise ValueError("missing 'solution' header")
    return CoverSolution(tuple(picks), int(head["weight"]), head.get("proven", "1") == "1")
