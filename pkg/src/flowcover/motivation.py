"""Six-switch, six-flow example network used throughout the tests and demos.

Only part of the original example is recoverable: the flow endpoints, the
four flows crossing S3 (f1, f2, f4, f5) and the optimal pair {S3, S6}. The
host placement and paths below are one reconstruction consistent with those
facts, not ground truth. Hosts sit on switches (H1@S1, H2@S2, H3@S4, H4@S6,
H5@S5) and a path includes both endpoint switches.

Switch ``Sk`` has id ``k - 1``; flow ``fk`` has id ``k``.

    S1 {f1 f2 f3}   S2 {f1 f4 f5}   S3 {f1 f2 f4 f5}
    S4 {f2}         S5 {f5 f6}      S6 {f3 f4 f6}
"""

from __future__ import annotations

from .model import Flow, Topology

S1, S2, S3, S4, S5, S6 = range(6)

LINKS = frozenset(
    {(S1, S3), (S2, S3), (S3, S4), (S1, S6), (S3, S6), (S3, S5), (S5, S6)}
)

PATHS = {
    1: (S1, S3, S2),  # H1 -> H2
    2: (S1, S3, S4),  # H1 -> H3
    3: (S1, S6),  # H1 -> H4
    4: (S2, S3, S6),  # H2 -> H4
    5: (S5, S3, S2),  # H5 -> H2
    6: (S6, S5),  # H4 -> H5
}

# Optimum under the 78-byte reply header: (122+78+4*96) + (122+78+3*96).
OPTIMAL_COST = 1072
# The same two polls priced with an 88-byte reply header, a commonly quoted figure.
PRINTED_OPTIMAL_COST = 1092
PER_FLOW_COST = 1776


def motivation_network(volume_bytes: int = 15_000) -> tuple[Topology, list[Flow]]:
    topo = Topology(6, LINKS)
    flows = [Flow(f, path, volume_bytes) for f, path in sorted(PATHS.items())]
    return topo, flows
