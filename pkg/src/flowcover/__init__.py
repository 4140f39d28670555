"""Low-cost flow statistics polling for SDN via weighted set cover."""

from .model import (
    DEFAULT_MODEL,
    CostModel,
    Flow,
    PollingScheme,
    Topology,
    covers,
    flows_at,
    per_flow_baseline_cost,
    reply_length,
    scheme_cost,
)
from .optimizer import (
    CandidateSet,
    CoverSolution,
    PollAll,
    SingleFlow,
    WeightedSetSystem,
    construct_weighted_sets,
    decode_scheme,
    exact_cover,
    greedy_cover,
    solve,
)

__all__ = [
    "DEFAULT_MODEL",
    "CandidateSet",
    "CostModel",
    "CoverSolution",
    "Flow",
    "PollAll",
    "PollingScheme",
    "SingleFlow",
    "Topology",
    "WeightedSetSystem",
    "construct_weighted_sets",
    "covers",
    "decode_scheme",
    "exact_cover",
    "flows_at",
    "greedy_cover",
    "per_flow_baseline_cost",
    "reply_length",
    "scheme_cost",
    "solve",
]

__version__ = "0.1.0"
