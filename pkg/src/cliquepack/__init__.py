"""Edge-disjoint clique packings in G(n, 1/2) and nearly-disjoint set families."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    CapacityError,
    DomainError,
    Hypergraph,
    Params,
    RegimeError,
    SetFamily,
    VertexSet,
    interaction_count,
    is_matching,
    is_packing,
    k0,
    log2_f,
    log_binom,
    survivor_count,
)

__all__ = [
    "CapacityError",
    "DomainError",
    "Hypergraph",
    "Params",
    "RegimeError",
    "SetFamily",
    "VertexSet",
    "interaction_count",
    "is_matching",
    "is_packing",
    "k0",
    "log2_f",
    "log_binom",
    "survivor_count",
]
