"""drplace: AS-level path inference and decoy-router placement toolkit.

Infers AS paths from every AS to chosen IP prefixes out of BGP table
snapshots and inter-AS business relationships, ranks ASes (and routers
inside them) by how many of those paths they intercept, and selects the
minimal sets needed to reach a coverage threshold while avoiding ASes
homed in censoring countries.
"""

from .analysis import (
    CollateralReport,
    ConeBypassRow,
    collateral_damage,
    cone_bypass,
    cost_estimate,
    spearman_rank,
)
from .inference import (
    AsPath,
    PathCorpus,
    build_corpus,
    extract_sure_paths,
    infer_paths,
    select_best,
)
from .ingest import (
    AliasMap,
    CountryMap,
    ParseError,
    ParseStats,
    Prefix,
    RelEdge,
    RibEntry,
    RouterTrace,
)
from .placement import (
    AsFrequencyTable,
    PlacementReport,
    cdf_series,
    coverage_of,
    find_key_ases,
    rank_ases,
)
from .routermap import (
    PrefixToAsMap,
    RouterPlacement,
    RouterRecord,
    classify_routers,
    find_key_routers,
    placement_rollup,
    trim_trace,
)
from .topology import (
    Rel,
    RelationshipGraph,
    build_graph,
    customer_cone,
    enumerate_valley_free,
    is_valley_free,
)

__version__ = "0.1.0"

__all__ = [
    "AliasMap",
    "AsFrequencyTable",
    "AsPath",
    "CollateralReport",
    "ConeBypassRow",
    "CountryMap",
    "ParseError",
    "ParseStats",
    "PathCorpus",
    "PlacementReport",
    "Prefix",
    "PrefixToAsMap",
    "Rel",
    "RelEdge",
    "RelationshipGraph",
    "RibEntry",
    "RouterPlacement",
    "RouterRecord",
    "RouterTrace",
    "build_corpus",
    "build_graph",
    "cdf_series",
    "classify_routers",
    "collateral_damage",
    "cone_bypass",
    "cost_estimate",
    "coverage_of",
    "customer_cone",
    "enumerate_valley_free",
    "extract_sure_paths",
    "find_key_ases",
    "find_key_routers",
    "infer_paths",
    "is_valley_free",
    "placement_rollup",
    "rank_ases",
    "select_best",
    "spearman_rank",
    "trim_trace",
]
