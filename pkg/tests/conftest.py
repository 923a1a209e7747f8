from __future__ import annotations

import pytest

from drplace.ingest import CountryMap, Prefix, RelEdge, RibEntry, parse_prefix
from drplace.inference import AsPath, PathCorpus
from drplace.topology import RelationshipGraph, build_graph

# The seven-AS two-tier demo topology used throughout: AS1 provides AS2 and
# AS3, AS2 provides AS4 and AS5, AS3 provides AS6 and AS7, AS2 peers AS3.
DEMO_EDGES = [
    RelEdge(1, 2, -1),
    RelEdge(1, 3, -1),
    RelEdge(2, 4, -1),
    RelEdge(2, 5, -1),
    RelEdge(3, 6, -1),
    RelEdge(3, 7, -1),
    RelEdge(2, 3, 0),
]


@pytest.fixture
def demo_graph() -> RelationshipGraph:
    return build_graph(DEMO_EDGES)


@pytest.fixture
def prefix() -> Prefix:
    p, _ = parse_prefix("10.0.0.0/24")
    return p


def make_corpus(prefix: Prefix, paths: list[tuple[int, ...]]) -> PathCorpus:
    """Hand-built corpus: uncertainty 0 / frequency 1 unless it matters."""
    corpus = PathCorpus()
    corpus.add_slice(prefix, {hops[0]: AsPath(prefix, hops, 0, 1) for hops in paths})
    return corpus


def country_map(mapping: dict[int, str], censors: set[str] | None = None) -> CountryMap:
    return CountryMap(mapping, frozenset(censors or set()))


@pytest.fixture
def rib_lines() -> list[str]:
    return [
        "# demo table",
        "10.0.0.0/24|7 7 7 3 1|vp00",
        "10.0.0.0/24|9 3 1|vp01",
        "",
        "10.0.0.0/24|7 3 7 1|vp01",
    ]


def entry(prefix: Prefix, *hops: int, vantage: str = "") -> RibEntry:
    return RibEntry(prefix, tuple(hops), vantage)
