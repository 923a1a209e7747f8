"""Labeled AS relationship graph and valley-free path machinery.

An AS-level path is usable for transit only if it climbs through
customer-to-provider links, crosses at most one peering link at the top,
and then descends through provider-to-customer links. Paths over links
with no known relationship are treated as not valley-free rather than
guessed at.

RelationshipGraph is immutable once built; every query here is read-only
and safe to share across threads.
"""

from __future__ import annotations

import enum
from typing import Iterable, Optional

from .ingest import P2C_CODE, P2P_CODE, RelEdge


class Rel(enum.Enum):
    P2C = "p2c"  # provider -> customer, read in traversal direction
    C2P = "c2p"
    P2P = "p2p"

    def inverse(self) -> "Rel":
        if self is Rel.P2C:
            return Rel.C2P
        if self is Rel.C2P:
            return Rel.P2C
        return Rel.P2P


class OracleSizeError(ValueError):
    """Raised when exhaustive enumeration is asked for on too large a graph."""


ORACLE_VERTEX_LIMIT = 16


class RelationshipGraph:
    """Business-labeled AS adjacency with symmetric-consistent labels."""

    def __init__(self) -> None:
        self._label: dict[tuple[int, int], Rel] = {}
        self._adj: dict[int, list[int]] = {}
        self.self_edges_dropped = 0

    # -- construction ------------------------------------------------------

    def _add(self, a: int, b: int, rel: Rel) -> None:
        existing = self._label.get((a, b))
        if existing is not None and existing is not rel:
            raise ValueError(f"conflicting labels for pair {a}-{b}")
        self._label[(a, b)] = rel
        self._label[(b, a)] = rel.inverse()
        self._adj.setdefault(a, [])
        self._adj.setdefault(b, [])

    def _freeze(self) -> None:
        adj: dict[int, set[int]] = {v: set() for v in self._adj}
        for a, b in self._label:
            adj[a].add(b)
        self._adj = {v: sorted(adj[v]) for v in sorted(adj)}

    # -- queries -----------------------------------------------------------

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(self._adj)

    @property
    def vertex_count(self) -> int:
        return len(self._adj)

    @property
    def pair_count(self) -> int:
        return len(self._label) // 2

    @property
    def p2c_pair_count(self) -> int:
        return sum(1 for rel in self._label.values() if rel is Rel.P2C)

    @property
    def p2p_pair_count(self) -> int:
        return sum(1 for rel in self._label.values() if rel is Rel.P2P) // 2

    def __contains__(self, asn: int) -> bool:
        return asn in self._adj

    def relationship(self, a: int, b: int) -> Optional[Rel]:
        """Label of the a->b link in traversal direction, or None."""
        return self._label.get((a, b))

    def neighbors(self, asn: int) -> list[int]:
        return self._adj.get(asn, [])

    def customers(self, asn: int) -> list[int]:
        return [n for n in self.neighbors(asn) if self._label[(asn, n)] is Rel.P2C]

    def providers(self, asn: int) -> list[int]:
        return [n for n in self.neighbors(asn) if self._label[(asn, n)] is Rel.C2P]

    def peers(self, asn: int) -> list[int]:
        return [n for n in self.neighbors(asn) if self._label[(asn, n)] is Rel.P2P]


def build_graph(edges: Iterable[RelEdge]) -> RelationshipGraph:
    """Build a RelationshipGraph from parsed relationship edges.

    Self-edges are dropped with a warning count; conflicting labels for
    one pair raise ValueError (the parser already rejects these, so a
    conflict here means the edge list was assembled by hand).
    """
    g = RelationshipGraph()
    for edge in edges:
        if edge.a == edge.b:
            g.self_edges_dropped += 1
            continue
        if edge.code == P2C_CODE:
            g._add(edge.a, edge.b, Rel.P2C)
        elif edge.code == P2P_CODE:
            g._add(edge.a, edge.b, Rel.P2P)
        else:
            raise ValueError(f"unknown relationship code {edge.code}")
    g._freeze()
    return g


# ---------------------------------------------------------------------------
# Valley-free validation

# Phases while reading a path origin -> destination: climbing, just crossed
# the single allowed peering link, descending.
_UP, _PEER, _DOWN = 0, 1, 2


def valley_violation(path: Iterable[int], g: RelationshipGraph) -> Optional[str]:
    """None if the path is valley-free, else a human-readable reason."""
    hops = list(path)
    phase = _UP
    for i in range(len(hops) - 1):
        a, b = hops[i], hops[i + 1]
        rel = g.relationship(a, b)
        if rel is None:
            return f"unknown link {a}-{b}"
        if rel is Rel.C2P:
            if phase != _UP:
                return f"valley at {a}-{b}"
        elif rel is Rel.P2P:
            if phase == _PEER:
                return f"second peer link at {a}-{b}"
            if phase == _DOWN:
                return f"peer link after descent at {a}-{b}"
            phase = _PEER
        else:  # Rel.P2C
            phase = _DOWN
    return None


def is_valley_free(path: Iterable[int], g: RelationshipGraph) -> bool:
    """True iff the origin->destination label sequence is any number of
    customer-to-provider links, at most one peering link, then any number
    of provider-to-customer links. Single-AS paths are trivially valid;
    unknown links make a path invalid."""
    return valley_violation(path, g) is None


def enumerate_valley_free(g: RelationshipGraph, max_len: int) -> set[tuple[int, ...]]:
    """All simple valley-free paths of at most max_len ASes.

    Exhaustive by design, for use as a testing oracle; refuses graphs
    with more than ORACLE_VERTEX_LIMIT vertices. The valley-free grammar
    is prefix-closed, so depth-first search can prune on phase without
    losing any path.
    """
    if g.vertex_count > ORACLE_VERTEX_LIMIT:
        raise OracleSizeError(
            f"refusing exhaustive enumeration on {g.vertex_count} vertices "
            f"(limit {ORACLE_VERTEX_LIMIT})"
        )
    found: set[tuple[int, ...]] = set()
    if max_len < 1:
        return found

    def walk(path: list[int], on_path: set[int], phase: int) -> None:
        found.add(tuple(path))
        if len(path) == max_len:
            return
        tail = path[-1]
        for nxt in g.neighbors(tail):
            if nxt in on_path:
                continue
            rel = g.relationship(tail, nxt)
            if rel is Rel.C2P:
                if phase != _UP:
                    continue
                new_phase = _UP
            elif rel is Rel.P2P:
                if phase != _UP:
                    continue
                new_phase = _PEER
            else:
                new_phase = _DOWN
            path.append(nxt)
            on_path.add(nxt)
            walk(path, on_path, new_phase)
            on_path.remove(nxt)
            path.pop()

    for start in g.vertices:
        walk([start], {start}, _UP)
    return found


def customer_cone(g: RelationshipGraph, asn: int) -> set[int]:
    """Transitive closure over provider-to-customer links, excluding asn."""
    if asn not in g:
        raise ValueError(f"AS{asn} not in graph")
    cone: set[int] = set()
    stack = [asn]
    while stack:
        current = stack.pop()
        for customer in g.customers(current):
            if customer != asn and customer not in cone:
                cone.add(customer)
                stack.append(customer)
    return cone
