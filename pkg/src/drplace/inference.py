"""Prefix-to-AS path estimation from BGP table snapshots.

For each target prefix the goal is one AS-level path from every AS that
can reach it. Paths read directly from the tables are "sure" paths;
every suffix of a sure path is itself a sure path, and its frequency
index counts how many table rows end with exactly that hop sequence.
Sure paths are then extended hop by hop across the relationship graph,
never creating a loop or a valley; each prepended AS adds one to the
path's uncertainty count while the frequency index of the underlying
sure suffix is inherited unchanged.

Competing candidates for the same (origin AS, prefix) are settled by the
tie-break chain: fewest hops, then lowest uncertainty, then highest
frequency index, then lexicographically smallest hop sequence so that
results are bit-reproducible.

Extension runs as a synchronous fixpoint over rounds. Each AS keeps
every candidate that could still matter -- either as its own final
answer or as the best extendable route for some neighbor -- and rounds
continue until no new candidate survives anywhere. A candidate is
discarded only when another one is at least as good in the tie-break
order, reaches at most the same set of ASes (so it can never lose on
loop-freedom), and is at least as extendable (a pure provider-to-customer
descent may be prepended with any link type, anything else only with a
customer-to-provider link). This pruning is what keeps per-AS candidate
sets small while still selecting exactly the path an exhaustive
enumeration would pick.

Note on words: "origin" here is the first AS of a path (where client
traffic enters), "home" is the last AS (the one announcing the prefix).
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .ingest import ParseStats, Prefix, RibEntry, content_lines, parse_asn, parse_prefix
from .topology import Rel, RelationshipGraph, is_valley_free


@dataclass(frozen=True)
class AsPath:
    """A chosen route: sure when uncertainty == 0, inferred otherwise."""

    prefix: Prefix
    hops: tuple[int, ...]  # origin first, home AS last
    uncertainty: int  # ASes prepended onto the sure suffix
    frequency: int  # table occurrences of that sure suffix

    @property
    def origin(self) -> int:
        return self.hops[0]

    @property
    def home(self) -> int:
        return self.hops[-1]

    @property
    def is_sure(self) -> bool:
        return self.uncertainty == 0

    @property
    def base_suffix_len(self) -> int:
        return len(self.hops) - self.uncertainty

    def sort_key(self) -> tuple:
        return (len(self.hops), self.uncertainty, -self.frequency, self.hops)


def select_best(candidates: Iterable[AsPath]) -> AsPath:
    """Apply the tie-break chain; candidates must be non-empty."""
    best = min(candidates, key=AsPath.sort_key, default=None)
    if best is None:
        raise ValueError("no candidates to select from")
    return best


def extract_sure_paths(
    entries: Iterable[RibEntry], prefix: Prefix
) -> dict[int, list[AsPath]]:
    """Sure paths for one prefix, keyed by origin AS.

    Every table row for the prefix contributes itself and all of its
    suffixes; the frequency index of a sure path is the number of rows in
    which it occurs as an exact suffix. Rows are matched on the exact
    prefix, with no supernet fallback.
    """
    counts: Counter[tuple[int, ...]] = Counter()
    for entry in entries:
        if entry.prefix == prefix:
            path = entry.as_path
            for i in range(len(path)):
                counts[path[i:]] += 1
    by_origin: dict[int, list[AsPath]] = defaultdict(list)
    for hops in sorted(counts):
        by_origin[hops[0]].append(AsPath(prefix, hops, 0, counts[hops]))
    return dict(by_origin)


@dataclass
class PrefixResult:
    """Chosen paths for one prefix plus bookkeeping from the fixpoint."""

    prefix: Prefix
    chosen: dict[int, AsPath]
    rounds: int = 0
    sure_total: int = 0
    sure_dropped: int = 0  # sure paths rejected by the valley-free check
    # Home ASes seen across table rows. More than one means the prefix is
    # announced by several origins; all of them are kept as destinations.
    homes: tuple[int, ...] = ()

    @property
    def covered(self) -> int:
        return len(self.chosen)


# Internal candidate tuple: (hops, uncertainty, frequency, down_only, on_path)
# where down_only means every link is provider-to-customer (or the path is a
# single AS), i.e. any link type may still be prepended.
_Cand = tuple[tuple[int, ...], int, int, bool, frozenset]


def _key(c: _Cand) -> tuple:
    return (len(c[0]), c[1], -c[2], c[0])


def _dominates(p: _Cand, q: _Cand) -> bool:
    """p makes q redundant: no extension of q can beat p's same extension."""
    return (p[3] or not q[3]) and _key(p) <= _key(q) and p[4] <= q[4]


def _merge(kept: list[_Cand], cand: _Cand) -> bool:
    """Insert cand into an antichain unless something already covers it."""
    for existing in kept:
        if _dominates(existing, cand):
            return False
    kept[:] = [c for c in kept if not _dominates(cand, c)]
    kept.append(cand)
    return True


def _is_down_only(hops: tuple[int, ...], g: RelationshipGraph) -> bool:
    return all(
        g.relationship(hops[i], hops[i + 1]) is Rel.P2C for i in range(len(hops) - 1)
    )


def infer_paths(
    prefix: Prefix,
    sure_map: dict[int, list[AsPath]],
    g: RelationshipGraph,
) -> PrefixResult:
    """Extend sure paths to every AS reachable under the valley-free and
    loop-free constraints, and pick one path per origin AS.

    ASes with no valid route simply stay uncovered; sure paths that fail
    the valley-free check against the graph are dropped from candidacy
    (their valid suffixes still participate on their own).
    """
    result = PrefixResult(prefix, {})
    result.homes = tuple(
        sorted({sp.home for paths in sure_map.values() for sp in paths})
    )
    kept: dict[int, list[_Cand]] = defaultdict(list)
    frontier: list[tuple[int, _Cand]] = []

    for origin in sorted(sure_map):
        for sp in sure_map[origin]:
            result.sure_total += 1
            if not is_valley_free(sp.hops, g):
                result.sure_dropped += 1
                continue
            cand: _Cand = (
                sp.hops,
                0,
                sp.frequency,
                _is_down_only(sp.hops, g),
                frozenset(sp.hops),
            )
            if _merge(kept[origin], cand):
                frontier.append((origin, cand))
    frontier = [(asn, cand) for asn, cand in frontier if cand in kept[asn]]

    while frontier:
        result.rounds += 1
        proposals: list[tuple[int, _Cand]] = []
        for head, (hops, unc, freq, down_only, on_path) in frontier:
            for neighbor in g.neighbors(head):
                if neighbor in on_path:
                    continue
                rel = g.relationship(neighbor, head)
                if not down_only and rel is not Rel.C2P:
                    continue
                proposals.append(
                    (
                        neighbor,
                        (
                            (neighbor,) + hops,
                            unc + 1,
                            freq,
                            down_only and rel is Rel.P2C,
                            on_path | {neighbor},
                        ),
                    )
                )
        added = [(asn, cand) for asn, cand in proposals if _merge(kept[asn], cand)]
        # A candidate merged early in the batch may have been displaced by a
        # later, dominating one; only survivors seed the next round.
        frontier = [(asn, cand) for asn, cand in added if cand in kept[asn]]

    for asn in sorted(kept):
        cands = kept[asn]
        if not cands:
            continue
        hops, unc, freq, _, _ = min(cands, key=_key)
        result.chosen[asn] = AsPath(prefix, hops, unc, freq)
    return result


# ---------------------------------------------------------------------------
# The corpus: one chosen path per (origin, prefix)


@dataclass
class PathCorpus:
    """Per prefix, the chosen path from every covered origin AS."""

    slices: dict[Prefix, dict[int, AsPath]] = field(default_factory=dict)

    def add_slice(self, prefix: Prefix, chosen: dict[int, AsPath]) -> None:
        self.slices[prefix] = dict(sorted(chosen.items()))

    def all_paths(self) -> list[AsPath]:
        """Every path, ordered by (prefix, origin); index order is the
        path identity used by the coverage machinery."""
        out: list[AsPath] = []
        for prefix in sorted(self.slices):
            out.extend(self.slices[prefix].values())
        return out

    @property
    def total_paths(self) -> int:
        return sum(len(s) for s in self.slices.values())

    def ases(self) -> list[int]:
        """Every AS appearing anywhere in the corpus, sorted."""
        seen: set[int] = set()
        for paths in self.slices.values():
            for path in paths.values():
                seen.update(path.hops)
        return sorted(seen)

    # -- paths file format: PREFIX|ORIGIN|A B C ...|uncertainty|frequency --

    def to_lines(self) -> list[str]:
        lines = []
        for path in self.all_paths():
            hops = " ".join(str(a) for a in path.hops)
            lines.append(
                f"{path.prefix}|{path.origin}|{hops}|{path.uncertainty}|{path.frequency}"
            )
        return lines

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> tuple["PathCorpus", ParseStats]:
        corpus = cls()
        stats = ParseStats()
        staged: dict[Prefix, dict[int, AsPath]] = defaultdict(dict)
        for line_no, text in content_lines(lines):
            parts = text.split("|")
            if len(parts) != 5:
                stats.reject(line_no, "expected PREFIX|ORIGIN|HOPS|UNC|FREQ")
                continue
            try:
                prefix, _ = parse_prefix(parts[0].strip())
                origin = parse_asn(parts[1].strip())
                hops = tuple(parse_asn(t) for t in parts[2].split())
                uncertainty = int(parts[3])
                frequency = int(parts[4])
                if not hops or hops[0] != origin:
                    raise ValueError("origin does not match first hop")
                if not 0 <= uncertainty <= len(hops) - 1:
                    raise ValueError("uncertainty out of range")
                if frequency < 1:
                    raise ValueError("frequency must be >= 1")
            except ValueError as exc:
                stats.reject(line_no, str(exc))
                continue
            if origin in staged[prefix]:
                stats.reject(line_no, f"duplicate path for {prefix} from AS{origin}")
                continue
            staged[prefix][origin] = AsPath(prefix, hops, uncertainty, frequency)
            stats.accepted += 1
        for prefix in sorted(staged):
            corpus.add_slice(prefix, staged[prefix])
        return corpus, stats


def build_corpus(
    targets: Iterable[Prefix],
    entries: list[RibEntry],
    g: RelationshipGraph,
) -> tuple[PathCorpus, list[PrefixResult]]:
    """Run per-prefix inference for every target prefix.

    Prefixes with no table rows at all are recorded with an empty slice;
    callers can warn on PrefixResult.sure_total == 0.
    """
    corpus = PathCorpus()
    results = []
    for prefix in targets:
        sure_map = extract_sure_paths(entries, prefix)
        result = infer_paths(prefix, sure_map, g)
        corpus.add_slice(prefix, result.chosen)
        results.append(result)
    return corpus, results


def corpus_violations(corpus: PathCorpus, g: RelationshipGraph) -> list[str]:
    """Validate every stored path: loop-free and valley-free.

    Returns human-readable violation strings; empty means the corpus is
    internally consistent with the relationship graph."""
    problems = []
    for path in corpus.all_paths():
        if len(set(path.hops)) != len(path.hops):
            problems.append(f"{path.prefix} from AS{path.origin}: loop")
        if not is_valley_free(path.hops, g):
            problems.append(f"{path.prefix} from AS{path.origin}: not valley-free")
    return problems
