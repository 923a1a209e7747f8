"""Key-AS selection: frequency ranking, greedy threshold coverage, CDFs.

Interception semantics, used consistently by every function here: an AS
intercepts a path when it appears on the path at any position other than
the origin. A relay inside the client's own origin network cannot serve
that client, so origin appearances never count; the destination's home
AS does. Coverage of a set of ASes is union-style: a path counts once if
at least one AS of the set intercepts it.

Selection mirrors the sort-then-take-k approach: walk ASes in descending
interception-count order (skipping ASes homed in censoring countries),
and stop at the first k whose union coverage reaches the threshold. That
makes k minimal for the frequency order -- dropping the last selected AS
always lands below the threshold -- without claiming optimal set cover.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Iterable, Optional

from .ingest import CountryMap
from .inference import PathCorpus

UNKNOWN_COUNTRY = "??"


@dataclass(frozen=True)
class AsFrequencyTable:
    """Per-AS interception counts over a corpus, with dense 1-based ranks."""

    counts: dict[int, int]
    total_paths: int
    order: tuple[int, ...]  # descending count, ascending ASN on ties
    rank: dict[int, int]

    def top(self, n: int) -> tuple[int, ...]:
        return self.order[:n]


def rank_ases(corpus: PathCorpus) -> AsFrequencyTable:
    """Count, for every AS in the corpus, the paths it intercepts.

    Each path is counted at most once per AS; the origin AS of a path is
    never credited for it. ASes that appear only as origins keep a count
    of zero but are still listed."""
    if corpus.total_paths == 0:
        raise ValueError("empty corpus")
    counts: dict[int, int] = {asn: 0 for asn in corpus.ases()}
    for path in corpus.all_paths():
        for asn in set(path.hops[1:]):
            counts[asn] += 1
    order = tuple(sorted(counts, key=lambda a: (-counts[a], a)))
    rank = {asn: i + 1 for i, asn in enumerate(order)}
    return AsFrequencyTable(counts, corpus.total_paths, order, rank)


def membership_masks(corpus: PathCorpus) -> dict[int, int]:
    """Per-AS bitmask over path indices (all_paths order) it intercepts."""
    masks: dict[int, int] = {asn: 0 for asn in corpus.ases()}
    for index, path in enumerate(corpus.all_paths()):
        bit = 1 << index
        for asn in set(path.hops[1:]):
            masks[asn] |= bit
    return masks


@dataclass(frozen=True)
class SelectedAs:
    asn: int
    country: str
    paths_containing: int
    unique_added: int
    cumulative_covered: int
    cumulative_fraction: float


@dataclass(frozen=True)
class PlacementReport:
    """Result of the greedy threshold walk."""

    selected: tuple[SelectedAs, ...]
    coverage: float
    threshold: float
    threshold_reached: bool
    excluded_censor: tuple[tuple[int, str], ...]  # (asn, country code)
    total_paths: int
    per_country: dict[str, tuple[int, int, float]]  # origin cc -> covered, total, fraction

    def to_json_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "threshold_reached": self.threshold_reached,
            "coverage": self.coverage,
            "total_paths": self.total_paths,
            "selected": [
                {
                    "asn": s.asn,
                    "country": s.country,
                    "paths_containing": s.paths_containing,
                    "unique_added": s.unique_added,
                    "cumulative_covered": s.cumulative_covered,
                    "cumulative_fraction": s.cumulative_fraction,
                }
                for s in self.selected
            ],
            "excluded_censor": [
                {"asn": asn, "country": cc} for asn, cc in self.excluded_censor
            ],
            "per_country_origin_coverage": {
                cc: {"covered": c, "total": t, "fraction": f}
                for cc, (c, t, f) in sorted(self.per_country.items())
            },
        }


def find_key_ases(
    table: AsFrequencyTable,
    corpus: PathCorpus,
    threshold: float,
    countries: CountryMap,
) -> PlacementReport:
    """Greedy walk of the frequency order, skipping censor-country ASes.

    Stops at the first k whose union coverage reaches the threshold; if
    the whole table is exhausted first, the report carries
    threshold_reached=False instead of failing."""
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    masks = membership_masks(corpus)
    total = corpus.total_paths
    covered_mask = 0
    covered = 0
    selected: list[SelectedAs] = []
    excluded: list[tuple[int, str]] = []
    for asn in table.order:
        if covered / total >= threshold:
            break
        country = countries.country_of(asn)
        if country is not None and country in countries.censor_set:
            excluded.append((asn, country))
            continue
        new_mask = covered_mask | masks[asn]
        unique = (new_mask ^ covered_mask).bit_count()
        covered_mask = new_mask
        covered = covered_mask.bit_count()
        selected.append(
            SelectedAs(
                asn=asn,
                country=country or UNKNOWN_COUNTRY,
                paths_containing=table.counts[asn],
                unique_added=unique,
                cumulative_covered=covered,
                cumulative_fraction=covered / total,
            )
        )
    selected_set = {s.asn for s in selected}
    per_country = _per_origin_country(corpus, selected_set, countries)
    return PlacementReport(
        selected=tuple(selected),
        coverage=covered / total,
        threshold=threshold,
        threshold_reached=covered / total >= threshold,
        excluded_censor=tuple(excluded),
        total_paths=total,
        per_country=per_country,
    )


@dataclass(frozen=True)
class CoverageResult:
    fraction: float
    covered: int
    total: int
    per_country: dict[str, tuple[int, int, float]]


def coverage_of(
    as_set: Iterable[int],
    corpus: PathCorpus,
    countries: Optional[CountryMap] = None,
) -> CoverageResult:
    """Fraction of corpus paths intercepted by as_set, with a breakdown
    by the origin AS's country when a country map is supplied."""
    members = set(as_set)
    if not members:
        raise ValueError("as_set must be non-empty")
    covered = 0
    for path in corpus.all_paths():
        if members.intersection(path.hops[1:]):
            covered += 1
    total = corpus.total_paths
    per_country = (
        _per_origin_country(corpus, members, countries) if countries else {}
    )
    return CoverageResult(covered / total if total else 0.0, covered, total, per_country)


def _per_origin_country(
    corpus: PathCorpus, members: set[int], countries: CountryMap
) -> dict[str, tuple[int, int, float]]:
    totals: dict[str, int] = {}
    hits: dict[str, int] = {}
    for path in corpus.all_paths():
        cc = countries.country_of(path.origin) or UNKNOWN_COUNTRY
        totals[cc] = totals.get(cc, 0) + 1
        if members.intersection(path.hops[1:]):
            hits[cc] = hits.get(cc, 0) + 1
    return {
        cc: (hits.get(cc, 0), total, hits.get(cc, 0) / total)
        for cc, total in sorted(totals.items())
    }


@dataclass(frozen=True)
class CdfRow:
    rank: int
    asn: int
    unique_added: int
    cumulative_fraction: float


def cdf_series(table: AsFrequencyTable, corpus: PathCorpus, top_n: int) -> list[CdfRow]:
    """Coverage CDF over the pure frequency order (no censor skipping)."""
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    masks = membership_masks(corpus)
    total = corpus.total_paths
    covered_mask = 0
    rows: list[CdfRow] = []
    for i, asn in enumerate(table.order[:top_n], start=1):
        new_mask = covered_mask | masks[asn]
        unique = (new_mask ^ covered_mask).bit_count()
        covered_mask = new_mask
        rows.append(CdfRow(i, asn, unique, covered_mask.bit_count() / total))
    return rows


# ---------------------------------------------------------------------------
# File outputs


def write_ranking_csv(
    table: AsFrequencyTable, countries: CountryMap, path: FsPath
) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["asn", "country", "paths", "rank"])
        for asn in table.order:
            writer.writerow(
                [asn, countries.country_of(asn) or UNKNOWN_COUNTRY,
                 table.counts[asn], table.rank[asn]]
            )


def write_cdf_csv(rows: Iterable[CdfRow], path: FsPath) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "asn", "unique_added", "cumulative"])
        for row in rows:
            writer.writerow(
                [row.rank, row.asn, row.unique_added, repr(row.cumulative_fraction)]
            )


def write_placement_json(report: PlacementReport, path: FsPath) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
