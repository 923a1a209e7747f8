"""Cross-cutting analytics over a path corpus.

Collateral damage: of the paths that touch a country's ASes at all, how
many originate outside that country? Those are the flows a national
filter would break without any domestic mandate. A path is also checked
for the in..out..in pattern (leaves the country and comes back); hops
with unknown country break the pattern conservatively, so a path is
never called reentrant on incomplete information.

Cone bypass quantifies why customer-cone size is a poor stand-in for
path frequency: large providers are often skirted by paths that run
through their immediate customers instead.

Spearman here is exact: ranks (average ranks for ties) and all the
moments are computed in rational arithmetic, so identical orderings give
exactly 1.0 and reversed orderings exactly -1.0.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path as FsPath
from typing import Iterable, Optional, Sequence

from .ingest import CountryMap
from .inference import PathCorpus
from .topology import RelationshipGraph, customer_cone

DEFAULT_UNIT_COST_USD = 885_000


@dataclass(frozen=True)
class CollateralReport:
    country: str
    paths_involving: int
    foreign_origin: int
    fraction: Optional[float]  # None when no path involves the country
    reentrant: int

    @property
    def defined(self) -> bool:
        return self.fraction is not None


def collateral_damage(
    corpus: PathCorpus, countries: CountryMap, country_code: str
) -> CollateralReport:
    """Count corpus paths involving a country and how many of them come
    from outside it.

    A path "involves" the country when any hop (origin included) is homed
    there. foreign_origin counts involved paths whose origin AS is known
    to be homed elsewhere; origins of unknown country are not claimed as
    foreign."""
    if country_code not in countries.mapping.values():
        raise ValueError(f"no AS maps to country {country_code!r}")
    involving = 0
    foreign = 0
    reentrant = 0
    for path in corpus.all_paths():
        codes = [countries.country_of(asn) for asn in path.hops]
        if country_code not in codes:
            continue
        involving += 1
        if codes[0] is not None and codes[0] != country_code:
            foreign += 1
        if _is_reentrant(codes, country_code):
            reentrant += 1
    fraction = foreign / involving if involving else None
    return CollateralReport(country_code, involving, foreign, fraction, reentrant)


def _is_reentrant(codes: Sequence[Optional[str]], country: str) -> bool:
    """True when some unknown-free window reads in..out..in."""
    seen_in = False
    seen_out = False
    for code in codes:
        if code is None:
            seen_in = False
            seen_out = False
        elif code == country:
            if seen_out:
                return True
            seen_in = True
        elif seen_in:
            seen_out = True
    return False


# ---------------------------------------------------------------------------
# Rank correlation


def average_ranks(values: Sequence) -> list[Fraction]:
    """1-based ranks, smallest value first; ties get the average rank."""
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    ranks: list[Fraction] = [Fraction(0)] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = Fraction(i + 1 + j + 1, 2)
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman_rank(x: Sequence, y: Sequence) -> float:
    """Spearman rank correlation with average-rank tie handling.

    Accepts raw scores or precomputed ranks; both sequences are re-ranked
    before correlating, which leaves already-ranked input unchanged.
    Raises ValueError for n < 2 or when either side has zero variance
    (the coefficient is undefined, not zero)."""
    if len(x) != len(y):
        raise ValueError("sequences must have equal length")
    if len(x) < 2:
        raise ValueError("need at least two observations")
    rx = average_ranks(x)
    ry = average_ranks(y)
    n = len(rx)
    mx = sum(rx, Fraction(0)) / n
    my = sum(ry, Fraction(0)) / n
    sx = sum((r - mx) ** 2 for r in rx)
    sy = sum((r - my) ** 2 for r in ry)
    if sx == 0 or sy == 0:
        raise ValueError("undefined correlation: zero rank variance")
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    if cov * cov == sx * sy:
        return 1.0 if cov > 0 else -1.0
    return float(cov) / math.sqrt(float(sx * sy))


# ---------------------------------------------------------------------------
# Cone bypass


@dataclass(frozen=True)
class ConeBypassRow:
    asn: int
    cone_size: int
    pct_through_self: float  # fraction of paths traversing the AS itself
    pct_through_1hop_only: float  # through >=1 immediate customer, not the AS

    @property
    def pct_through_neither(self) -> float:
        return 1.0 - self.pct_through_self - self.pct_through_1hop_only


def cone_bypass(
    corpus: PathCorpus, g: RelationshipGraph, asn: int
) -> ConeBypassRow:
    """How often paths traverse an AS versus only its direct customers.

    Membership is positional anywhere on the path (origin included);
    paths through both the AS and a customer count under
    pct_through_self, so self + 1hop_only + neither partitions the
    corpus."""
    if asn not in g:
        raise ValueError(f"AS{asn} not in graph")
    customers = set(g.customers(asn))
    total = corpus.total_paths
    if total == 0:
        raise ValueError("empty corpus")
    through_self = 0
    through_customers_only = 0
    for path in corpus.all_paths():
        hops = set(path.hops)
        if asn in hops:
            through_self += 1
        elif customers & hops:
            through_customers_only += 1
    return ConeBypassRow(
        asn=asn,
        cone_size=len(customer_cone(g, asn)),
        pct_through_self=through_self / total,
        pct_through_1hop_only=through_customers_only / total,
    )


def cost_estimate(total_routers: int, unit_cost_usd: int = DEFAULT_UNIT_COST_USD) -> int:
    """Replacement hardware cost for a router count, in whole USD."""
    if total_routers < 0:
        raise ValueError("router count cannot be negative")
    return total_routers * unit_cost_usd


# ---------------------------------------------------------------------------
# File outputs


def write_collateral_csv(reports: Iterable[CollateralReport], path: FsPath) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["country", "paths_involving", "foreign_origin", "fraction", "reentrant"]
        )
        for r in reports:
            writer.writerow(
                [
                    r.country,
                    r.paths_involving,
                    r.foreign_origin,
                    "undefined" if r.fraction is None else repr(r.fraction),
                    r.reentrant,
                ]
            )


def write_cone_bypass_csv(rows: Iterable[ConeBypassRow], path: FsPath) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["asn", "cone_size", "pct_through_self", "pct_through_1hop_only"]
        )
        for row in rows:
            writer.writerow(
                [
                    row.asn,
                    row.cone_size,
                    repr(row.pct_through_self),
                    repr(row.pct_through_1hop_only),
                ]
            )


def write_spearman_json(payload: dict, path: FsPath) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
