"""Router-level mapping inside a target AS.

Traceroute paths are trimmed to the span between the first and last hop
attributed to the target AS (longest-prefix match over an attribution
table). Hop IPs are folded through the alias map into router identities;
a router that ever opens or closes a trimmed span is an edge router,
everything else seen in-span is a core router. Hops inside the span that
belong to other ASes are kept in the span but flagged as third-party and
never counted as routers of the target.

The decoy set for an AS is min(E, H): all E edge routers intercept every
trimmed trace by construction, while H is the smallest frequency-ranked
prefix of routers (edge and core pooled) whose union covers the trace
threshold. Whichever is smaller gets selected.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Iterable, Optional

from .ingest import AliasMap, CountryMap, Prefix, RouterTrace

EDGE = "edge"
CORE = "core"


class PrefixToAsMap:
    """Longest-prefix-match IP -> ASN attribution."""

    def __init__(self, pairs: Iterable[tuple[Prefix, int]]):
        self._by_len: dict[int, dict[int, int]] = {}
        for prefix, asn in pairs:
            table = self._by_len.setdefault(prefix.mask_len, {})
            existing = table.get(prefix.network)
            if existing is not None and existing != asn:
                raise ValueError(
                    f"{prefix} attributed to both AS{existing} and AS{asn}"
                )
            table[prefix.network] = asn
        self._lens = sorted(self._by_len, reverse=True)

    def lookup(self, ip: str) -> Optional[int]:
        value = 0
        for part in ip.split("."):
            value = (value << 8) | int(part)
        for mask_len in self._lens:
            mask = (0xFFFFFFFF << (32 - mask_len)) & 0xFFFFFFFF
            asn = self._by_len[mask_len].get(value & mask)
            if asn is not None:
                return asn
        return None


@dataclass(frozen=True)
class TrimmedTrace:
    """The in-AS span of one trace: gaps preserved, third-party flagged."""

    src_label: str
    dst_ip: str
    hops: tuple[Optional[str], ...]
    in_as: tuple[bool, ...]  # per hop: attributed to the target AS
    third_party: tuple[str, ...]  # in-span hops attributed elsewhere


def trim_trace(
    trace: RouterTrace, p2a: PrefixToAsMap, target: int
) -> Optional[TrimmedTrace]:
    """Cut a trace down to the first..last hops attributed to target.

    Returns None for traces that never touch the target AS. Gaps and
    third-party addresses inside the span are preserved."""
    attributed = [
        hop is not None and p2a.lookup(hop) == target for hop in trace.hops
    ]
    if not any(attributed):
        return None
    first = attributed.index(True)
    last = len(attributed) - 1 - attributed[::-1].index(True)
    span = trace.hops[first : last + 1]
    in_as = tuple(attributed[first : last + 1])
    third_party = tuple(
        hop for hop, ours in zip(span, in_as) if hop is not None and not ours
    )
    return TrimmedTrace(trace.src_label, trace.dst_ip, span, in_as, third_party)


@dataclass(frozen=True)
class RouterRecord:
    router_id: str
    asn: int
    classification: str  # EDGE or CORE
    trace_count: int


@dataclass
class RouterCensus:
    """Alias-resolved router population of one AS over a trace corpus."""

    asn: int
    records: list[RouterRecord]
    trace_total: int
    membership: dict[str, int]  # router_id -> bitmask over trimmed-trace index
    third_party_seen: int

    def record_for(self, router_id: str) -> RouterRecord:
        for record in self.records:
            if record.router_id == router_id:
                return record
        raise KeyError(router_id)


def classify_routers(
    trimmed: Iterable[TrimmedTrace], aliases: AliasMap, asn: int
) -> RouterCensus:
    """Fold hops through the alias map and classify edge vs core.

    A router is an edge router if it ever appears as the first or last
    in-AS hop of a trimmed trace; the classification is fixed across the
    whole corpus. trace_count counts distinct trimmed traces."""
    edge_ids: set[str] = set()
    membership: dict[str, int] = {}
    counts: dict[str, int] = {}
    third_party_seen = 0
    total = 0
    for index, trace in enumerate(trimmed):
        total += 1
        third_party_seen += len(trace.third_party)
        in_as_hops = [
            hop for hop, ours in zip(trace.hops, trace.in_as) if ours and hop
        ]
        routers = [aliases.resolve(hop) for hop in in_as_hops]
        edge_ids.add(routers[0])
        edge_ids.add(routers[-1])
        bit = 1 << index
        for router_id in set(routers):
            membership[router_id] = membership.get(router_id, 0) | bit
            counts[router_id] = counts.get(router_id, 0) + 1
    records = [
        RouterRecord(
            router_id=router_id,
            asn=asn,
            classification=EDGE if router_id in edge_ids else CORE,
            trace_count=counts[router_id],
        )
        for router_id in sorted(counts)
    ]
    return RouterCensus(asn, records, total, membership, third_party_seen)


@dataclass(frozen=True)
class RouterPlacement:
    """min(E, H) decoy selection for one AS."""

    asn: int
    edge_count: int
    core_count: int
    heavy_count: int
    required: int
    selected_kind: str  # "heavy" when H < E, else "edge"
    selected_set: tuple[str, ...]
    heavy_set: tuple[str, ...]
    trace_coverage: float
    threshold: float

    def to_json_dict(self) -> dict:
        return {
            "asn": self.asn,
            "edge_routers": self.edge_count,
            "core_routers": self.core_count,
            "heavy_hitters": self.heavy_count,
            "required": self.required,
            "selected_kind": self.selected_kind,
            "trace_coverage": self.trace_coverage,
            "threshold": self.threshold,
        }


def find_key_routers(census: RouterCensus, threshold: float) -> RouterPlacement:
    """Pick min(E, H) routers for the census's AS.

    H walks routers (edge and core pooled) in descending trace-count
    order, ties broken by router id, accumulating union coverage until
    the threshold fraction of trimmed traces is met. The edge set covers
    every trimmed trace by construction, so E is simply its size."""
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    if census.trace_total == 0:
        raise ValueError(f"no traces traverse AS{census.asn}")
    order = sorted(
        census.records, key=lambda r: (-r.trace_count, r.router_id)
    )
    total = census.trace_total
    covered_mask = 0
    heavy: list[str] = []
    for record in order:
        if covered_mask.bit_count() / total >= threshold:
            break
        covered_mask |= census.membership[record.router_id]
        heavy.append(record.router_id)
    edge_set = tuple(
        r.router_id for r in census.records if r.classification == EDGE
    )
    edge_count = len(edge_set)
    heavy_count = len(heavy)
    if heavy_count < edge_count:
        selected_kind = "heavy"
        selected = tuple(heavy)
        coverage = covered_mask.bit_count() / total
    else:
        selected_kind = "edge"
        selected = edge_set
        coverage = 1.0
    return RouterPlacement(
        asn=census.asn,
        edge_count=edge_count,
        core_count=len(census.records) - edge_count,
        heavy_count=heavy_count,
        required=min(edge_count, heavy_count),
        selected_kind=selected_kind,
        selected_set=selected,
        heavy_set=tuple(heavy),
        trace_coverage=coverage,
        threshold=threshold,
    )


@dataclass(frozen=True)
class Rollup:
    total_required: int
    per_as: tuple[tuple[int, int], ...]  # (asn, required)
    per_country: dict[str, int]

    def to_json_dict(self) -> dict:
        return {
            "total_required": self.total_required,
            "per_as": [{"asn": a, "required": r} for a, r in self.per_as],
            "per_country": dict(sorted(self.per_country.items())),
        }


def placement_rollup(
    placements: Iterable[RouterPlacement], countries: Optional[CountryMap] = None
) -> Rollup:
    """Sum required router counts across ASes, with country subtotals."""
    rows = sorted((p.asn, p.required) for p in placements)
    if not rows:
        raise ValueError("no placements to roll up")
    per_country: dict[str, int] = {}
    for asn, required in rows:
        cc = (countries.country_of(asn) if countries else None) or "??"
        per_country[cc] = per_country.get(cc, 0) + required
    return Rollup(sum(r for _, r in rows), tuple(rows), per_country)


# ---------------------------------------------------------------------------
# File outputs


def write_routers_csv(
    census: RouterCensus, placement: RouterPlacement, path: FsPath
) -> None:
    selected = set(placement.selected_set)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["router", "class", "trace_count", "selected"])
        for record in census.records:
            writer.writerow(
                [
                    record.router_id,
                    record.classification,
                    record.trace_count,
                    int(record.router_id in selected),
                ]
            )


def write_rollup_json(
    rollup: Rollup, placements: Iterable[RouterPlacement], path: FsPath
) -> None:
    payload = rollup.to_json_dict()
    payload["placements"] = [p.to_json_dict() for p in placements]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
