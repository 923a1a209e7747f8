"""Parsers and serializers for the toolkit's text input formats.

Every input is a line-oriented UTF-8 file: blank lines and lines whose
first non-space character is '#' are skipped, fields are pipe-separated.
The formats are:

  *.rib.txt        PREFIX|ASN ASN ASN ...[|VANTAGE]   (origin-side AS first,
                   home AS of the prefix last; vantage label optional)
  *.rels.txt       ASN|ASN|CODE   (-1: first AS is provider of second,
                   0: the two ASes are peers)
  *.traces.txt     SRC_LABEL|DST_IP|hop1,hop2,*,hop4  ('*' marks a
                   non-responding hop)
  *.aliases.txt    one router per line: its interface IPs, space separated
  *.countries.txt  ASN|CC         (ISO 3166-1 alpha-2 syntax)
  *.censors.txt    one country code per line
  *.prefixes.txt   PREFIX[|LABEL]
  *.p2a.txt        PREFIX|ASN     (longest-prefix-match attribution data)

Parsers never raise on skippable garbage: bad lines are recorded in a
ParseStats ledger with their line number. They do raise ParseError on
corruption that cannot be repaired line by line (conflicting relationship
labels, overlapping alias sets, contradictory prefix attribution), since
continuing would silently poison downstream analysis.

Parsing is pure per line, so inputs may be sharded and parsed in
parallel; all returned structures are immutable after construction.
"""

from __future__ import annotations

import ipaddress
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

AS_MIN = 1
AS_MAX = 2**32 - 1
AS_TRANS = 23456  # RFC 6793 transition ASN: legal on paths, but worth surfacing

_CC_RE = re.compile(r"^[A-Z]{2}$")


class ParseError(Exception):
    """Input corruption that cannot be skipped line by line."""


@dataclass
class ParseStats:
    """Accounting for one parser run.

    Invariant: accepted + rejected + loops_dropped equals the number of
    content lines seen (blank lines and comments are never counted).
    """

    accepted: int = 0
    loops_dropped: int = 0
    duplicates: int = 0
    as_trans_seen: int = 0
    canonicalized: int = 0
    rejects: list[tuple[int, str]] = field(default_factory=list)

    @property
    def rejected(self) -> int:
        return len(self.rejects)

    def reject(self, line_no: int, reason: str) -> None:
        self.rejects.append((line_no, reason))


def content_lines(lines: Iterable[str]) -> Iterator[tuple[int, str]]:
    """Yield (line_no, stripped_text) for content lines, 1-based."""
    for line_no, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        yield line_no, text


def parse_asn(token: str) -> int:
    """Parse an AS number, enforcing the 1..2^32-1 range."""
    if not token.isdigit():
        raise ValueError(f"not an AS number: {token!r}")
    value = int(token)
    if not AS_MIN <= value <= AS_MAX:
        raise ValueError(f"AS number out of range: {value}")
    return value


@dataclass(frozen=True, order=True)
class Prefix:
    """An IPv4 prefix with host bits below mask_len forced to zero."""

    network: int  # network address as a 32-bit integer
    mask_len: int

    def __post_init__(self) -> None:
        if not 0 <= self.mask_len <= 32:
            raise ValueError(f"bad mask length: {self.mask_len}")
        if self.network & ~self._mask() & 0xFFFFFFFF:
            raise ValueError(f"host bits set in {self}")

    def _mask(self) -> int:
        return (0xFFFFFFFF << (32 - self.mask_len)) & 0xFFFFFFFF

    def contains(self, ip: int) -> bool:
        return (ip & self._mask()) == self.network

    def __str__(self) -> str:
        return f"{ipaddress.IPv4Address(self.network)}/{self.mask_len}"


def parse_prefix(text: str) -> tuple[Prefix, bool]:
    """Parse 'a.b.c.d/len'; returns (prefix, had_host_bits).

    Host bits below the mask are cleared; the flag reports whether any
    were set so callers can count canonicalizations.
    """
    addr_part, sep, len_part = text.partition("/")
    if not sep or not len_part.isdigit():
        raise ValueError(f"not a prefix: {text!r}")
    mask_len = int(len_part)
    if not 0 <= mask_len <= 32:
        raise ValueError(f"bad mask length in {text!r}")
    ip = int(ipaddress.IPv4Address(addr_part))
    mask = (0xFFFFFFFF << (32 - mask_len)) & 0xFFFFFFFF
    network = ip & mask
    return Prefix(network, mask_len), network != ip


def parse_ipv4(text: str) -> str:
    """Validate an IPv4 address, returning its canonical dotted form."""
    return str(ipaddress.IPv4Address(text))


# ---------------------------------------------------------------------------
# RIB dumps


@dataclass(frozen=True)
class RibEntry:
    """One table row: the AS path toward prefix, origin-side AS first."""

    prefix: Prefix
    as_path: tuple[int, ...]
    source_vantage: str = ""


def collapse_prepends(path: Iterable[int]) -> tuple[int, ...]:
    """Drop consecutive duplicate ASNs (AS-path prepending)."""
    out: list[int] = []
    for asn in path:
        if not out or out[-1] != asn:
            out.append(asn)
    return tuple(out)


def parse_rib(lines: Iterable[str]) -> tuple[list[RibEntry], ParseStats]:
    """Parse a RIB dump.

    Prepending is collapsed before loop detection; entries whose collapsed
    path still repeats an ASN are dropped and counted in loops_dropped.
    """
    entries: list[RibEntry] = []
    stats = ParseStats()
    for line_no, text in content_lines(lines):
        parts = text.split("|")
        if len(parts) not in (2, 3):
            stats.reject(line_no, "expected PREFIX|ASPATH[|VANTAGE]")
            continue
        try:
            prefix, had_host_bits = parse_prefix(parts[0].strip())
            tokens = parts[1].split()
            if not tokens:
                raise ValueError("empty AS path")
            path = tuple(parse_asn(t) for t in tokens)
        except (ValueError, ipaddress.AddressValueError) as exc:
            stats.reject(line_no, str(exc))
            continue
        if had_host_bits:
            stats.canonicalized += 1
        stats.as_trans_seen += path.count(AS_TRANS)
        collapsed = collapse_prepends(path)
        if len(set(collapsed)) != len(collapsed):
            stats.loops_dropped += 1
            continue
        vantage = parts[2].strip() if len(parts) == 3 else ""
        entries.append(RibEntry(prefix, collapsed, vantage))
        stats.accepted += 1
    return entries, stats


def format_rib(entries: Iterable[RibEntry]) -> list[str]:
    lines = []
    for e in entries:
        path = " ".join(str(a) for a in e.as_path)
        if e.source_vantage:
            lines.append(f"{e.prefix}|{path}|{e.source_vantage}")
        else:
            lines.append(f"{e.prefix}|{path}")
    return lines


# ---------------------------------------------------------------------------
# AS relationships

P2C_CODE = -1  # first AS is provider of second
P2P_CODE = 0


@dataclass(frozen=True)
class RelEdge:
    """A labeled AS adjacency as read from the relationships file."""

    a: int
    b: int
    code: int  # P2C_CODE: a is provider of b; P2P_CODE: peers


def parse_relationships(lines: Iterable[str]) -> tuple[list[RelEdge], ParseStats]:
    """Parse a relationships file, deduplicating repeated edges.

    Two lines that assign different relationships to the same AS pair are
    a hard error: silently relabeling a link would corrupt every
    valley-free decision made downstream.
    """
    edges: list[RelEdge] = []
    # unordered pair -> (normalized label, first line number)
    seen: dict[tuple[int, int], tuple[tuple, int]] = {}
    stats = ParseStats()
    for line_no, text in content_lines(lines):
        parts = text.split("|")
        if len(parts) != 3:
            stats.reject(line_no, "expected ASN|ASN|CODE")
            continue
        try:
            a = parse_asn(parts[0].strip())
            b = parse_asn(parts[1].strip())
            code = int(parts[2].strip())
        except ValueError as exc:
            stats.reject(line_no, str(exc))
            continue
        if code not in (P2C_CODE, P2P_CODE):
            stats.reject(line_no, f"unknown relationship code {code}")
            continue
        pair = (min(a, b), max(a, b))
        if code == P2P_CODE:
            label: tuple = ("p2p",)
        else:
            label = ("p2c", a)  # provider side of the pair
        if pair in seen:
            prev_label, prev_line = seen[pair]
            if prev_label != label:
                raise ParseError(
                    f"conflicting relationship for {pair[0]}|{pair[1]}: "
                    f"line {prev_line} vs line {line_no}"
                )
            stats.duplicates += 1
            continue
        seen[pair] = (label, line_no)
        edges.append(RelEdge(a, b, code))
        stats.accepted += 1
    return edges, stats


def format_relationships(edges: Iterable[RelEdge]) -> list[str]:
    return [f"{e.a}|{e.b}|{e.code}" for e in edges]


# ---------------------------------------------------------------------------
# Traceroute corpora

GAP = None  # a non-responding hop


@dataclass(frozen=True)
class RouterTrace:
    """One traceroute: hop IPs in probe order, None for '*' gaps."""

    src_label: str
    dst_ip: str
    hops: tuple[Optional[str], ...]


def parse_traces(lines: Iterable[str]) -> tuple[list[RouterTrace], ParseStats]:
    traces: list[RouterTrace] = []
    stats = ParseStats()
    for line_no, text in content_lines(lines):
        parts = text.split("|")
        if len(parts) != 3:
            stats.reject(line_no, "expected SRC|DST_IP|HOPS")
            continue
        try:
            dst = parse_ipv4(parts[1].strip())
            tokens = [t.strip() for t in parts[2].split(",")] if parts[2] else []
            if not tokens or tokens == [""]:
                raise ValueError("empty hop list")
            hops = tuple(GAP if t == "*" else parse_ipv4(t) for t in tokens)
        except (ValueError, ipaddress.AddressValueError) as exc:
            stats.reject(line_no, str(exc))
            continue
        traces.append(RouterTrace(parts[0].strip(), dst, hops))
        stats.accepted += 1
    return traces, stats


def format_traces(traces: Iterable[RouterTrace]) -> list[str]:
    lines = []
    for t in traces:
        hops = ",".join("*" if h is GAP else h for h in t.hops)
        lines.append(f"{t.src_label}|{t.dst_ip}|{hops}")
    return lines


# ---------------------------------------------------------------------------
# Alias maps


@dataclass(frozen=True)
class AliasMap:
    """IP -> router identity; unlisted IPs are their own router."""

    mapping: dict[str, str]

    def resolve(self, ip: str) -> str:
        return self.mapping.get(ip, ip)


def parse_alias_map(lines: Iterable[str]) -> tuple[AliasMap, ParseStats]:
    """Parse alias sets; the canonical RouterId is the lexicographically
    smallest member IP. Alias sets must be disjoint."""
    mapping: dict[str, str] = {}
    stats = ParseStats()
    for line_no, text in content_lines(lines):
        try:
            ips = [parse_ipv4(t) for t in text.split()]
        except (ValueError, ipaddress.AddressValueError) as exc:
            stats.reject(line_no, str(exc))
            continue
        router_id = min(ips)
        for ip in ips:
            if ip in mapping:
                raise ParseError(
                    f"line {line_no}: IP {ip} appears in more than one alias set"
                )
            mapping[ip] = router_id
        stats.accepted += 1
    return AliasMap(mapping), stats


def format_alias_map(aliases: AliasMap) -> list[str]:
    routers: dict[str, list[str]] = {}
    for ip, router_id in aliases.mapping.items():
        routers.setdefault(router_id, []).append(ip)
    return [" ".join(sorted(ips)) for _, ips in sorted(routers.items())]


# ---------------------------------------------------------------------------
# Country data


@dataclass(frozen=True)
class CountryMap:
    """ASN -> country code, plus the set of censoring countries."""

    mapping: dict[int, str]
    censor_set: frozenset[str]

    def country_of(self, asn: int) -> Optional[str]:
        return self.mapping.get(asn)

    def is_censor(self, asn: int) -> bool:
        code = self.mapping.get(asn)
        return code is not None and code in self.censor_set


def parse_countries(lines: Iterable[str]) -> tuple[dict[int, str], ParseStats]:
    mapping: dict[int, str] = {}
    stats = ParseStats()
    for line_no, text in content_lines(lines):
        parts = text.split("|")
        if len(parts) != 2:
            stats.reject(line_no, "expected ASN|CC")
            continue
        try:
            asn = parse_asn(parts[0].strip())
        except ValueError as exc:
            stats.reject(line_no, str(exc))
            continue
        code = parts[1].strip()
        if not _CC_RE.match(code):
            stats.reject(line_no, f"not an alpha-2 country code: {code!r}")
            continue
        if asn in mapping:
            if mapping[asn] != code:
                stats.reject(line_no, f"conflicting country for AS{asn}")
            else:
                stats.duplicates += 1
            continue
        mapping[asn] = code
        stats.accepted += 1
    return mapping, stats


def parse_censors(lines: Iterable[str]) -> tuple[set[str], ParseStats]:
    censors: set[str] = set()
    stats = ParseStats()
    for line_no, text in content_lines(lines):
        code = text.strip()
        if not _CC_RE.match(code):
            stats.reject(line_no, f"not an alpha-2 country code: {code!r}")
            continue
        if code in censors:
            stats.duplicates += 1
            continue
        censors.add(code)
        stats.accepted += 1
    return censors, stats


def format_countries(mapping: dict[int, str]) -> list[str]:
    return [f"{asn}|{cc}" for asn, cc in sorted(mapping.items())]


# ---------------------------------------------------------------------------
# Target prefixes


@dataclass(frozen=True)
class PrefixTarget:
    prefix: Prefix
    label: str = ""


def parse_prefix_list(lines: Iterable[str]) -> tuple[list[PrefixTarget], ParseStats]:
    targets: list[PrefixTarget] = []
    stats = ParseStats()
    for line_no, text in content_lines(lines):
        parts = text.split("|")
        if len(parts) not in (1, 2):
            stats.reject(line_no, "expected PREFIX[|LABEL]")
            continue
        try:
            prefix, had_host_bits = parse_prefix(parts[0].strip())
        except (ValueError, ipaddress.AddressValueError) as exc:
            stats.reject(line_no, str(exc))
            continue
        if had_host_bits:
            stats.canonicalized += 1
        label = parts[1].strip() if len(parts) == 2 else ""
        targets.append(PrefixTarget(prefix, label))
        stats.accepted += 1
    return targets, stats


def format_prefix_list(targets: Iterable[PrefixTarget]) -> list[str]:
    return [f"{t.prefix}|{t.label}" if t.label else str(t.prefix) for t in targets]


# ---------------------------------------------------------------------------
# Prefix -> AS attribution data


def parse_p2a(lines: Iterable[str]) -> tuple[list[tuple[Prefix, int]], ParseStats]:
    """Parse prefix->ASN attribution pairs.

    The same prefix attributed to two different ASNs is a hard error;
    identical repeats are deduplicated.
    """
    pairs: list[tuple[Prefix, int]] = []
    seen: dict[Prefix, tuple[int, int]] = {}
    stats = ParseStats()
    for line_no, text in content_lines(lines):
        parts = text.split("|")
        if len(parts) != 2:
            stats.reject(line_no, "expected PREFIX|ASN")
            continue
        try:
            prefix, _ = parse_prefix(parts[0].strip())
            asn = parse_asn(parts[1].strip())
        except (ValueError, ipaddress.AddressValueError) as exc:
            stats.reject(line_no, str(exc))
            continue
        if prefix in seen:
            prev_asn, prev_line = seen[prefix]
            if prev_asn != asn:
                raise ParseError(
                    f"{prefix} attributed to AS{prev_asn} (line {prev_line}) "
                    f"and AS{asn} (line {line_no})"
                )
            stats.duplicates += 1
            continue
        seen[prefix] = (asn, line_no)
        pairs.append((prefix, asn))
        stats.accepted += 1
    return pairs, stats


def format_p2a(pairs: Iterable[tuple[Prefix, int]]) -> list[str]:
    return [f"{prefix}|{asn}" for prefix, asn in pairs]
