"""Seeded synthetic fixtures: topology, tables, traces, aliases.

The generated AS graph is a three-tier hierarchy: a small clique of
peering tier-1 providers, a transit tier multihomed into it (with some
lateral peering), and stub leaves below. Strict tiering means there are
no provider cycles and every AS has a valley-free route to every stub,
so generated table rows are valley-free by construction (the test suite
re-checks this rather than trusting it).

Table rows are shortest valley-free routes from each vantage AS to each
target prefix, found by BFS over (AS, phase) states; a shortest state
path can never revisit an AS, because cutting a revisit loop at the
first visit always yields a shorter valid path.

Router-level corpora alternate between a hub style (a couple of cores
carry nearly everything, so few heavy hitters suffice) and a mesh style
(flat frequencies spread over many routers, where the edge set tends to
win). Everything is driven by one random.Random(seed); identical seeds
give byte-identical bundles.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path as FsPath

from .ingest import (
    AliasMap,
    P2C_CODE,
    P2P_CODE,
    Prefix,
    PrefixTarget,
    RelEdge,
    RibEntry,
    RouterTrace,
    format_alias_map,
    format_countries,
    format_p2a,
    format_prefix_list,
    format_relationships,
    format_rib,
    format_traces,
)
from .topology import Rel, RelationshipGraph, build_graph

NON_CENSOR_POOL = (
    "US", "DE", "SE", "JP", "GB", "FR", "NL", "BR", "KR", "ZA",
    "AU", "ES", "UA", "IT", "MU", "CA", "CH", "SG", "MX", "PL",
)
CENSOR_POOL = ("CN", "RU", "IR")


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_ases: int = 200
    n_prefixes: int = 10
    n_vantages: int = 15
    n_router_ases: int = 4
    traces_per_as: int = 250


@dataclass
class SynthBundle:
    edges: list[RelEdge] = field(default_factory=list)
    countries: dict[int, str] = field(default_factory=dict)
    censors: set[str] = field(default_factory=set)
    targets: list[PrefixTarget] = field(default_factory=list)
    rib: list[RibEntry] = field(default_factory=list)
    traces: list[RouterTrace] = field(default_factory=list)
    aliases: AliasMap = field(default_factory=lambda: AliasMap({}))
    p2a_pairs: list[tuple[Prefix, int]] = field(default_factory=list)
    router_ases: list[int] = field(default_factory=list)

    def graph(self) -> RelationshipGraph:
        return build_graph(self.edges)


def _asn(i: int) -> int:
    return 10 * (i + 1)


def generate_topology(rng: random.Random, n: int) -> tuple[list[RelEdge], dict[str, list[int]]]:
    """Three-tier hierarchy; returns edges and the tier membership."""
    if n < 8:
        raise ValueError("need at least 8 ASes for a three-tier hierarchy")
    asns = [_asn(i) for i in range(n)]
    n1 = max(3, n // 33)
    n2 = max(4, n // 4)
    tier1 = asns[:n1]
    tier2 = asns[n1 : n1 + n2]
    tier3 = asns[n1 + n2 :]
    edges: list[RelEdge] = []
    for i, a in enumerate(tier1):
        for b in tier1[i + 1 :]:
            edges.append(RelEdge(a, b, P2P_CODE))
    for a in tier2:
        for provider in sorted(rng.sample(tier1, rng.randint(1, min(3, n1)))):
            edges.append(RelEdge(provider, a, P2C_CODE))
    for i, a in enumerate(tier2):
        for b in tier2[i + 1 :]:
            if rng.random() < 0.04:
                edges.append(RelEdge(a, b, P2P_CODE))
    for a in tier3:
        k = rng.randint(1, min(2, n2))
        for provider in sorted(rng.sample(tier2, k)):
            edges.append(RelEdge(provider, a, P2C_CODE))
        if rng.random() < 0.1:
            edges.append(RelEdge(rng.choice(tier1), a, P2C_CODE))
    return edges, {"tier1": tier1, "tier2": tier2, "tier3": tier3}


def assign_countries(
    rng: random.Random, tiers: dict[str, list[int]]
) -> tuple[dict[int, str], set[str]]:
    """Tier-1 stays in non-censoring countries; the rest draw from both
    pools so censor-country transit ASes exist for the exclusion logic."""
    countries: dict[int, str] = {}
    for asn in tiers["tier1"]:
        countries[asn] = rng.choice(NON_CENSOR_POOL)
    full_pool = NON_CENSOR_POOL + CENSOR_POOL * 2
    for asn in tiers["tier2"] + tiers["tier3"]:
        countries[asn] = rng.choice(full_pool)
    return countries, set(CENSOR_POOL)


def _vf_route(g: RelationshipGraph, start: int, goal: int) -> tuple[int, ...] | None:
    """Shortest valley-free route via BFS over (AS, phase) states."""
    if start == goal:
        return (start,)
    UP, PEER, DOWN = 0, 1, 2
    parent: dict[tuple[int, int], tuple[int, int] | None] = {(start, UP): None}
    queue: list[tuple[int, int]] = [(start, UP)]
    while queue:
        next_queue: list[tuple[int, int]] = []
        for state in queue:
            asn, phase = state
            for neighbor in g.neighbors(asn):
                rel = g.relationship(asn, neighbor)
                if rel is Rel.C2P:
                    if phase != UP:
                        continue
                    new_state = (neighbor, UP)
                elif rel is Rel.P2P:
                    if phase != UP:
                        continue
                    new_state = (neighbor, PEER)
                else:
                    new_state = (neighbor, DOWN)
                if new_state in parent:
                    continue
                parent[new_state] = state
                if neighbor == goal:
                    hops = [neighbor]
                    walk: tuple[int, int] | None = state
                    while walk is not None:
                        hops.append(walk[0])
                        walk = parent[walk]
                    return tuple(reversed(hops))
                next_queue.append(new_state)
        queue = next_queue
    return None


def generate_rib(
    rng: random.Random,
    g: RelationshipGraph,
    targets: list[PrefixTarget],
    homes: dict[Prefix, int],
    n_vantages: int,
) -> list[RibEntry]:
    vantages = sorted(rng.sample(sorted(g.vertices), min(n_vantages, g.vertex_count)))
    rib: list[RibEntry] = []
    for target in targets:
        home = homes[target.prefix]
        for i, vantage in enumerate(vantages):
            route = _vf_route(g, vantage, home)
            if route is None:
                continue
            rib.append(RibEntry(target.prefix, route, f"vp{i:02d}"))
    return rib


# ---------------------------------------------------------------------------
# Router-level corpora


@dataclass
class _Router:
    ips: list[str]

    @property
    def router_id(self) -> str:
        return min(self.ips)


def _generate_router_corpus(
    rng: random.Random,
    asn: int,
    as_index: int,
    style: str,
    neighbor_asns: list[int],
    n_traces: int,
    ext_blocks: dict[int, Prefix],
) -> tuple[list[RouterTrace], dict[str, list[str]], list[tuple[Prefix, int]]]:
    """Traces through one AS plus its alias groups and address block.

    Hub style: a couple of backbone cores sit on nearly every trace, so a
    tiny heavy-hitter set beats the edge set. Mesh style: a large block
    of mutually redundant mid-frequency cores ranks above a long tail of
    single-trace border edges, so the frequency walk grinds past the edge
    count and the edge set wins."""
    block = Prefix((172 << 24) | ((16 + as_index) << 16), 16)
    host = [0]
    routers: list[_Router] = []

    def new_router(max_ips: int = 1) -> _Router:
        host[0] += rng.randint(1, 3)  # leave address gaps like real plans do
        ips = []
        for _ in range(rng.randint(1, max_ips)):
            host[0] += 1
            value = block.network + host[0]
            ips.append(
                f"172.{16 + as_index}.{(value >> 8) & 0xFF}.{value & 0xFF}"
            )
        router = _Router(ips)
        routers.append(router)
        return router

    def ext_ip(neighbor: int) -> str:
        # Border interfaces are few per neighbor, so foreign corpora see a
        # stable handful of this AS's addresses rather than hundreds.
        ext = ext_blocks[neighbor]
        value = ext.network + rng.randint(1, 3)
        return (
            f"{(value >> 24) & 0xFF}.{(value >> 16) & 0xFF}."
            f"{(value >> 8) & 0xFF}.{value & 0xFF}"
        )

    def assemble(
        ingress: _Router, mid: list[_Router], egress: _Router | None
    ) -> RouterTrace:
        hops: list[str | None] = []
        neighbor = rng.choice(neighbor_asns)
        if rng.random() < 0.8:
            hops.append(ext_ip(neighbor))
        hops.append(rng.choice(ingress.ips))
        for router in mid:
            if rng.random() < 0.05:
                hops.append(None)  # silent hop inside the span
            elif rng.random() < 0.03:
                hops.append(ext_ip(rng.choice(neighbor_asns)))  # third party
            hops.append(rng.choice(router.ips))
        if egress is not None and (egress is not ingress or mid):
            hops.append(rng.choice(egress.ips))
        if egress is not None and rng.random() < 0.7:
            out_neighbor = rng.choice(neighbor_asns)
            hops.append(ext_ip(out_neighbor))
            dst = ext_ip(out_neighbor)
        else:
            host[0] += 1
            value = block.network + host[0]
            dst = f"172.{16 + as_index}.{(value >> 8) & 0xFF}.{value & 0xFF}"
        return RouterTrace(f"pl{rng.randint(0, 389):03d}", dst, tuple(hops))

    traces: list[RouterTrace] = []
    if style == "hub":
        edge_pool = [new_router(2) for _ in range(rng.randint(8, 14))]
        hubs = [new_router(3) for _ in range(rng.randint(2, 3))]
        spokes = [new_router(2) for _ in range(rng.randint(10, 20))]
        for _ in range(n_traces):
            mid = [rng.choice(hubs)]
            if rng.random() < 0.4:
                mid.append(rng.choice(spokes))
            traces.append(
                assemble(rng.choice(edge_pool), mid, rng.choice(edge_pool))
            )
    else:
        popular = [new_router(2) for _ in range(rng.randint(10, 14))]
        mid_cores = [new_router(1) for _ in range(max(4, n_traces // 6))]
        n_tail = max(1, int(n_traces * rng.uniform(0.12, 0.16)))
        for _ in range(n_traces - n_tail):
            mid = [rng.choice(mid_cores) for _ in range(rng.randint(2, 3))]
            traces.append(
                assemble(rng.choice(popular), mid, rng.choice(popular))
            )
        for _ in range(n_tail):
            # Single-trace border edge: enters and terminates immediately.
            traces.append(assemble(new_router(1), [], None))
    alias_groups = {r.router_id: sorted(r.ips) for r in routers if len(r.ips) > 1}
    return traces, alias_groups, [(block, asn)]


def generate_bundle(config: SynthConfig) -> SynthBundle:
    rng = random.Random(config.seed)
    bundle = SynthBundle()
    bundle.edges, tiers = generate_topology(rng, config.n_ases)
    bundle.countries, bundle.censors = assign_countries(rng, tiers)
    g = bundle.graph()

    home_pool = tiers["tier3"] + tiers["tier2"]
    homes: dict[Prefix, int] = {}
    for i in range(config.n_prefixes):
        prefix = Prefix((10 << 24) | ((i + 1) << 8), 24)
        homes[prefix] = rng.choice(home_pool)
        bundle.targets.append(PrefixTarget(prefix, f"site{i:03d}.example"))
    bundle.rib = generate_rib(rng, g, bundle.targets, homes, config.n_vantages)

    by_degree = sorted(g.vertices, key=lambda a: (-len(g.neighbors(a)), a))
    bundle.router_ases = by_degree[: config.n_router_ases]
    ext_blocks: dict[int, Prefix] = {}
    next_block = [0]

    def block_for(asn: int) -> Prefix:
        if asn not in ext_blocks:
            q = next_block[0]
            next_block[0] += 1
            ext_blocks[asn] = Prefix((10 << 24) | ((128 + q) << 16), 16)
        return ext_blocks[asn]

    alias_mapping: dict[str, str] = {}
    router_as_set = set(bundle.router_ases)
    for j, asn in enumerate(bundle.router_ases):
        # Border hops point at non-router neighbors so the per-AS corpora
        # stay disjoint after trimming.
        neighbors = [n for n in g.neighbors(asn) if n not in router_as_set]
        if not neighbors:
            neighbors = g.neighbors(asn)
        for neighbor in neighbors:
            block_for(neighbor)
        style = "hub" if j % 2 == 0 else "mesh"
        traces, groups, p2a = _generate_router_corpus(
            rng, asn, j, style, neighbors, config.traces_per_as, ext_blocks
        )
        bundle.traces.extend(traces)
        for router_id, ips in groups.items():
            for ip in ips:
                alias_mapping[ip] = router_id
        bundle.p2a_pairs.extend(p2a)
    bundle.aliases = AliasMap(alias_mapping)
    bundle.p2a_pairs.extend(
        (block, asn) for asn, block in sorted(ext_blocks.items())
    )
    return bundle


BUNDLE_FILES = {
    "rib": "synth.rib.txt",
    "rels": "synth.rels.txt",
    "prefixes": "synth.prefixes.txt",
    "countries": "synth.countries.txt",
    "censors": "synth.censors.txt",
    "traces": "synth.traces.txt",
    "aliases": "synth.aliases.txt",
    "p2a": "synth.p2a.txt",
}


def write_bundle(bundle: SynthBundle, outdir: FsPath) -> dict[str, FsPath]:
    """Write all bundle files; returns role -> path."""
    outdir = FsPath(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    payloads = {
        "rib": format_rib(bundle.rib),
        "rels": format_relationships(bundle.edges),
        "prefixes": format_prefix_list(bundle.targets),
        "countries": format_countries(bundle.countries),
        "censors": sorted(bundle.censors),
        "traces": format_traces(bundle.traces),
        "aliases": format_alias_map(bundle.aliases),
        "p2a": format_p2a(bundle.p2a_pairs),
    }
    paths = {}
    for role, lines in payloads.items():
        path = outdir / BUNDLE_FILES[role]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths[role] = path
    return paths
