"""Multi-command front end: infer, place, routers, analyze, synth, report.

Configuration comes from defaults, then an optional key=value config
file, then command-line flags (flags win). Every command writes its
outputs under one run directory and records the resolved configuration
hash in manifest.json there, so identical inputs and settings always
produce byte-identical output trees.

Exit codes: 0 success, 2 missing input file, 3 unrecoverable parse
error, 4 empty path corpus, 5 no traces touch the requested AS.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import analysis, ingest, inference, placement, routermap, synth
from .topology import build_graph, customer_cone

EXIT_OK = 0
EXIT_MISSING_INPUT = 2
EXIT_PARSE_ERROR = 3
EXIT_EMPTY_CORPUS = 4
EXIT_NO_TRACES = 5


@dataclass
class RunConfig:
    rib: str = ""
    rels: str = ""
    prefixes: str = ""
    countries: str = ""
    censors: str = ""
    traces: str = ""
    aliases: str = ""
    p2a: str = ""
    paths: str = ""  # defaults to <out>/paths.txt
    out: str = "out"
    asn: str = ""  # comma-separated AS numbers for the routers command
    threshold_as: float = 0.9
    threshold_router: float = 0.9
    unit_cost: int = analysis.DEFAULT_UNIT_COST_USD
    router_total: int = -1  # -1: take the total from placement_rollup.json
    seed: int = 0
    synth_ases: int = 200
    synth_prefixes: int = 10
    synth_vantages: int = 15
    synth_router_ases: int = 4
    synth_traces: int = 250
    cdf_top: int = 50
    cone_top: int = 10

    def paths_file(self) -> Path:
        return Path(self.paths) if self.paths else Path(self.out) / "paths.txt"

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if kind == "float":
        return float(raw)
    if kind == "int":
        return int(raw)
    return raw


def load_config_file(path: Path) -> dict:
    """key=value lines, # comments; unknown keys are an error."""
    values: dict = {}
    for line_no, text in ingest.content_lines(path.read_text().splitlines()):
        key, sep, raw = text.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _FIELD_TYPES:
            raise ingest.ParseError(f"{path}:{line_no}: bad config line {text!r}")
        values[key] = _coerce(key, raw.strip())
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if args.config:
        for key, value in load_config_file(Path(args.config)).items():
            setattr(config, key, value)
    for name in _FIELD_TYPES:
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    return config


def config_hash(config: RunConfig) -> str:
    canonical = json.dumps(config.to_dict(), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def _write_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _update_manifest(config: RunConfig, command: str) -> None:
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest_path = outdir / "manifest.json"
    manifest = {}
    if manifest_path.is_file():
        manifest = json.loads(manifest_path.read_text())
    manifest[command] = {"config_hash": config_hash(config), "config": config.to_dict()}
    _write_json(manifest, manifest_path)


def _require_files(config: RunConfig, names: list[str]) -> list[str]:
    missing = []
    for name in names:
        value = getattr(config, name)
        if not value:
            missing.append(f"--{name.replace('_', '-')} not given")
        elif not Path(value).is_file():
            missing.append(f"{name} file not found: {value}")
    return missing


def _read_lines(path: str) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def _load_country_map(config: RunConfig) -> ingest.CountryMap:
    mapping: dict[int, str] = {}
    censors: set[str] = set()
    if config.countries and Path(config.countries).is_file():
        mapping, _ = ingest.parse_countries(_read_lines(config.countries))
    if config.censors and Path(config.censors).is_file():
        censors, _ = ingest.parse_censors(_read_lines(config.censors))
    return ingest.CountryMap(mapping, frozenset(censors))


# ---------------------------------------------------------------------------
# Commands


def cmd_infer(config: RunConfig) -> int:
    missing = _require_files(config, ["rib", "rels", "prefixes"])
    if missing:
        print("; ".join(missing), file=sys.stderr)
        return EXIT_MISSING_INPUT
    entries, rib_stats = ingest.parse_rib(_read_lines(config.rib))
    edges, rel_stats = ingest.parse_relationships(_read_lines(config.rels))
    targets, target_stats = ingest.parse_prefix_list(_read_lines(config.prefixes))
    graph = build_graph(edges)
    corpus, results = inference.build_corpus(
        [t.prefix for t in targets], entries, graph
    )
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    config.paths_file().write_text(
        "\n".join(corpus.to_lines()) + ("\n" if corpus.total_paths else "")
    )
    labels = {t.prefix: t.label for t in targets}
    stats = {
        "graph": {"vertices": graph.vertex_count, "pairs": graph.pair_count},
        "parse": {
            "rib_accepted": rib_stats.accepted,
            "rib_rejected": rib_stats.rejected,
            "rib_loops_dropped": rib_stats.loops_dropped,
            "rels_accepted": rel_stats.accepted,
            "rels_rejected": rel_stats.rejected,
            "prefixes_accepted": target_stats.accepted,
        },
        "prefixes": [
            {
                "prefix": str(r.prefix),
                "label": labels.get(r.prefix, ""),
                "covered_ases": r.covered,
                "graph_ases": graph.vertex_count,
                "coverage": r.covered / graph.vertex_count if graph.vertex_count else 0.0,
                "rounds": r.rounds,
                "sure_paths": r.sure_total,
                "sure_dropped_not_valley_free": r.sure_dropped,
                "home_ases": list(r.homes),
                "multi_origin": len(r.homes) > 1,
            }
            for r in results
        ],
    }
    _write_json(stats, outdir / "infer_stats.json")
    _update_manifest(config, "infer")
    for r in results:
        if r.sure_total == 0:
            print(f"warning: no table rows for {r.prefix}", file=sys.stderr)
    print(f"inferred {corpus.total_paths} paths for {len(results)} prefixes")
    return EXIT_OK


def _load_corpus(config: RunConfig) -> tuple[inference.PathCorpus, int] | int:
    paths_file = config.paths_file()
    if not paths_file.is_file():
        print(f"paths file not found: {paths_file}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    corpus, _ = inference.PathCorpus.from_lines(_read_lines(str(paths_file)))
    if corpus.total_paths == 0:
        print(f"empty corpus in {paths_file}", file=sys.stderr)
        return EXIT_EMPTY_CORPUS
    return corpus, EXIT_OK


def cmd_place(config: RunConfig) -> int:
    loaded = _load_corpus(config)
    if isinstance(loaded, int):
        return loaded
    corpus, _ = loaded
    countries = _load_country_map(config)
    table = placement.rank_ases(corpus)
    report = placement.find_key_ases(table, corpus, config.threshold_as, countries)
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    placement.write_placement_json(report, outdir / "placement.json")
    placement.write_ranking_csv(table, countries, outdir / "ranking.csv")
    rows = placement.cdf_series(table, corpus, min(config.cdf_top, len(table.order)))
    placement.write_cdf_csv(rows, outdir / "cdf.csv")
    _update_manifest(config, "place")
    if not report.threshold_reached:
        print(
            f"warning: threshold {config.threshold_as} unreachable; "
            f"coverage {report.coverage:.4f}",
            file=sys.stderr,
        )
    print(
        f"selected {len(report.selected)} ASes covering "
        f"{report.coverage:.4f} of {report.total_paths} paths"
    )
    return EXIT_OK


def cmd_routers(config: RunConfig) -> int:
    missing = _require_files(config, ["traces", "p2a"])
    if missing:
        print("; ".join(missing), file=sys.stderr)
        return EXIT_MISSING_INPUT
    if not config.asn:
        print("--asn required for the routers command", file=sys.stderr)
        return EXIT_MISSING_INPUT
    try:
        asns = [ingest.parse_asn(tok.strip()) for tok in config.asn.split(",")]
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_MISSING_INPUT
    traces, _ = ingest.parse_traces(_read_lines(config.traces))
    pairs, _ = ingest.parse_p2a(_read_lines(config.p2a))
    p2a = routermap.PrefixToAsMap(pairs)
    if config.aliases:
        if not Path(config.aliases).is_file():
            print(f"aliases file not found: {config.aliases}", file=sys.stderr)
            return EXIT_MISSING_INPUT
        aliases, _ = ingest.parse_alias_map(_read_lines(config.aliases))
    else:
        aliases = ingest.AliasMap({})
    countries = _load_country_map(config)
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    placements = []
    for asn in asns:
        trimmed = [
            t for t in (routermap.trim_trace(tr, p2a, asn) for tr in traces)
            if t is not None
        ]
        if not trimmed:
            print(f"no traces traverse AS{asn}", file=sys.stderr)
            return EXIT_NO_TRACES
        census = routermap.classify_routers(trimmed, aliases, asn)
        chosen = routermap.find_key_routers(census, config.threshold_router)
        placements.append(chosen)
        routermap.write_routers_csv(census, chosen, outdir / f"routers_{asn}.csv")
        print(
            f"AS{asn}: E={chosen.edge_count} C={chosen.core_count} "
            f"H={chosen.heavy_count} required={chosen.required} ({chosen.selected_kind})"
        )
    rollup = routermap.placement_rollup(placements, countries)
    routermap.write_rollup_json(rollup, placements, outdir / "placement_rollup.json")
    _update_manifest(config, "routers")
    print(f"total routers required: {rollup.total_required}")
    return EXIT_OK


def cmd_analyze(config: RunConfig) -> int:
    missing = _require_files(config, ["rels"])
    if missing:
        print("; ".join(missing), file=sys.stderr)
        return EXIT_MISSING_INPUT
    loaded = _load_corpus(config)
    if isinstance(loaded, int):
        return loaded
    corpus, _ = loaded
    edges, _ = ingest.parse_relationships(_read_lines(config.rels))
    graph = build_graph(edges)
    countries = _load_country_map(config)
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    failures: list[str] = []

    known_codes = set(countries.mapping.values())
    reports = []
    for code in sorted(countries.censor_set):
        if code not in known_codes:
            failures.append(f"collateral: no AS maps to {code}")
            continue
        reports.append(analysis.collateral_damage(corpus, countries, code))
    analysis.write_collateral_csv(reports, outdir / "collateral.csv")

    table = placement.rank_ases(corpus)
    bypass_rows = []
    for asn in table.order[: config.cone_top]:
        if asn in graph:
            bypass_rows.append(analysis.cone_bypass(corpus, graph, asn))
        else:
            failures.append(f"cone_bypass: AS{asn} not in graph")
    analysis.write_cone_bypass_csv(bypass_rows, outdir / "cone_bypass.csv")

    transit = [asn for asn in table.order if table.counts[asn] > 0 and asn in graph]
    spearman_payload: dict = {"transit_ases": len(transit)}
    try:
        freqs = [table.counts[asn] for asn in transit]
        cones = [len(customer_cone(graph, asn)) for asn in transit]
        spearman_payload["coefficient"] = analysis.spearman_rank(freqs, cones)
    except ValueError as exc:
        spearman_payload["error"] = str(exc)
        failures.append(f"spearman: {exc}")
    analysis.write_spearman_json(spearman_payload, outdir / "spearman.json")

    total = config.router_total
    if total < 0:
        rollup_path = outdir / "placement_rollup.json"
        if rollup_path.is_file():
            total = json.loads(rollup_path.read_text())["total_required"]
    if total >= 0:
        _write_json(
            {
                "routers": total,
                "unit_cost_usd": config.unit_cost,
                "total_usd": analysis.cost_estimate(total, config.unit_cost),
            },
            outdir / "cost.json",
        )
    else:
        print("no router total available; skipping cost estimate", file=sys.stderr)

    _update_manifest(config, "analyze")
    for failure in failures:
        print(f"warning: {failure}", file=sys.stderr)
    print(f"analysis artifacts written to {outdir}")
    return 1 if failures else EXIT_OK


def cmd_synth(config: RunConfig) -> int:
    bundle = synth.generate_bundle(
        synth.SynthConfig(
            seed=config.seed,
            n_ases=config.synth_ases,
            n_prefixes=config.synth_prefixes,
            n_vantages=config.synth_vantages,
            n_router_ases=config.synth_router_ases,
            traces_per_as=config.synth_traces,
        )
    )
    paths = synth.write_bundle(bundle, Path(config.out))
    _update_manifest(config, "synth")
    print(f"wrote {len(paths)} fixture files to {config.out}")
    print("router-level ASes: " + ",".join(str(a) for a in bundle.router_ases))
    return EXIT_OK


def cmd_report(config: RunConfig) -> int:
    outdir = Path(config.out)
    if not outdir.is_dir():
        print(f"run directory not found: {outdir}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    summary: dict = {}
    for name in (
        "infer_stats",
        "placement",
        "placement_rollup",
        "spearman",
        "cost",
        "manifest",
    ):
        path = outdir / f"{name}.json"
        if path.is_file():
            summary[name] = json.loads(path.read_text())
    for name in ("ranking", "cdf", "collateral", "cone_bypass"):
        path = outdir / f"{name}.csv"
        if path.is_file():
            lines = path.read_text().splitlines()
            summary[name] = {"rows": max(0, len(lines) - 1)}
    _write_json(summary, outdir / "report.json")
    print(f"report.json written with {len(summary)} sections")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file; flags override it")
    for name in _FIELD_TYPES:
        flag = "--" + name.replace("_", "-")
        kind = _FIELD_TYPES[name]
        if kind == "float":
            common.add_argument(flag, type=float, default=None)
        elif kind == "int":
            common.add_argument(flag, type=int, default=None)
        else:
            common.add_argument(flag, default=None)
    parser = argparse.ArgumentParser(
        prog="drplace",
        description="AS-level path inference and decoy-router placement toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, helptext in (
        ("infer", cmd_infer, "estimate per-prefix AS paths from table snapshots"),
        ("place", cmd_place, "rank ASes and select the key-AS set"),
        ("routers", cmd_routers, "map routers inside an AS and pick min(E, H)"),
        ("analyze", cmd_analyze, "collateral, cone-bypass, rank correlation, cost"),
        ("synth", cmd_synth, "generate a seeded synthetic fixture bundle"),
        ("report", cmd_report, "aggregate run outputs into report.json"),
    ):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
    except (ingest.ParseError, ValueError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PARSE_ERROR
    try:
        return args.func(config)
    except ingest.ParseError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PARSE_ERROR


if __name__ == "__main__":
    sys.exit(main())
