from __future__ import annotations

import json
from pathlib import Path

import pytest

from drplace import cli
from drplace.inference import PathCorpus, corpus_violations
from drplace.ingest import parse_relationships
from drplace.synth import SynthConfig, generate_bundle
from drplace.topology import build_graph

DATA = Path(__file__).parent / "data"


def demo_args(out: Path) -> list[str]:
    return [
        "--rib", str(DATA / "twotier.rib.txt"),
        "--rels", str(DATA / "twotier.rels.txt"),
        "--prefixes", str(DATA / "twotier.prefixes.txt"),
        "--countries", str(DATA / "twotier.countries.txt"),
        "--censors", str(DATA / "twotier.censors.txt"),
        "--out", str(out),
    ]


class TestExitCodes:
    def test_missing_input_is_2(self, tmp_path):
        code = cli.main(["infer", "--rib", str(tmp_path / "nope.txt"),
                         "--rels", str(DATA / "twotier.rels.txt"),
                         "--prefixes", str(DATA / "twotier.prefixes.txt"),
                         "--out", str(tmp_path / "out")])
        assert code == 2

    def test_unset_input_is_2(self, tmp_path):
        assert cli.main(["infer", "--out", str(tmp_path / "out")]) == 2

    def test_parse_hard_error_is_3(self, tmp_path):
        bad = tmp_path / "bad.rels.txt"
        bad.write_text("1|2|-1\n2|1|-1\n")
        code = cli.main(["infer", "--rib", str(DATA / "twotier.rib.txt"),
                         "--rels", str(bad),
                         "--prefixes", str(DATA / "twotier.prefixes.txt"),
                         "--out", str(tmp_path / "out")])
        assert code == 3

    def test_empty_corpus_is_4(self, tmp_path):
        paths_file = tmp_path / "paths.txt"
        paths_file.write_text("# nothing here\n")
        code = cli.main(["place", "--paths", str(paths_file),
                         "--out", str(tmp_path / "out")])
        assert code == 4

    def test_no_matching_traces_is_5(self, tmp_path):
        traces = tmp_path / "t.txt"
        traces.write_text("pl01|10.1.1.1|192.0.2.1\n")
        p2a = tmp_path / "p.txt"
        p2a.write_text("192.0.2.0/24|65001\n")
        code = cli.main(["routers", "--traces", str(traces), "--p2a", str(p2a),
                         "--asn", "65002", "--out", str(tmp_path / "out")])
        assert code == 5


class TestInferPlace:
    def test_demo_fixture_inference(self, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["infer"] + demo_args(out)) == 0
        corpus, stats = PathCorpus.from_lines(
            (out / "paths.txt").read_text().splitlines()
        )
        assert stats.rejected == 0
        assert corpus.total_paths == 7  # every AS reaches the demo prefix
        edges, _ = parse_relationships(
            (DATA / "twotier.rels.txt").read_text().splitlines()
        )
        assert corpus_violations(corpus, build_graph(edges)) == []
        stats_doc = json.loads((out / "infer_stats.json").read_text())
        assert stats_doc["prefixes"][0]["coverage"] == 1.0

    def test_rerun_byte_identical(self, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["infer"] + demo_args(out)) == 0
        first = (out / "paths.txt").read_bytes()
        first_stats = (out / "infer_stats.json").read_bytes()
        assert cli.main(["infer"] + demo_args(out)) == 0
        assert (out / "paths.txt").read_bytes() == first
        assert (out / "infer_stats.json").read_bytes() == first_stats

    def test_place_excludes_censor_countries(self, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["infer"] + demo_args(out)) == 0
        assert cli.main(["place"] + demo_args(out)) == 0
        report = json.loads((out / "placement.json").read_text())
        censored = {4, 7}  # CN and RU ASes in the demo country file
        assert not censored & {s["asn"] for s in report["selected"]}
        assert (out / "ranking.csv").is_file()
        assert (out / "cdf.csv").is_file()

    def test_manifest_and_config_precedence(self, tmp_path):
        out = tmp_path / "out"
        cfg = tmp_path / "run.cfg"
        cfg.write_text("threshold_as=0.5\nseed=9\n# comment\n")
        assert cli.main(["infer"] + demo_args(out) +
                        ["--config", str(cfg), "--threshold-as", "0.8"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        resolved = manifest["infer"]["config"]
        assert resolved["threshold_as"] == 0.8  # flag beats config file
        assert resolved["seed"] == 9  # config file beats default
        assert "config_hash" in manifest["infer"]

    def test_bad_config_file_is_3(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("no_such_key=1\n")
        assert cli.main(["infer", "--config", str(cfg)]) == 3


class TestFullPipeline:
    def test_synth_to_report(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        synth_flags = ["--seed", "3", "--synth-ases", "60",
                       "--synth-prefixes", "4", "--synth-traces", "100"]
        assert cli.main(["synth", "--out", "bundle"] + synth_flags) == 0
        bundle = generate_bundle(
            SynthConfig(seed=3, n_ases=60, n_prefixes=4, traces_per_as=100)
        )
        run = [
            "--rib", "bundle/synth.rib.txt",
            "--rels", "bundle/synth.rels.txt",
            "--prefixes", "bundle/synth.prefixes.txt",
            "--countries", "bundle/synth.countries.txt",
            "--censors", "bundle/synth.censors.txt",
            "--traces", "bundle/synth.traces.txt",
            "--aliases", "bundle/synth.aliases.txt",
            "--p2a", "bundle/synth.p2a.txt",
            "--out", "run",
        ]
        assert cli.main(["infer"] + run) == 0
        assert cli.main(["place"] + run) == 0
        asn_list = ",".join(str(a) for a in bundle.router_ases)
        assert cli.main(["routers", "--asn", asn_list] + run) == 0
        assert cli.main(["analyze"] + run) == 0
        assert cli.main(["report"] + run) == 0
        out = tmp_path / "run"
        for name in (
            "paths.txt", "infer_stats.json", "placement.json", "ranking.csv",
            "cdf.csv", "placement_rollup.json", "collateral.csv",
            "cone_bypass.csv", "spearman.json", "cost.json", "report.json",
            "manifest.json",
        ):
            assert (out / name).is_file(), name
        for asn in bundle.router_ases:
            assert (out / f"routers_{asn}.csv").is_file()
        rollup = json.loads((out / "placement_rollup.json").read_text())
        cost = json.loads((out / "cost.json").read_text())
        assert cost["routers"] == rollup["total_required"]
        assert cost["total_usd"] == rollup["total_required"] * 885_000
        report = json.loads((out / "report.json").read_text())
        assert "placement" in report and "cost" in report

    def test_router_total_flag_overrides_rollup(self, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["infer"] + demo_args(out)) == 0
        assert cli.main(["analyze"] + demo_args(out) +
                        ["--router-total", "11709"]) in (0, 1)
        cost = json.loads((out / "cost.json").read_text())
        assert cost["total_usd"] == 10_362_465_000
