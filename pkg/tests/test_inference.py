from __future__ import annotations

import random

import pytest

from drplace.ingest import RelEdge, RibEntry, parse_prefix
from drplace.inference import (
    AsPath,
    PathCorpus,
    build_corpus,
    corpus_violations,
    extract_sure_paths,
    infer_paths,
    select_best,
)
from drplace.topology import build_graph
from oracles import (
    brute_suffix_frequency,
    oracle_choices,
    random_labeled_graph,
    random_rib,
)


def paths_of(result):
    return {o: (p.hops, p.uncertainty, p.frequency) for o, p in result.chosen.items()}


class TestExtractSurePaths:
    def test_suffix_closure_and_counting(self, prefix):
        entries = [RibEntry(prefix, (7, 3, 1)), RibEntry(prefix, (9, 3, 1))]
        sure = extract_sure_paths(entries, prefix)
        flat = {p.hops: p.frequency for paths in sure.values() for p in paths}
        assert flat == {(7, 3, 1): 1, (9, 3, 1): 1, (3, 1): 2, (1,): 2}

    def test_duplicate_rows_counted(self, prefix):
        entries = [RibEntry(prefix, (7, 3, 1))] * 2
        sure = extract_sure_paths(entries, prefix)
        assert sure[7][0].frequency == 2

    def test_exact_prefix_match_only(self, prefix):
        other, _ = parse_prefix("10.0.0.0/16")  # supernet, must not match
        entries = [RibEntry(other, (7, 3, 1))]
        assert extract_sure_paths(entries, prefix) == {}

    def test_absent_prefix_empty_map(self, prefix):
        assert extract_sure_paths([], prefix) == {}

    def test_frequency_matches_brute_count(self, prefix):
        rng = random.Random(7)
        for _ in range(30):
            g, asns = random_labeled_graph(rng, max_ases=8, max_edges=16)
            entries = random_rib(rng, g, asns, prefix)
            sure = extract_sure_paths(entries, prefix)
            for paths in sure.values():
                for p in paths:
                    assert p.frequency == brute_suffix_frequency(
                        entries, prefix, p.hops
                    )


class TestSelectBest:
    def test_length_dominates(self, prefix):
        short = AsPath(prefix, (1, 2, 3, 4), 1, 3)
        long_sure = AsPath(prefix, (1, 9, 8, 7, 4), 0, 9)
        assert select_best([long_sure, short]) is short

    def test_uncertainty_breaks_length_tie(self, prefix):
        a = AsPath(prefix, (1, 2, 3, 4), 2, 1)
        b = AsPath(prefix, (1, 9, 8, 4), 1, 1)
        assert select_best([a, b]) is b

    def test_frequency_breaks_uncertainty_tie(self, prefix):
        a = AsPath(prefix, (1, 2, 3, 4), 1, 1)
        b = AsPath(prefix, (1, 9, 8, 4), 1, 7)
        assert select_best([a, b]) is b

    def test_lexicographic_last_resort(self, prefix):
        a = AsPath(prefix, (1, 9, 3, 4), 1, 1)
        b = AsPath(prefix, (1, 2, 8, 4), 1, 1)
        assert select_best([a, b]) is b

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            select_best([])


class TestInferPaths:
    def test_demo_topology_shortest_wins(self, demo_graph, prefix):
        # sure path C-F for F's prefix: D must take D-B-C-F over D-B-A-C-F
        entries = [RibEntry(prefix, (3, 6))]
        result = infer_paths(prefix, extract_sure_paths(entries, prefix), demo_graph)
        assert result.chosen[4].hops == (4, 2, 3, 6)
        assert result.chosen[4].uncertainty == 2
        assert result.chosen[5].hops == (5, 2, 3, 6)
        assert result.chosen[1].hops == (1, 3, 6)
        assert result.covered == 7

    def test_sure_origin_beats_equal_length_extension(self, prefix):
        # 1 holds a sure 2-hop path; an inferred 2-hop alternative exists
        g = build_graph([RelEdge(2, 1, -1), RelEdge(3, 1, -1), RelEdge(2, 3, 0)])
        entries = [RibEntry(prefix, (1, 2)), RibEntry(prefix, (3, 2))]
        result = infer_paths(prefix, extract_sure_paths(entries, prefix), g)
        assert result.chosen[1] == AsPath(prefix, (1, 2), 0, 1)

    def test_late_round_shorter_route_wins(self, prefix):
        # The short route via 3 only becomes visible one round after the
        # long sure route via 2; the choice must still be the short one.
        g = build_graph(
            [
                RelEdge(2, 1, -1),
                RelEdge(3, 1, -1),
                RelEdge(4, 2, -1),
                RelEdge(4, 5, 0),
                RelEdge(5, 6, -1),
                RelEdge(3, 6, -1),
            ]
        )
        entries = [RibEntry(prefix, (2, 4, 5, 6))]
        result = infer_paths(prefix, extract_sure_paths(entries, prefix), g)
        assert result.chosen[1].hops == (1, 3, 6)

    def test_provider_uses_customers_secondary_route(self, prefix):
        # 2's best route climbs through its provider 3, which its own
        # provider 1 cannot extend (valley); 1 must still be covered via
        # 2's longer customer route.
        g = build_graph(
            [
                RelEdge(1, 2, -1),
                RelEdge(3, 2, -1),
                RelEdge(3, 6, -1),
                RelEdge(2, 4, -1),
                RelEdge(4, 5, -1),
                RelEdge(5, 6, -1),
            ]
        )
        entries = [RibEntry(prefix, (4, 5, 6)), RibEntry(prefix, (3, 6))]
        result = infer_paths(prefix, extract_sure_paths(entries, prefix), g)
        assert result.chosen[2].hops == (2, 3, 6)
        assert result.chosen[1].hops == (1, 2, 4, 5, 6)

    def test_unreachable_ases_stay_uncovered(self, prefix):
        g = build_graph([RelEdge(1, 2, -1), RelEdge(3, 4, -1)])
        entries = [RibEntry(prefix, (1, 2))]
        result = infer_paths(prefix, extract_sure_paths(entries, prefix), g)
        assert set(result.chosen) == {1, 2}

    def test_invalid_sure_paths_dropped_but_suffixes_live(self, prefix):
        # table row 1-2-3 descends then climbs (a valley) against this
        # graph, so it is dropped; its suffix 2-3 is valid and survives
        g = build_graph([RelEdge(1, 2, -1), RelEdge(3, 2, -1)])
        rows = [RibEntry(prefix, (1, 2, 3))]
        result = infer_paths(prefix, extract_sure_paths(rows, prefix), g)
        assert result.sure_dropped == 1
        assert 1 not in result.chosen  # no valid route from 1 at all
        assert result.chosen[2].hops == (2, 3)

    def test_oracle_equivalence_sample(self, prefix):
        rng = random.Random(4242)
        for _ in range(80):
            g, asns = random_labeled_graph(rng)
            entries = random_rib(rng, g, asns, prefix)
            if not entries:
                continue
            result = infer_paths(prefix, extract_sure_paths(entries, prefix), g)
            assert paths_of(result) == oracle_choices(g, entries, prefix)

    def test_suffix_property_of_inferred_paths(self, prefix):
        rng = random.Random(99)
        for _ in range(25):
            g, asns = random_labeled_graph(rng, max_ases=9, max_edges=18)
            entries = random_rib(rng, g, asns, prefix)
            sure = extract_sure_paths(entries, prefix)
            flat = {p.hops: p.frequency for ps in sure.values() for p in ps}
            result = infer_paths(prefix, sure, g)
            for path in result.chosen.values():
                suffix = path.hops[path.uncertainty :]
                assert suffix in flat
                assert flat[suffix] == path.frequency

    def test_monotone_coverage_in_table_rows(self, prefix):
        rng = random.Random(321)
        for _ in range(20):
            g, asns = random_labeled_graph(rng, max_ases=9, max_edges=18)
            entries = random_rib(rng, g, asns, prefix)
            if len(entries) < 2:
                continue
            fewer = entries[: len(entries) // 2]
            covered_fewer = set(
                infer_paths(prefix, extract_sure_paths(fewer, prefix), g).chosen
            )
            covered_all = set(
                infer_paths(prefix, extract_sure_paths(entries, prefix), g).chosen
            )
            assert covered_fewer <= covered_all


class TestCorpus:
    def test_build_corpus_accounting(self, demo_graph, prefix):
        other, _ = parse_prefix("10.0.1.0/24")
        entries = [RibEntry(prefix, (3, 6)), RibEntry(other, (2, 4))]
        corpus, results = build_corpus([prefix, other], entries, demo_graph)
        assert corpus.total_paths == sum(r.covered for r in results)
        assert len(results) == 2

    def test_zero_sure_prefix_recorded(self, demo_graph, prefix):
        other, _ = parse_prefix("10.9.9.0/24")
        corpus, results = build_corpus([other], [RibEntry(prefix, (3, 6))], demo_graph)
        assert results[0].sure_total == 0
        assert corpus.slices[other] == {}

    def test_corpus_validity(self, demo_graph, prefix):
        entries = [RibEntry(prefix, (3, 6))]
        corpus, _ = build_corpus([prefix], entries, demo_graph)
        assert corpus_violations(corpus, demo_graph) == []

    def test_roundtrip_fixpoint(self, demo_graph, prefix):
        entries = [RibEntry(prefix, (3, 6)), RibEntry(prefix, (7, 3, 6))]
        corpus, _ = build_corpus([prefix], entries, demo_graph)
        lines = corpus.to_lines()
        again, stats = PathCorpus.from_lines(lines)
        assert stats.rejected == 0
        assert again.to_lines() == lines
        assert again.slices == corpus.slices

    def test_determinism_bit_identical(self, prefix):
        rng_a, rng_b = random.Random(5), random.Random(5)
        g_a, asns_a = random_labeled_graph(rng_a)
        g_b, asns_b = random_labeled_graph(rng_b)
        rib_a = random_rib(rng_a, g_a, asns_a, prefix)
        rib_b = random_rib(rng_b, g_b, asns_b, prefix)
        corpus_a, _ = build_corpus([prefix], rib_a, g_a)
        corpus_b, _ = build_corpus([prefix], rib_b, g_b)
        assert corpus_a.to_lines() == corpus_b.to_lines()

    def test_from_lines_rejects_malformed(self):
        corpus, stats = PathCorpus.from_lines(
            [
                "10.0.0.0/24|7|7 3 1|0|1",
                "10.0.0.0/24|9|7 3 1|0|1",  # origin mismatch
                "10.0.0.0/24|7|7 3 1|3|1",  # uncertainty out of range
                "not a line",
            ]
        )
        assert corpus.total_paths == 1
        assert stats.rejected == 3
