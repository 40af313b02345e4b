import json
from collections import Counter

import numpy as np
import pytest

from lumpkit.errors import EmptyCategoryError
from lumpkit.freqstats import (
    SCOPE_ACROSS_CORPUS,
    SCOPE_WITHIN_EVENT,
    aggregate_rank_frequencies,
    distinct_instances_per_event,
    instance_count_proportions,
    instance_ranks,
    null_rank_frequencies,
    rank_frequencies,
    rank_occurrence_sample,
)
from lumpkit.ingest import parse_manifest


def manifest(rows):
    """rows: (image_id, subject, event, count, instance_id) all for category 'cup'."""
    lines = []
    for image_id, subject, event, count, instance in rows:
        lines.append(
            json.dumps(
                {
                    "image_id": image_id,
                    "path": "x.png",
                    "subject": subject,
                    "event": event,
                    "annotations": [
                        {"category": "cup", "count": count, "instance_id": instance}
                    ],
                }
            )
        )
    return parse_manifest("\n".join(lines))


class TestInstanceCountProportions:
    def test_simple_counting(self):
        corpus = manifest(
            [("a", "s", "e", 1, "A"), ("b", "s", "e", 1, "A"), ("c", "s", "e", 2, "A")]
        )
        props = instance_count_proportions(corpus, "cup")
        assert props == {1: pytest.approx(2 / 3), 2: pytest.approx(1 / 3)}

    def test_four_plus_grouped(self):
        corpus = manifest(
            [("a", "s", "e", 4, None), ("b", "s", "e", 5, None), ("c", "s", "e", 7, None)]
        )
        assert instance_count_proportions(corpus, "cup") == {4: 1.0}

    def test_empty_category_error(self):
        corpus = manifest([("a", "s", "e", 0, None)])
        with pytest.raises(EmptyCategoryError):
            instance_count_proportions(corpus, "cup")


class TestRankFrequencies:
    def test_single_event_counting(self):
        rows = [(f"i{k}", "s", "e", 1, inst) for k, inst in enumerate("AAAB")]
        table = rank_frequencies(manifest(rows), "cup", SCOPE_WITHIN_EVENT)
        assert table.proportion("cup", 1) == 0.75
        assert table.proportion("cup", 2) == 0.25

    def test_proportions_sum_to_one_and_counts_non_increasing(self):
        rng = np.random.default_rng(5)
        rows = []
        for k in range(200):
            subject = f"s{rng.integers(3)}"
            event = f"e{rng.integers(4)}"
            inst = "ABCD"[rng.integers(4)]
            rows.append((f"i{k}", subject, event, 1, inst))
        for scope in (SCOPE_WITHIN_EVENT, SCOPE_ACROSS_CORPUS):
            table = rank_frequencies(manifest(rows), "cup", scope)
            props = [r.proportion for r in table.rows]
            counts = [r.count for r in table.rows]
            assert sum(props) == pytest.approx(1.0, abs=1e-9)
            assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_scopes_differ(self):
        # event-level rank 1 instances differ from the corpus-level rank 1
        rows = (
            [(f"a{k}", "s", "e1", 1, "A") for k in range(3)]
            + [(f"b{k}", "s", "e1", 1, "B") for k in range(1)]
            + [(f"c{k}", "s", "e2", 1, "B") for k in range(2)]
        )
        within = rank_frequencies(manifest(rows), "cup", SCOPE_WITHIN_EVENT)
        across = rank_frequencies(manifest(rows), "cup", SCOPE_ACROSS_CORPUS)
        assert within.proportion("cup", 1) == pytest.approx(5 / 6)
        assert across.proportion("cup", 1) == pytest.approx(0.5)

    def test_ties_break_lexicographically(self):
        rows = [("a", "s", "e", 1, "B"), ("b", "s", "e", 1, "A")]
        ranks = instance_ranks(manifest(rows), "cup", SCOPE_ACROSS_CORPUS)
        assert ranks["s"] == {"A": 1, "B": 2}


class TestDistinctInstances:
    def test_two_events(self):
        rows = [("a", "s", "e1", 1, "A"), ("b", "s", "e2", 1, "A"), ("c", "s", "e2", 1, "B")]
        assert distinct_instances_per_event(manifest(rows), "cup") == {1: 0.5, 2: 0.5}

    def test_events_without_ids_excluded(self):
        rows = [("a", "s", "e1", 4, None), ("b", "s", "e2", 1, "A")]
        assert distinct_instances_per_event(manifest(rows), "cup") == {1: 1.0}

    def test_single_event_single_id(self):
        assert distinct_instances_per_event(manifest([("a", "s", "e", 1, "A")]), "cup") == {1: 1.0}


class TestNullRankFrequencies:
    def test_single_available_id_forces_rank_one(self):
        rows = [(f"i{k}", "s", "e", 1, "A") for k in range(7)]
        table = null_rank_frequencies(manifest(rows), seeds=range(5))
        assert table.proportion("(all)", 1) == 1.0

    def test_two_ids_large_draws_approach_multinomial_oracle(self):
        rows = [("a", "s", "e", 1, "A"), ("b", "s", "e", 1, "B")]
        corpus = manifest(rows)
        n = 10_000
        table = null_rank_frequencies(corpus, seeds=range(30), draws=n)
        # direct multinomial simulation oracle
        rng = np.random.default_rng(123)
        sims = []
        for _ in range(30):
            counts = Counter(rng.integers(0, 2, size=n).tolist())
            sims.append(max(counts.values()) / n)
        oracle = float(np.mean(sims))
        got = table.proportion("(all)", 1)
        assert got == pytest.approx(oracle, abs=3e-3)
        assert got == pytest.approx(0.5, abs=0.02)

    def test_seed_set_deduplicated(self):
        rows = [(f"i{k}", "s", "e", 1, "AB"[k % 2]) for k in range(12)]
        corpus = manifest(rows)
        once = null_rank_frequencies(corpus, seeds=[3])
        doubled = null_rank_frequencies(corpus, seeds=[3, 3])
        assert [(r.rank, r.proportion) for r in once.rows] == [
            (r.rank, r.proportion) for r in doubled.rows
        ]


def test_aggregate_and_occurrence_sample():
    rows = [(f"i{k}", "s", "e", 1, "AAAB"[k % 4]) for k in range(8)]
    table = aggregate_rank_frequencies(manifest(rows), SCOPE_ACROSS_CORPUS)
    sample = rank_occurrence_sample(table)
    assert sample.shape[0] == 8
    assert Counter(sample.tolist()) == {1.0: 6, 2.0: 2}
