import json
import math

import numpy as np
import pytest

from lumpkit.distances import METRIC_GIST, pairwise_distances
from lumpkit.descriptors import Descriptor
from lumpkit.errors import DegenerateStatisticError, EmptySampleError, ValidationError
from lumpkit.freqstats import SCOPE_ACROSS_CORPUS, instance_ranks
from lumpkit.ingest import parse_manifest
from lumpkit.simstruct import (
    CAT_BETWEEN,
    CAT_WITHIN,
    EntropySpec,
    binned_entropy,
    null_similarity_sample,
    similarity_ratio,
    similarity_ratio_from_values,
    tag_pairs,
)


def record(image_id, annotations, subject="s", event="e"):
    return json.dumps(
        {
            "image_id": image_id,
            "path": "x.png",
            "subject": subject,
            "event": event,
            "annotations": annotations,
        }
    )


def ann(category, count=1, instance=None):
    return {"category": category, "count": count, "instance_id": instance}


class TestTagPairs:
    def corpus_and_pairs(self):
        # two cup images of instance A (rank 1), one of instance B, one table image
        text = "\n".join(
            [
                record("cupA1", [ann("cup", instance="A")]),
                record("cupA2", [ann("cup", instance="A")]),
                record("cupB1", [ann("cup", instance="B")]),
                record("tab1", [ann("table", instance="T")]),
            ]
        )
        corpus = parse_manifest(text)
        descriptors = {
            "cupA1": Descriptor("gist-2", [0.0, 0.0]),
            "cupA2": Descriptor("gist-2", [0.1, 0.0]),
            "cupB1": Descriptor("gist-2", [0.5, 0.0]),
            "tab1": Descriptor("gist-2", [0.9, 0.0]),
        }
        return corpus, pairwise_distances(descriptors, METRIC_GIST)

    def test_rank_and_category_tags(self):
        corpus, pairs = self.corpus_and_pairs()
        cup_only = pairs.subset(
            np.array([("tab1" not in (i, j)) for i, j, _ in pairs.entries()])
        )
        ranks = instance_ranks(corpus, "cup", SCOPE_ACROSS_CORPUS)
        tagged = tag_pairs(cup_only, corpus, category="cup", ranks=ranks)
        by_pair = {(t.i, t.j): t for t in tagged}
        assert by_pair[("cupA1", "cupA2")].rank_tag == "R1R1"
        assert by_pair[("cupA1", "cupB1")].rank_tag == "R1O"
        assert by_pair[("cupA1", "cupA2")].cat_tag == CAT_WITHIN

    def test_between_category_tag(self):
        corpus, pairs = self.corpus_and_pairs()
        tagged = tag_pairs(pairs, corpus)
        by_pair = {(t.i, t.j): t for t in tagged}
        assert by_pair[("cupA1", "tab1")].cat_tag == CAT_BETWEEN
        assert by_pair[("cupA2", "cupB1")].cat_tag == CAT_WITHIN

    def test_rank_tag_partition_covers_within_pairs(self):
        corpus, pairs = self.corpus_and_pairs()
        cup_only = pairs.subset(
            np.array([("tab1" not in (i, j)) for i, j, _ in pairs.entries()])
        )
        ranks = instance_ranks(corpus, "cup", SCOPE_ACROSS_CORPUS)
        tagged = tag_pairs(cup_only, corpus, category="cup", ranks=ranks)
        n_tagged = sum(
            tagged.distances_for_rank_tag(t).shape[0] for t in ("R1R1", "R1O", "OO")
        )
        assert n_tagged == cup_only.n_pairs

    def test_missing_instance_id_rejected(self):
        text = "\n".join(
            [record("a", [ann("cup", count=4)]), record("b", [ann("cup", instance="A")])]
        )
        corpus = parse_manifest(text)
        descriptors = {
            "a": Descriptor("gist-2", [0.0, 1.0]),
            "b": Descriptor("gist-2", [1.0, 0.0]),
        }
        pairs = pairwise_distances(descriptors, METRIC_GIST)
        ranks = instance_ranks(corpus, "cup", SCOPE_ACROSS_CORPUS)
        with pytest.raises(ValidationError, match="lacks an identified"):
            tag_pairs(pairs, corpus, category="cup", ranks=ranks)


class TestSimilarityRatio:
    def test_arithmetic(self):
        assert similarity_ratio_from_values([0.2, 0.2], [0.4, 0.4]) == pytest.approx(0.5)

    def test_identical_distributions_give_one(self):
        vals = [0.1, 0.2, 0.3]
        assert similarity_ratio_from_values(vals, vals) == pytest.approx(1.0)

    def test_zero_between_raises(self):
        with pytest.raises(DegenerateStatisticError):
            similarity_ratio_from_values([0.1], [0.0, 0.0])

    def test_median_statistic(self):
        assert similarity_ratio_from_values([1, 1, 5], [2, 2, 2], "median") == pytest.approx(0.5)


class TestBinnedEntropy:
    def test_single_bin_zero(self):
        assert binned_entropy([0.5, 0.5001, 0.5002], EntropySpec()) == 0.0

    def test_uniform_over_k_bins_is_log2_k(self):
        spec = EntropySpec(lo=0.0, hi=1.0, bins=8)
        values = [0.0625 + k / 8 for k in range(8)]
        assert binned_entropy(values, spec) == pytest.approx(3.0)

    def test_bounded_by_log2_bins_and_permutation_invariant(self):
        rng = np.random.default_rng(3)
        spec = EntropySpec(lo=0.0, hi=1.0, bins=16)
        values = rng.random(500)
        h = binned_entropy(values, spec)
        assert h <= math.log2(16) + 1e-12
        assert binned_entropy(values[::-1].copy(), spec) == h

    def test_value_at_hi_goes_to_last_bin(self):
        spec = EntropySpec(lo=0.0, hi=1.04, bins=100)
        assert binned_entropy([1.04], spec) == 0.0

    def test_out_of_range_raises(self):
        with pytest.raises(ValidationError, match="outside entropy range"):
            binned_entropy([1.05], EntropySpec())

    def test_natural_log_base(self):
        spec = EntropySpec(lo=0.0, hi=1.0, bins=4, log_base=math.e)
        values = [0.1, 0.4, 0.6, 0.9]
        assert binned_entropy(values, spec) == pytest.approx(math.log(4))


class TestNullSimilaritySample:
    def make_corpus(self, instance_sizes, subject="s"):
        rows = []
        k = 0
        for inst, size in instance_sizes.items():
            for _ in range(size):
                rows.append(record(f"{subject}-{inst}{k}", [ann("cup", instance=inst)], subject))
                k += 1
        return parse_manifest("\n".join(rows))

    def test_min_rule_equalizes_instances(self):
        corpus = self.make_corpus({"A": 5, "B": 7, "C": 9})
        sample = null_similarity_sample(corpus, "cup")
        per_inst = {}
        for rec in sample:
            inst = rec.annotation_for("cup").instance_id
            per_inst[inst] = per_inst.get(inst, 0) + 1
        assert per_inst == {"A": 5, "B": 5, "C": 5}

    def test_small_instances_excluded(self):
        corpus = self.make_corpus({"A": 6, "B": 4, "C": 6})
        sample = null_similarity_sample(corpus, "cup")
        insts = {rec.annotation_for("cup").instance_id for rec in sample}
        assert insts == {"A", "C"}

    def test_subject_equalization(self):
        rows = []
        for subject, sizes in (("s1", {"A": 6, "B": 6}), ("s2", {"C": 9, "D": 9})):
            for inst, size in sizes.items():
                for k in range(size):
                    rows.append(record(f"{subject}-{inst}{k}", [ann("cup", instance=inst)], subject))
        corpus = parse_manifest("\n".join(rows))
        sample = null_similarity_sample(corpus, "cup")
        per_subject = {}
        for rec in sample:
            per_subject[rec.subject] = per_subject.get(rec.subject, 0) + 1
        # s1 contributes 12, s2 18 before equalization; both sampled down to 12
        assert per_subject == {"s1": 12, "s2": 12}

    def test_deterministic_given_seed(self):
        corpus = self.make_corpus({"A": 8, "B": 11})
        ids1 = [r.image_id for r in null_similarity_sample(corpus, "cup", seed=5)]
        ids2 = [r.image_id for r in null_similarity_sample(corpus, "cup", seed=5)]
        ids3 = [r.image_id for r in null_similarity_sample(corpus, "cup", seed=6)]
        assert ids1 == ids2
        assert ids1 != ids3

    def test_nothing_qualifies(self):
        corpus = self.make_corpus({"A": 4})
        with pytest.raises(EmptySampleError):
            null_similarity_sample(corpus, "cup")


def test_similarity_ratio_on_tagged_pairs():
    text = "\n".join(
        [
            record("c1", [ann("cup", instance="A")]),
            record("c2", [ann("cup", instance="A")]),
            record("t1", [ann("table", instance="T")]),
            record("t2", [ann("table", instance="T")]),
        ]
    )
    corpus = parse_manifest(text)
    descriptors = {
        "c1": Descriptor("gist-2", [0.0, 0.0]),
        "c2": Descriptor("gist-2", [0.2, 0.0]),
        "t1": Descriptor("gist-2", [1.0, 0.0]),
        "t2": Descriptor("gist-2", [1.2, 0.0]),
    }
    tagged = tag_pairs(pairwise_distances(descriptors, METRIC_GIST), corpus)
    # within: c1-c2 (0.2), t1-t2 (0.2); between: 4 pairs (1.0, 1.2, 0.8, 1.0)
    assert similarity_ratio(tagged) == pytest.approx(0.2 / 1.0)
