import math

import numpy as np
import pytest

from lumpkit.errors import EmptySampleError, ValidationError
from lumpkit.sampler import (
    CORNER_ANCHORS,
    PLANAR_ANCHORS,
    infantlike_plan,
    realize_plan,
    uniform_plan,
    view_plan,
)

CATS6 = tuple(f"cat{i}" for i in range(6))


def circular_diff(a, b):
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


class TestUniformPlan:
    def test_reference_counts(self):
        plan = uniform_plan(CATS6, 6, 3600)
        for cplan in plan.per_category.values():
            assert set(cplan.counts.values()) == {100}
            assert cplan.total == 600

    def test_single_instance_full_share(self):
        plan = uniform_plan(["c"], 1, 50)
        assert plan.per_category["c"].counts == {"A": 50}

    def test_remainder_rule(self):
        plan = uniform_plan(["c"], 5, 601)
        counts = plan.per_category["c"].counts
        assert [counts[i] for i in "ABCDE"] == [121, 120, 120, 120, 120]

    def test_indivisible_total_rejected(self):
        with pytest.raises(ValidationError, match="not divisible"):
            uniform_plan(CATS6, 6, 3601)

    def test_per_category_sums_equal(self):
        plan = uniform_plan(CATS6, 4, 3600)
        sums = {c.total for c in plan.per_category.values()}
        assert sums == {600}


class TestInfantlikePlan:
    def test_reference_counts_210_78(self):
        plan = infantlike_plan(CATS6, 6, 3600, rank1_share=0.35, seed=0)
        for cplan in plan.per_category.values():
            assert cplan.counts[cplan.rank1] == 210
            others = [cplan.counts[i] for i in cplan.instances if i != cplan.rank1]
            assert others == [78] * 5
            assert cplan.total == 600

    def test_uniform_share_rejected(self):
        with pytest.raises(ValidationError, match="uniform share"):
            infantlike_plan(CATS6, 6, 3600, rank1_share=1 / 6)

    def test_rank1_swap_preserves_count_multiset(self):
        a = infantlike_plan(CATS6, 6, 3600, rank1_ids={c: "A" for c in CATS6})
        b = infantlike_plan(CATS6, 6, 3600, rank1_ids={c: "D" for c in CATS6})
        for cat in CATS6:
            assert sorted(a.per_category[cat].counts.values()) == sorted(
                b.per_category[cat].counts.values()
            )
        assert b.per_category[CATS6[0]].rank1 == "D"

    def test_plan_entropy_below_uniform(self):
        # majorization: the skewed count distribution has strictly lower entropy
        uni = uniform_plan(CATS6, 6, 3600).per_category[CATS6[0]].counts
        inf = infantlike_plan(CATS6, 6, 3600).per_category[CATS6[0]].counts

        def entropy(counts):
            total = sum(counts.values())
            return -sum((c / total) * math.log2(c / total) for c in counts.values())

        assert entropy(inf) < entropy(uni)

    def test_random_rank1_is_seeded(self):
        a = infantlike_plan(CATS6, 6, 3600, seed=1)
        b = infantlike_plan(CATS6, 6, 3600, seed=1)
        c = infantlike_plan(CATS6, 6, 3600, seed=2)
        assert [p.rank1 for p in a.per_category.values()] == [
            p.rank1 for p in b.per_category.values()
        ]
        assert [p.rank1 for p in a.per_category.values()] != [
            p.rank1 for p in c.per_category.values()
        ]


class TestViewPlan:
    def test_random_deterministic(self):
        a = view_plan("random", 20, seed=3)
        b = view_plan("random", 20, seed=3)
        assert np.array_equal(a.orientations, b.orientations)
        assert a.orientations.shape == (20, 3)
        assert a.orientations.min() >= -180.0 and a.orientations.max() <= 180.0

    def test_biased_within_15_degrees_of_anchors(self):
        plan = view_plan("biased", 6, seed=0)
        assert plan.n_views == 6
        for row, anchor in zip(plan.orientations, PLANAR_ANCHORS):
            assert all(circular_diff(v, a) <= 15.0 + 1e-9 for v, a in zip(row, anchor))

    def test_anti_biased_anchors_far_from_planar(self):
        # per-axis (L-inf, circular) distance of every corner anchor to every
        # planar anchor is at least 30 degrees
        for corner in CORNER_ANCHORS:
            for planar in PLANAR_ANCHORS:
                linf = max(circular_diff(c, p) for c, p in zip(corner, planar))
                assert linf >= 30.0

    def test_views_split_across_anchors(self):
        plan = view_plan("anti-biased", 20, seed=1)
        assert plan.n_views == 20  # 6 anchors: 4,4,3,3,3,3
        assert plan.shared_across_instances

    def test_unknown_kind(self):
        with pytest.raises(ValidationError, match="unknown view kind"):
            view_plan("spiral", 10)


class TestRealizePlan:
    def pool(self, sizes):
        return {
            key: [f"{key[0]}-{key[1]}-{k}" for k in range(n)] for key, n in sizes.items()
        }

    def test_counts_respected(self):
        plan = uniform_plan(["c"], 2, 3, instance_ids=["A", "B"])
        # remainder rule gives A:2, B:1
        pool = self.pool({("c", "A"): 3, ("c", "B"): 5})
        sampled = realize_plan(plan, pool, seed=0)
        assert sampled.total == 3
        assert len(sampled.images[("c", "A")]) == 2
        assert len(sampled.images[("c", "B")]) == 1

    def test_no_duplicates_within_instance(self):
        plan = uniform_plan(["c"], 2, 8, instance_ids=["A", "B"])
        pool = self.pool({("c", "A"): 10, ("c", "B"): 10})
        sampled = realize_plan(plan, pool, seed=1)
        for ids in sampled.images.values():
            assert len(set(ids)) == len(ids)

    def test_held_out_guard(self):
        plan = uniform_plan(["c"], 2, 2, instance_ids=["A", "B"])
        pool = self.pool({("c", "A"): 2, ("c", "B"): 2})
        with pytest.raises(ValidationError, match="held out"):
            realize_plan(plan, pool, held_out=frozenset({("c", "B")}))

    def test_pool_underflow_names_instance(self):
        plan = uniform_plan(["c"], 2, 8, instance_ids=["A", "B"])
        pool = self.pool({("c", "A"): 10, ("c", "B"): 2})
        with pytest.raises(EmptySampleError, match="'B'|, B"):
            realize_plan(plan, pool, seed=0)

    def test_deterministic(self):
        plan = infantlike_plan(["c"], 3, 9, rank1_share=0.5, seed=0)
        pool = self.pool({("c", i): 12 for i in "ABC"})
        a = realize_plan(plan, pool, seed=5)
        b = realize_plan(plan, pool, seed=5)
        c = realize_plan(plan, pool, seed=6)
        assert a.images == b.images
        assert a.images != c.images
