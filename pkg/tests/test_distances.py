import math

import numpy as np
import pytest

from lumpkit.descriptors import Descriptor
from lumpkit.distances import (
    METRIC_GIST,
    METRIC_HIST,
    distance_matrix,
    euclidean_distance,
    histogram_correlation,
    histogram_distance,
    load_descriptors,
    pair_set_from_matrix,
    pairwise_distances,
    save_descriptors,
)
from lumpkit.errors import DegenerateHistogramError, ValidationError


def hist(values):
    return Descriptor(f"rgb-hist-{len(values)}", values)


def gist(values):
    return Descriptor(f"gist-{len(values)}", values)


class TestHistogramCorrelation:
    def test_self_correlation_is_exactly_one(self):
        h = hist([3.0, 1.0, 4.0, 1.0])
        assert histogram_correlation(h, h) == 1.0

    def test_hand_case_antisymmetric(self):
        # means 2,2; numerator -2; denominator 2
        assert histogram_correlation(hist([3, 1]), hist([1, 3])) == -1.0

    def test_constant_histogram_degenerate(self):
        with pytest.raises(DegenerateHistogramError):
            histogram_correlation(hist([2, 1, 0, 1]), hist([5, 5, 5, 5]))

    def test_symmetry_and_affine_invariance(self):
        # Pearson property: c(a*h1+b, h2) == c(h1, h2) for a > 0
        rng = np.random.default_rng(7)
        for _ in range(50):
            h1 = rng.integers(0, 50, size=32).astype(float)
            h2 = rng.integers(0, 50, size=32).astype(float)
            h1[0] += 1  # guarantee variance
            h2[1] += 1
            c = histogram_correlation(hist(h1), hist(h2))
            assert histogram_correlation(hist(h2), hist(h1)) == pytest.approx(c, abs=1e-14)
            a, b = rng.uniform(0.1, 5.0), rng.uniform(-3.0, 3.0)
            c2 = histogram_correlation(hist(a * h1 + b), hist(h2))
            assert c2 == pytest.approx(c, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            histogram_correlation(hist([1, 2]), hist([1, 2, 3]))


class TestHistogramDistance:
    def test_identical_is_zero(self):
        h = hist([5, 1, 2, 9])
        assert histogram_distance(h, h) == 0.0

    def test_anticorrelated_is_two(self):
        assert histogram_distance(hist([3, 1]), hist([1, 3])) == 2.0

    def test_self_distance_and_symmetry_property(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            h1 = hist(rng.integers(0, 20, size=16).astype(float) + rng.random(16))
            h2 = hist(rng.integers(0, 20, size=16).astype(float) + rng.random(16))
            assert histogram_distance(h1, h1) == 0.0
            assert histogram_distance(h1, h2) == histogram_distance(h2, h1)
            assert 0.0 <= histogram_distance(h1, h2) <= 2.0


class TestEuclideanDistance:
    def test_three_four_five(self):
        assert euclidean_distance(gist([0, 0]), gist([3, 4])) == 5.0

    def test_self_distance_zero(self):
        d = gist([1.0, 2.0, 3.0])
        assert euclidean_distance(d, d) == 0.0

    def test_kind_mismatch(self):
        with pytest.raises(ValidationError, match="kind mismatch"):
            euclidean_distance(gist([1, 2]), hist([1, 2]))

    def test_matches_naive_loop_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            a = rng.standard_normal(512)
            b = rng.standard_normal(512)
            naive = math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))
            assert euclidean_distance(gist(a), gist(b)) == pytest.approx(naive, abs=1e-9)


class TestPairwiseDistances:
    def test_three_descriptors_three_entries(self):
        ds = {f"i{k}": gist([float(k), 0.0]) for k in range(3)}
        ps = pairwise_distances(ds, METRIC_GIST)
        assert ps.n_pairs == 3

    def test_identical_pair_distance_zero(self):
        ds = {"a": gist([1.0, 2.0]), "b": gist([1.0, 2.0])}
        ps = pairwise_distances(ds, METRIC_GIST)
        assert ps.n_pairs == 1
        assert abs(ps.distances[0]) < 1e-12

    def test_order_independent_of_input_iteration(self):
        rng = np.random.default_rng(10)
        ds = {f"im{k:02d}": gist(rng.standard_normal(8)) for k in range(6)}
        shuffled = dict(reversed(list(ds.items())))
        a = pairwise_distances(ds, METRIC_GIST)
        b = pairwise_distances(shuffled, METRIC_GIST)
        assert a.image_ids == b.image_ids
        assert np.array_equal(a.distances, b.distances)
        assert list(a.entries())[0][:2] == (a.image_ids[0], a.image_ids[1])

    def test_matrix_path_matches_scalar_oracle_hist(self):
        rng = np.random.default_rng(11)
        ds = {f"h{k}": hist(rng.integers(0, 30, 64).astype(float) + rng.random(64)) for k in range(8)}
        ps = pairwise_distances(ds, METRIC_HIST)
        for i, j, d in ps.entries():
            assert d == pytest.approx(histogram_distance(ds[i], ds[j]), abs=1e-12)

    def test_matrix_path_matches_scalar_oracle_gist(self):
        rng = np.random.default_rng(12)
        ds = {f"g{k}": gist(rng.standard_normal(64)) for k in range(8)}
        ps = pairwise_distances(ds, METRIC_GIST)
        for i, j, d in ps.entries():
            assert d == pytest.approx(euclidean_distance(ds[i], ds[j]), abs=1e-9)

    def test_degenerate_histogram_names_image(self):
        ds = {"ok": hist([1.0, 2.0]), "flat": hist([3.0, 3.0])}
        with pytest.raises(DegenerateHistogramError, match="flat"):
            pairwise_distances(ds, METRIC_HIST)

    def test_metric_kind_pairing_enforced(self):
        ds = {"a": gist([1.0, 2.0]), "b": gist([0.0, 1.0])}
        with pytest.raises(ValidationError):
            pairwise_distances(ds, METRIC_HIST)

    def test_needs_two(self):
        with pytest.raises(ValidationError):
            pairwise_distances({"a": gist([1.0])}, METRIC_GIST)

    def test_distance_matrix_roundtrip(self):
        rng = np.random.default_rng(13)
        ds = {f"g{k}": gist(rng.standard_normal(8)) for k in range(5)}
        ps = pairwise_distances(ds, METRIC_GIST)
        mat = distance_matrix(ps)
        again = pair_set_from_matrix(ps.image_ids, mat, ps.metric)
        assert np.array_equal(again.distances, ps.distances)


def test_descriptor_cache_roundtrip(tmp_path):
    rng = np.random.default_rng(14)
    ds = {f"g{k}": gist(rng.standard_normal(16)) for k in range(4)}
    save_descriptors(tmp_path / "cache", ds)
    loaded = load_descriptors(tmp_path / "cache")
    assert set(loaded) == set(ds)
    for key in ds:
        assert loaded[key].kind == ds[key].kind
        assert np.array_equal(loaded[key].values, ds[key].values)
