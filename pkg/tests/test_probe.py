import numpy as np
import pytest

from lumpkit.errors import ValidationError
from lumpkit.probe import LinearProbe, compare_conditions, evaluate, train_probe


def separable_blobs(n_per_class, classes=2, dim=8, spread=0.05, seed=0):
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((classes, dim)) * 3.0
    xs, ys = [], []
    for c in range(classes):
        xs.append(centers[c] + spread * rng.standard_normal((n_per_class, dim)))
        ys.extend([f"class{c}"] * n_per_class)
    return np.vstack(xs), np.asarray(ys)


class TestLinearProbe:
    def test_untrained_zero_weights_predict_first_class(self):
        x, y = separable_blobs(100, classes=6, seed=1)
        model = LinearProbe(epochs=0).fit(x, y)
        assert np.all(model.weights_ == 0.0)
        preds = model.predict(x)
        assert set(preds) == {"class0"}
        # balanced 6-class test: accuracy exactly 1/6
        assert model.score(x, y) == 1 / 6

    def test_separable_data_reaches_full_training_accuracy(self):
        x, y = separable_blobs(60, classes=2, seed=2)
        model = train_probe(x, y, seed=0)
        assert model.score(x, y) == 1.0

    def test_same_seed_identical_weights(self):
        x, y = separable_blobs(40, classes=3, seed=3)
        a = train_probe(x, y, seed=5)
        b = train_probe(x, y, seed=5)
        assert np.array_equal(a.weights_, b.weights_)
        c = train_probe(x, y, seed=6)
        assert not np.array_equal(a.weights_, c.weights_)

    def test_evaluate_invariant_to_test_order(self):
        x, y = separable_blobs(30, classes=3, seed=4)
        model = train_probe(x, y, seed=0)
        perm = np.random.default_rng(0).permutation(len(y))
        assert evaluate(model, x, y) == evaluate(model, x[perm], y[perm])

    def test_label_permutation_averages_inverse_k(self):
        # any fixed prediction rule scores 1/k on average over label permutations
        rng = np.random.default_rng(5)
        k = 4
        x, y = separable_blobs(25, classes=k, seed=6)
        model = train_probe(x, y, seed=0)
        preds = model.predict(x)
        classes = np.unique(y)
        accs = []
        for _ in range(100):
            mapping = dict(zip(classes, rng.permutation(classes)))
            permuted = np.asarray([mapping[v] for v in y])
            accs.append(float(np.mean(preds == permuted)))
        assert np.mean(accs) == pytest.approx(1 / k, abs=0.05)

    def test_full_batch_loss_monotone_on_separable_set(self):
        x, y = separable_blobs(50, classes=2, seed=7)
        model = LinearProbe(batch_size=100, epochs=30, momentum=0.0, lr=0.05,
                            weight_decay=0.0).fit(x, y)
        losses = model.loss_history_
        assert all(a >= b - 1e-12 for a, b in zip(losses, losses[1:]))

    def test_dimension_mismatch_rejected(self):
        x, y = separable_blobs(20, classes=2, seed=8)
        model = train_probe(x, y, seed=0)
        with pytest.raises(ValidationError, match="descriptor length"):
            model.predict(np.zeros((4, 5)))

    def test_get_params_exposes_hyperparameters(self):
        params = LinearProbe(lr=0.01, epochs=12).get_params()
        assert params["lr"] == 0.01 and params["epochs"] == 12


class TestCompareConditions:
    def make_conditions(self, delta, seed=0):
        rng = np.random.default_rng(seed)
        k, dim = 3, 6
        centers = rng.standard_normal((k, dim)) * 2.0
        def dataset(n, spread):
            xs, ys = [], []
            for c in range(k):
                xs.append(centers[c] + spread * rng.standard_normal((n, dim)))
                ys.extend([f"c{c}"] * n)
            return np.vstack(xs), np.asarray(ys)
        train_a = {"random": dataset(40, 0.8), "biased": dataset(40, 0.8)}
        train_b = {"random": dataset(40, 0.8 + delta), "biased": dataset(40, 0.8 + delta)}
        test = dataset(50, 0.8)
        return train_a, train_b, test

    def test_self_comparison_is_null(self):
        train_a, _, test = self.make_conditions(0.0)
        result = compare_conditions(train_a, train_a, test, runs=4, seed=0, hyper={"epochs": 8})
        for kind, stats in result.per_kind.items():
            assert stats["mean_a"] == stats["mean_b"]
            assert all(s == 0 for s in result.sign_table[kind])

    def test_reports_full_statistics(self):
        train_a, train_b, test = self.make_conditions(1.5, seed=1)
        result = compare_conditions(
            train_a, train_b, test, runs=4, seed=0, labels=("tight", "loose"),
            hyper={"epochs": 8},
        )
        assert set(result.per_kind) == {"random", "biased"}
        for stats in result.per_kind.values():
            assert {"mean_a", "mean_b", "se_a", "se_b", "welch_p", "welch_t"} <= set(stats)
        assert set(result.holm_adjusted) == {"random", "biased"}
        assert result.fixed_effects is not None
        names = {c["name"] for c in result.fixed_effects["coefficients"]}
        assert "distribution[tight]" in names
        assert "unit[random]" in names
        assert "stand-in" in result.banner

    def test_mismatched_kind_keys_rejected(self):
        train_a, train_b, test = self.make_conditions(0.5)
        del train_b["biased"]
        with pytest.raises(ValidationError):
            compare_conditions(train_a, train_b, test, runs=2)
