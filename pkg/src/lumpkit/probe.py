"""Desk-scale learner: a multinomial linear probe over descriptors.

This is a STAND-IN for GPU-scale CNN training: it exists so the
condition-comparison machinery (paired seeded runs, Welch + Holm statistics,
fixed-effects models, sign tables) runs end to end. Its accuracy numbers are
reported for context only and are never claimed to match any CNN result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from lumpkit._rng import child_seed, substream
from lumpkit.errors import DegenerateStatisticError, DivergenceError, ValidationError
from lumpkit.stats import holm_adjust, ols_fixed_effects, welch_t

STAND_IN_BANNER = (
    "linear-probe stand-in learner: accuracies exercise the comparison harness "
    "and are not comparable to CNN results"
)


class LinearProbe(BaseEstimator, ClassifierMixin):
    """Softmax linear classifier trained by momentum SGD with a one-step LR drop.

    Deterministic given `seed`: zero-initialized weights and seeded shuffle
    streams. Classes are ordered lexicographically; argmax ties resolve to the
    lowest class index.
    """

    def __init__(
        self,
        lr: float = 1e-3,
        momentum: float = 0.9,
        weight_decay: float = 1e-3,
        batch_size: int = 100,
        epochs: int = 50,
        lr_drop_epoch: int = 30,
        lr_drop_factor: float = 0.1,
        standardize: bool = True,
        seed: int = 0,
    ):
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.epochs = epochs
        self.lr_drop_epoch = lr_drop_epoch
        self.lr_drop_factor = lr_drop_factor
        self.standardize = standardize
        self.seed = seed

    def _prepare(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.standardize:
            return (X - self.mean_) / self.scale_
        return X

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValidationError("X must be (n, d) with one label per row")
        classes = np.unique(y)
        if classes.shape[0] < 2:
            raise ValidationError("need at least 2 classes")
        self.classes_ = classes
        label_index = {c: i for i, c in enumerate(classes)}
        targets = np.asarray([label_index[v] for v in y], dtype=np.int64)

        if self.standardize:
            self.mean_ = X.mean(axis=0)
            self.scale_ = np.maximum(X.std(axis=0), 1e-8)
        else:
            self.mean_ = np.zeros(X.shape[1])
            self.scale_ = np.ones(X.shape[1])
        Xs = self._prepare(X)

        n, d = Xs.shape
        k = classes.shape[0]
        w = np.zeros((k, d))
        b = np.zeros(k)
        vw = np.zeros_like(w)
        vb = np.zeros_like(b)
        onehot = np.eye(k)[targets]
        rng = substream(self.seed, "probe-shuffle")
        losses = []
        for epoch in range(self.epochs):
            lr = self.lr * (self.lr_drop_factor if epoch >= self.lr_drop_epoch else 1.0)
            order = rng.permutation(n)
            epoch_loss = 0.0
            n_batches = 0
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                xb = Xs[idx]
                tb = onehot[idx]
                logits = xb @ w.T + b
                logits -= logits.max(axis=1, keepdims=True)
                expl = np.exp(logits)
                probs = expl / expl.sum(axis=1, keepdims=True)
                eps = 1e-12
                epoch_loss += float(-np.log(probs[np.arange(len(idx)), targets[idx]] + eps).mean())
                n_batches += 1
                grad = (probs - tb) / len(idx)
                gw = grad.T @ xb + self.weight_decay * w
                gb = grad.sum(axis=0)
                vw = self.momentum * vw - lr * gw
                vb = self.momentum * vb - lr * gb
                w = w + vw
                b = b + vb
            mean_loss = epoch_loss / n_batches
            if not np.isfinite(mean_loss):
                raise DivergenceError(epoch)
            losses.append(mean_loss)
        self.weights_ = w
        self.biases_ = b
        self.loss_history_ = losses
        self.n_features_in_ = d
        return self

    def decision_function(self, X) -> np.ndarray:
        if not hasattr(self, "weights_"):
            raise ValidationError("probe is not fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(
                f"descriptor length {X.shape[1]} does not match training ({self.n_features_in_})"
            )
        return self._prepare(X) @ self.weights_.T + self.biases_

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]

    def score(self, X, y) -> float:
        y = np.asarray(y)
        return float(np.mean(self.predict(X) == y))


def train_probe(X, y, seed: int = 0, **hyper) -> LinearProbe:
    return LinearProbe(seed=seed, **hyper).fit(X, y)


def evaluate(model: LinearProbe, X, y) -> float:
    """Fraction of argmax-correct predictions."""
    return model.score(X, y)


@dataclass
class ConditionComparison:
    label_a: str
    label_b: str
    runs: int
    accuracies_a: dict[str, list[float]]
    accuracies_b: dict[str, list[float]]
    per_kind: dict[str, dict] = field(default_factory=dict)
    holm_adjusted: dict[str, float] = field(default_factory=dict)
    fixed_effects: dict | None = None
    sign_table: dict[str, list[int]] = field(default_factory=dict)
    banner: str = STAND_IN_BANNER

    def to_dict(self) -> dict:
        return {
            "banner": self.banner,
            "label_a": self.label_a,
            "label_b": self.label_b,
            "runs": self.runs,
            "accuracies_a": self.accuracies_a,
            "accuracies_b": self.accuracies_b,
            "per_kind": self.per_kind,
            "holm_adjusted": self.holm_adjusted,
            "fixed_effects": self.fixed_effects,
            "sign_table": self.sign_table,
        }


def _se(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(values.size))


def compare_conditions(
    train_a: Mapping[str, tuple[np.ndarray, np.ndarray]],
    train_b: Mapping[str, tuple[np.ndarray, np.ndarray]],
    test: tuple[np.ndarray, np.ndarray],
    runs: int = 8,
    seed: int = 0,
    labels: tuple[str, str] = ("a", "b"),
    hyper: dict | None = None,
) -> ConditionComparison:
    """Paired multi-run comparison of two condition families on a shared test set.

    `train_a`/`train_b` map sub-kind name -> (X, y); both must share keys and the
    test set. Each run trains both conditions with the same derived seed
    (paired). Per sub-kind Welch p-values are Holm-adjusted across sub-kinds and
    a fixed-effects model (accuracy ~ distribution + sub-kind dummies) is fitted
    when there are at least two sub-kinds.
    """
    if set(train_a) != set(train_b):
        raise ValidationError("condition families must share sub-kind keys")
    if runs < 2:
        raise ValidationError("need at least 2 runs")
    hyper = hyper or {}
    kinds = sorted(train_a)
    x_test, y_test = test
    acc_a: dict[str, list[float]] = {k: [] for k in kinds}
    acc_b: dict[str, list[float]] = {k: [] for k in kinds}
    for kind in kinds:
        xa, ya = train_a[kind]
        xb, yb = train_b[kind]
        for run in range(runs):
            run_seed = child_seed(seed, "probe-run", kind, run)
            acc_a[kind].append(evaluate(train_probe(xa, ya, seed=run_seed, **hyper), x_test, y_test))
            acc_b[kind].append(evaluate(train_probe(xb, yb, seed=run_seed, **hyper), x_test, y_test))

    comparison = ConditionComparison(labels[0], labels[1], runs, acc_a, acc_b)
    pvals = []
    for kind in kinds:
        a = np.asarray(acc_a[kind])
        b = np.asarray(acc_b[kind])
        stats = {
            "mean_a": float(a.mean()),
            "mean_b": float(b.mean()),
            "se_a": _se(a),
            "se_b": _se(b),
        }
        try:
            test_result = welch_t(a, b)
            stats["welch_p"] = test_result.p_value
            stats["welch_t"] = test_result.statistic
        except DegenerateStatisticError:
            # all runs identical in both conditions: p collapses to 1 or 0
            stats["welch_p"] = 1.0 if stats["mean_a"] == stats["mean_b"] else 0.0
            stats["welch_t"] = 0.0
            stats["degenerate"] = True
        comparison.per_kind[kind] = stats
        pvals.append(stats["welch_p"])
        comparison.sign_table[kind] = [int(np.sign(x - y)) for x, y in zip(a, b)]
    adjusted = holm_adjust(pvals)
    comparison.holm_adjusted = {kind: adj for kind, adj in zip(kinds, adjusted)}

    rows = []
    for kind in kinds:
        for label, accs in ((labels[0], acc_a[kind]), (labels[1], acc_b[kind])):
            rows.extend(
                {"response": acc, "distribution": label, "unit": kind} for acc in accs
            )
    if len(kinds) >= 2:
        comparison.fixed_effects = ols_fixed_effects(rows, include_unit_dummies=True).to_dict()
    else:
        comparison.fixed_effects = ols_fixed_effects(rows, include_unit_dummies=False).to_dict()
    return comparison
