"""Hill-climbing subset selection over within-category pairwise distances.

The objective on a subset S is L(S) = lam * sd(S) + sign * (1 - lam) * mean(S),
where sd and mean run over all within-subset pairwise distances (population sd).
The three modes are minimize-sd (lam=1), minimize-distance (lam=0, sign +), and
maximize-distance (lam=0, sign -, i.e. the negated mean is minimized). Each
restart samples a subset uniformly and proposes single-element swaps, accepting
only strict improvements; the best restart wins, ties to the lowest restart
index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from lumpkit._rng import substream
from lumpkit.errors import ValidationError

MODE_MINIMIZE_DISTANCE = "minimize-distance"
MODE_MAXIMIZE_DISTANCE = "maximize-distance"
MODE_MINIMIZE_SD = "minimize-sd"
MODES = (MODE_MINIMIZE_DISTANCE, MODE_MAXIMIZE_DISTANCE, MODE_MINIMIZE_SD)


@dataclass(frozen=True)
class ObjectiveSpec:
    mode: str

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown objective mode {self.mode!r}")

    @property
    def lam(self) -> float:
        return 1.0 if self.mode == MODE_MINIMIZE_SD else 0.0

    @property
    def sign(self) -> float:
        return -1.0 if self.mode == MODE_MAXIMIZE_DISTANCE else 1.0


@dataclass(frozen=True)
class OptimizerConfig:
    n_select: int
    restarts: int = 3
    steps: int | None = None  # default 100 * n_select
    seed: int = 0
    verify: bool = False  # cross-check incremental objective against recomputation

    @property
    def steps_per_restart(self) -> int:
        return 100 * self.n_select if self.steps is None else self.steps


@dataclass(frozen=True)
class TraceEntry:
    restart: int
    step: int
    accepted: bool
    objective: float


@dataclass
class OptimizeResult:
    best_ids: tuple[str, ...]
    best_value: float
    restart_values: list[float]
    trace: list[TraceEntry] = field(repr=False)

    def trace_dicts(self) -> list[dict]:
        return [
            {"restart": t.restart, "step": t.step, "accepted": t.accepted, "objective": t.objective}
            for t in self.trace
        ]


def _moments_to_value(s1: float, s2: float, m: int, spec: ObjectiveSpec) -> float:
    mean = s1 / m
    if spec.lam == 1.0:
        var = max(s2 / m - mean * mean, 0.0)
        return math.sqrt(var)
    return spec.sign * mean


def objective_value(subset, distances: np.ndarray, spec: ObjectiveSpec) -> float:
    """L(S) from the full pairwise values of `subset` (indices into `distances`)."""
    idx = np.asarray(subset, dtype=np.int64)
    if idx.size < 2:
        raise ValidationError("objective needs a subset of at least 2 images")
    sub = distances[np.ix_(idx, idx)]
    iu, ju = np.triu_indices(idx.size, k=1)
    vals = sub[iu, ju]
    mean = float(vals.mean())
    if spec.lam == 1.0:
        centered = vals - mean
        return math.sqrt(float((centered * centered).mean()))
    return spec.sign * mean


def _check_distances(distances: np.ndarray) -> np.ndarray:
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValidationError("distances must be a square matrix")
    if not np.array_equal(d, d.T):
        raise ValidationError("distances must be symmetric")
    d = d.copy()
    np.fill_diagonal(d, 0.0)
    return d


def optimize_subset(
    ids,
    distances: np.ndarray,
    spec: ObjectiveSpec,
    config: OptimizerConfig,
) -> OptimizeResult:
    """SI-style hill climbing: R restarts of E single-swap steps, strict acceptance."""
    ids = tuple(ids)
    d = _check_distances(distances)
    n = len(ids)
    if d.shape[0] != n:
        raise ValidationError("distance matrix does not match ids")
    big_n = config.n_select
    if big_n < 2:
        raise ValidationError("subset size must be >= 2")
    if n < big_n + 1:
        raise ValidationError(f"population {n} must exceed subset size {big_n}")
    d2 = d * d

    best_value = math.inf
    best_subset: np.ndarray | None = None
    restart_values = []
    trace: list[TraceEntry] = []
    m = big_n * (big_n - 1) // 2

    for r in range(config.restarts):
        rng = substream(config.seed, "hill-climb", r)
        members = rng.choice(n, size=big_n, replace=False)
        in_subset = np.zeros(n, dtype=bool)
        in_subset[members] = True
        complement = np.flatnonzero(~in_subset)
        # row sums of distances (and squares) from every node to the subset
        row1 = d[:, members].sum(axis=1)
        row2 = d2[:, members].sum(axis=1)
        s1 = float(row1[members].sum()) / 2.0
        s2 = float(row2[members].sum()) / 2.0
        value = _moments_to_value(s1, s2, m, spec)

        member_pos = {int(node): pos for pos, node in enumerate(members)}
        comp_pos = {int(node): pos for pos, node in enumerate(complement)}

        for step in range(config.steps_per_restart):
            rem = int(members[rng.integers(0, big_n)])
            add = int(complement[rng.integers(0, n - big_n)])
            ns1 = s1 - row1[rem] + (row1[add] - d[add, rem])
            ns2 = s2 - row2[rem] + (row2[add] - d2[add, rem])
            new_value = _moments_to_value(ns1, ns2, m, spec)
            accepted = new_value < value
            if accepted:
                members[member_pos[rem]] = add
                complement[comp_pos[add]] = rem
                member_pos[add] = member_pos.pop(rem)
                comp_pos[rem] = comp_pos.pop(add)
                row1 += d[:, add] - d[:, rem]
                row2 += d2[:, add] - d2[:, rem]
                s1, s2, value = ns1, ns2, new_value
                if config.verify:
                    exact = objective_value(members, d, spec)
                    if abs(exact - value) > 1e-9:
                        raise AssertionError(
                            f"incremental objective {value} drifted from exact {exact}"
                        )
            trace.append(TraceEntry(r, step, accepted, value))

        final_members = np.sort(members)
        final_value = objective_value(final_members, d, spec)
        restart_values.append(final_value)
        if final_value < best_value:
            best_value = final_value
            best_subset = final_members

    assert best_subset is not None
    return OptimizeResult(
        best_ids=tuple(ids[i] for i in best_subset),
        best_value=best_value,
        restart_values=restart_values,
        trace=trace,
    )


class SubsetOptimizer(BaseEstimator):
    """Estimator facade: fit stores the best subset for a precomputed distance matrix.

    Parameters mirror OptimizerConfig; `fit(X)` takes the square distance matrix
    (and optional ids), after which `best_ids_`, `best_value_`, and `trace_` are set.
    """

    def __init__(self, mode: str = MODE_MINIMIZE_SD, n_select: int = 100, restarts: int = 3,
                 steps: int | None = None, seed: int = 0, verify: bool = False):
        self.mode = mode
        self.n_select = n_select
        self.restarts = restarts
        self.steps = steps
        self.seed = seed
        self.verify = verify

    def fit(self, X, y=None, ids=None):
        d = _check_distances(X)
        if ids is None:
            ids = [f"{i:06d}" for i in range(d.shape[0])]
        ids = tuple(ids)
        result = optimize_subset(
            ids,
            d,
            ObjectiveSpec(self.mode),
            OptimizerConfig(self.n_select, self.restarts, self.steps, self.seed, self.verify),
        )
        index_of = {image_id: i for i, image_id in enumerate(ids)}
        self.best_ids_ = result.best_ids
        self.best_value_ = result.best_value
        self.restart_values_ = result.restart_values
        self.trace_ = result.trace
        self._support = np.asarray([index_of[i] for i in result.best_ids], dtype=np.int64)
        return self

    def transform(self, X):
        """Row-select the fitted subset from a matrix aligned with the fitted ids."""
        idx = [int(i) for i in self.support_indices_]
        return np.asarray(X)[idx]

    @property
    def support_indices_(self) -> np.ndarray:
        if not hasattr(self, "best_ids_"):
            raise ValidationError("SubsetOptimizer is not fitted")
        return self._support

    def fit_transform(self, X, y=None, **kwargs):
        self.fit(X, y, **kwargs)
        return self.transform(X)
