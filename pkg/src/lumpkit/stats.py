"""Two-sample tests, permutation machinery, Holm adjustment, and fixed-effects OLS.

All alternatives are two-sided. The permutation test subsamples an exact
max(1, round(f*n)) datapoints from each group per iteration, relabels the pool
uniformly at random, and reports the +1-smoothed p-value; iterations draw from
per-iteration derived RNG streams so results are independent of worker count.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special

from lumpkit._rng import substream
from lumpkit.errors import DegenerateStatisticError, ValidationError


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    n1: int
    n2: int
    method: str
    df: float | None = None
    degenerate: bool = False

    def to_dict(self) -> dict:
        out = {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "n1": self.n1,
            "n2": self.n2,
            "method": self.method,
        }
        if self.df is not None:
            out["df"] = self.df
        if self.degenerate:
            out["degenerate"] = True
        return out


@dataclass(frozen=True)
class PermutationSpec:
    n_permutations: int = 9999
    subsample_fraction: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.n_permutations < 1:
            raise ValidationError("n_permutations must be >= 1")
        if not (0.0 < self.subsample_fraction <= 1.0):
            raise ValidationError("subsample_fraction must be in (0, 1]")


def _as_array(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-D sequence")
    return arr


def _ecdf(sorted_values: np.ndarray, at: np.ndarray) -> np.ndarray:
    return np.searchsorted(sorted_values, at, side="right") / sorted_values.size


def ks_two_sample(a, b) -> TestResult:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.

    D = sup |ECDF_a - ECDF_b| (ties allowed); p uses the Kolmogorov series at
    effective n = n1*n2/(n1+n2).
    """
    a = _as_array(a, "a")
    b = _as_array(b, "b")
    sa, sb = np.sort(a), np.sort(b)
    grid = np.concatenate([sa, sb])
    d = float(np.max(np.abs(_ecdf(sa, grid) - _ecdf(sb, grid))))
    ne = a.size * b.size / (a.size + b.size)
    p = float(special.kolmogorov(math.sqrt(ne) * d))
    p = min(1.0, max(0.0, p))
    return TestResult(d, p, a.size, b.size, "ks-two-sample/asymptotic")


def _midranks(pooled: np.ndarray) -> np.ndarray:
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(pooled.size, dtype=np.float64)
    sorted_vals = pooled[order]
    i = 0
    while i < pooled.size:
        j = i
        while j + 1 < pooled.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def wilcoxon_rank_sum(a, b, exact: bool | None = None) -> TestResult:
    """Two-sided Wilcoxon rank-sum test with midranks for ties.

    Uses exhaustive enumeration of all label assignments when n1+n2 <= 12
    (unless `exact` forces a path), otherwise a tie-corrected normal
    approximation. Fully tied data yields p = 1 with a degeneracy flag.
    """
    a = _as_array(a, "a")
    b = _as_array(b, "b")
    n1, n2 = a.size, b.size
    n = n1 + n2
    pooled = np.concatenate([a, b])
    ranks = _midranks(pooled)
    w = float(ranks[:n1].sum())
    mu = n1 * (n + 1) / 2.0

    if np.all(pooled == pooled[0]):
        return TestResult(w, 1.0, n1, n2, "wilcoxon-rank-sum/degenerate", degenerate=True)

    use_exact = (n <= 12) if exact is None else exact
    if use_exact:
        observed_dev = abs(w - mu)
        hits = 0
        total = 0
        for combo in itertools.combinations(range(n), n1):
            ws = ranks[list(combo)].sum()
            if abs(ws - mu) >= observed_dev - 1e-9:
                hits += 1
            total += 1
        return TestResult(w, hits / total, n1, n2, "wilcoxon-rank-sum/exact")

    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts)) / (n * (n - 1))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return TestResult(w, 1.0, n1, n2, "wilcoxon-rank-sum/degenerate", degenerate=True)
    z = (w - mu) / math.sqrt(var)
    p = min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))
    return TestResult(w, p, n1, n2, "wilcoxon-rank-sum/normal")


def _t_sf_two_sided(t: float, df: float) -> float:
    # two-sided p via the regularized incomplete beta: I_{df/(df+t^2)}(df/2, 1/2)
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return float(special.betainc(df / 2.0, 0.5, x))


def welch_t(a, b) -> TestResult:
    """Welch's two-sample t-test (two-sided, Welch-Satterthwaite df)."""
    a = _as_array(a, "a")
    b = _as_array(b, "b")
    n1, n2 = a.size, b.size
    if n1 < 2 or n2 < 2:
        raise ValidationError("welch_t needs at least 2 values per sample")
    v1 = float(np.var(a, ddof=1))
    v2 = float(np.var(b, ddof=1))
    if v1 == 0.0 and v2 == 0.0:
        raise DegenerateStatisticError("both samples have zero variance")
    se1, se2 = v1 / n1, v2 / n2
    t = (float(a.mean()) - float(b.mean())) / math.sqrt(se1 + se2)
    df = (se1 + se2) ** 2 / (
        (se1**2 / (n1 - 1) if se1 else 0.0) + (se2**2 / (n2 - 1) if se2 else 0.0)
    )
    return TestResult(t, _t_sf_two_sided(t, df), n1, n2, "welch-t", df=df)


def mean_statistic() -> Callable[[np.ndarray], float]:
    """Group statistic: plain mean of the values column."""

    def stat(values: np.ndarray) -> float:
        return float(values.mean())

    return stat


def ratio_statistic(aggregate: str = "mean") -> Callable[[np.ndarray, np.ndarray], float]:
    """Group statistic over (values, within_mask): M_within / M_between."""
    if aggregate not in ("mean", "median"):
        raise ValidationError(f"unknown aggregate {aggregate!r}")
    agg = np.mean if aggregate == "mean" else np.median

    def stat(values: np.ndarray, within: np.ndarray) -> float:
        w = values[within.astype(bool)]
        b = values[~within.astype(bool)]
        if w.size == 0 or b.size == 0:
            raise DegenerateStatisticError("a subsample lost one side of the ratio")
        denom = float(agg(b))
        if denom == 0.0:
            raise DegenerateStatisticError("zero between-group aggregate")
        return float(agg(w)) / denom

    return stat


def _columns(group) -> tuple[np.ndarray, ...]:
    if isinstance(group, tuple):
        cols = tuple(np.asarray(c) for c in group)
    else:
        cols = (np.asarray(group),)
    n = cols[0].shape[0]
    if n == 0:
        raise ValidationError("permutation test group is empty")
    for c in cols:
        if c.ndim != 1 or c.shape[0] != n:
            raise ValidationError("group columns must be aligned 1-D arrays")
    return cols


def _take(cols: tuple[np.ndarray, ...], idx: np.ndarray) -> tuple[np.ndarray, ...]:
    return tuple(c[idx] for c in cols)


def permutation_test(group_a, group_b, statistic, spec: PermutationSpec) -> TestResult:
    """Label-permutation test on subsampled groups.

    `group_a`/`group_b` are a 1-D value array or a tuple of aligned columns;
    `statistic` maps one group's columns to a scalar. The observed difference
    uses the full data; each iteration subsamples both groups, pools them,
    relabels uniformly at random, and recomputes the difference. p is the
    +1-smoothed fraction of |permuted| >= |observed|. An iteration whose
    statistic is undefined is redrawn once, then raises.
    """
    cols_a = _columns(group_a)
    cols_b = _columns(group_b)
    na, nb = cols_a[0].shape[0], cols_b[0].shape[0]
    observed = statistic(*cols_a) - statistic(*cols_b)
    ka = max(1, int(round(spec.subsample_fraction * na)))
    kb = max(1, int(round(spec.subsample_fraction * nb)))

    def one_iteration(rng: np.random.Generator) -> float:
        idx_a = np.argpartition(rng.random(na), ka - 1)[:ka] if ka < na else np.arange(na)
        idx_b = np.argpartition(rng.random(nb), kb - 1)[:kb] if kb < nb else np.arange(nb)
        pool = tuple(
            np.concatenate([ca[idx_a], cb[idx_b]]) for ca, cb in zip(cols_a, cols_b)
        )
        order = np.argpartition(rng.random(ka + kb), ka - 1)
        pseudo_a = order[:ka]
        pseudo_b = order[ka:]
        return statistic(*_take(pool, pseudo_a)) - statistic(*_take(pool, pseudo_b))

    hits = 0
    threshold = abs(observed)
    for i in range(spec.n_permutations):
        try:
            diff = one_iteration(substream(spec.seed, "perm", i))
        except DegenerateStatisticError:
            diff = one_iteration(substream(spec.seed, "perm-retry", i))
        if abs(diff) >= threshold:
            hits += 1
    p = (1 + hits) / (spec.n_permutations + 1)
    method = (
        f"permutation/n={spec.n_permutations}/f={spec.subsample_fraction}"
    )
    return TestResult(float(observed), p, na, nb, method)


def holm_adjust(p_values: Sequence[float]) -> list[float]:
    """Holm step-down adjustment, returned in input order."""
    ps = [float(p) for p in p_values]
    for p in ps:
        if not (0.0 <= p <= 1.0):
            raise ValidationError(f"p-value {p} outside [0, 1]")
    m = len(ps)
    order = sorted(range(m), key=lambda i: ps[i])
    adjusted = [0.0] * m
    running = 0.0
    for k, idx in enumerate(order):
        running = max(running, (m - k) * ps[idx])
        adjusted[idx] = min(1.0, running)
    return adjusted


@dataclass(frozen=True)
class Coefficient:
    name: str
    estimate: float
    se: float
    t: float
    p_value: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "estimate": self.estimate,
            "se": self.se,
            "t": self.t,
            "p_value": self.p_value,
        }


@dataclass(frozen=True)
class OLSResult:
    coefficients: tuple[Coefficient, ...]
    df_resid: int
    r_squared: float

    def coefficient(self, name: str) -> Coefficient:
        for c in self.coefficients:
            if c.name == name:
                return c
        raise KeyError(name)

    def named(self, prefix: str) -> list[Coefficient]:
        return [c for c in self.coefficients if c.name.startswith(prefix)]

    def to_dict(self) -> dict:
        return {
            "coefficients": [c.to_dict() for c in self.coefficients],
            "df_resid": self.df_resid,
            "r_squared": self.r_squared,
        }


def _dummy_columns(rows: list[dict], factor: str) -> tuple[list[str], np.ndarray]:
    levels = sorted({str(r[factor]) for r in rows})
    if len(levels) < 2:
        return [], np.empty((len(rows), 0))
    cols = np.zeros((len(rows), len(levels) - 1))
    for i, r in enumerate(rows):
        value = str(r[factor])
        for j, level in enumerate(levels[1:]):
            if value == level:
                cols[i, j] = 1.0
    names = [f"{factor}[{level}]" for level in levels[1:]]
    return names, cols


def ols_fixed_effects(table: Sequence[dict], include_unit_dummies: bool = False) -> OLSResult:
    """OLS on response ~ distribution + category (+ unit dummies), reference coding.

    Rows are mappings with keys `response`, `distribution`, and optionally
    `category` and `unit`. Factors with a single level contribute no columns.
    Solved by normal equations; classical t-tests per coefficient.
    """
    rows = list(table)
    if not rows:
        raise ValidationError("empty table")
    y = np.array([float(r["response"]) for r in rows])
    names = ["intercept"]
    blocks = [np.ones((len(rows), 1))]
    factors = ["distribution", "category"] + (["unit"] if include_unit_dummies else [])
    for factor in factors:
        if any(factor in r and r[factor] is not None for r in rows):
            fnames, cols = _dummy_columns(
                [{factor: r.get(factor)} for r in rows], factor
            )
            names.extend(fnames)
            blocks.append(cols)
    x = np.hstack(blocks)
    n, p = x.shape
    if np.linalg.matrix_rank(x) < p:
        from scipy.linalg import qr

        _, r, piv = qr(x, pivoting=True, mode="economic")
        diag = np.abs(np.diag(r))
        tol = diag.max() * max(n, p) * np.finfo(float).eps
        aliased = [names[piv[i]] for i in range(p) if i >= len(diag) or diag[i] < tol]
        raise ValidationError(f"rank-deficient design; aliased columns: {aliased}")
    if n <= p:
        raise ValidationError(f"too few rows ({n}) for {p} coefficients")
    xtx = x.T @ x
    beta = np.linalg.solve(xtx, x.T @ y)
    resid = y - x @ beta
    rss = float(resid @ resid)
    df = n - p
    sigma2 = rss / df
    cov = sigma2 * np.linalg.inv(xtx)
    ses = np.sqrt(np.diag(cov))
    tss = float(np.sum((y - y.mean()) ** 2))
    coeffs = []
    for name, est, se in zip(names, beta, ses):
        t = float(est / se) if se > 0 else 0.0
        coeffs.append(Coefficient(name, float(est), float(se), t, _t_sf_two_sided(t, df)))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    return OLSResult(tuple(coeffs), df, r2)
