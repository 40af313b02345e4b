"""Rank-frequency structure of instance annotations, and its uniform-sampling null.

Occurrences are counted over frames carrying a unique instance ID (counts 1-3);
frames with four or more instances carry no IDs and are invisible here. Rank 1
is the most frequent instance, with frequency ties broken by lexicographic
instance_id so every ranking is deterministic.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from lumpkit._rng import substream
from lumpkit.errors import EmptyCategoryError, ValidationError
from lumpkit.ingest import Corpus

SCOPE_WITHIN_EVENT = "within-event"
SCOPE_ACROSS_CORPUS = "across-corpus"
AGGREGATE_CATEGORY = "(all)"

COUNT_GROUP_MAX = 4  # bucket key 4 means "4 or more"


@dataclass(frozen=True)
class RankRow:
    category: str
    rank: int
    count: float
    proportion: float


@dataclass(frozen=True)
class RankTable:
    scope: str
    rows: tuple[RankRow, ...]

    def categories(self) -> tuple[str, ...]:
        seen = []
        for row in self.rows:
            if row.category not in seen:
                seen.append(row.category)
        return tuple(seen)

    def for_category(self, category: str) -> tuple[RankRow, ...]:
        return tuple(r for r in self.rows if r.category == category)

    def proportion(self, category: str, rank: int) -> float:
        for row in self.rows:
            if row.category == category and row.rank == rank:
                return row.proportion
        return 0.0

    def csv_rows(self) -> list[list]:
        return [
            [self.scope, r.category, r.rank, repr(r.count), repr(r.proportion)] for r in self.rows
        ]


def _check_scope(scope: str) -> None:
    if scope not in (SCOPE_WITHIN_EVENT, SCOPE_ACROSS_CORPUS):
        raise ValidationError(f"unknown scope {scope!r}")


def instance_count_proportions(corpus: Corpus, category: str) -> dict[int, float]:
    """Proportion of frames with 1, 2, 3, and 4+ instances of `category` in view."""
    records = corpus.records_with_category(category)
    if not records:
        raise EmptyCategoryError(f"no frames with {category!r} in view")
    buckets = Counter()
    for rec in records:
        count = rec.annotation_for(category).count
        buckets[min(count, COUNT_GROUP_MAX)] += 1
    total = sum(buckets.values())
    return {k: buckets[k] / total for k in sorted(buckets)}


def _id_occurrences(corpus: Corpus, category: str) -> list[tuple[str, str, str]]:
    """(subject, event, instance_id) for every identified frame of `category`."""
    corpus.require_category(category)
    out = []
    for rec in corpus.records:
        ann = rec.annotation_for(category)
        if ann is not None and ann.instance_id is not None:
            out.append((rec.subject, rec.event, ann.instance_id))
    return out


def _rank_counts(counts: Counter) -> dict[int, int]:
    """Instance counts -> counts by rank (desc count, lexicographic id tie-break)."""
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return {rank: count for rank, (_, count) in enumerate(ordered, start=1)}


def instance_ranks(corpus: Corpus, category: str, scope: str = SCOPE_ACROSS_CORPUS) -> dict:
    """Per-unit instance ranks: {subject: {instance_id: rank}} (across-corpus scope)
    or {(subject, event): {instance_id: rank}} (within-event scope)."""
    _check_scope(scope)
    occ = _id_occurrences(corpus, category)
    if not occ:
        raise EmptyCategoryError(f"no identified instances for {category!r}")
    grouped: dict = defaultdict(Counter)
    for subject, event, instance in occ:
        key = subject if scope == SCOPE_ACROSS_CORPUS else (subject, event)
        grouped[key][instance] += 1
    out = {}
    for key, counts in grouped.items():
        ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        out[key] = {inst: rank for rank, (inst, _) in enumerate(ordered, start=1)}
    return out


def _ranked_counts_by_unit(corpus: Corpus, category: str, scope: str) -> list[dict[int, int]]:
    occ = _id_occurrences(corpus, category)
    if not occ:
        raise EmptyCategoryError(f"no identified instances for {category!r}")
    grouped: dict = defaultdict(Counter)
    for subject, event, instance in occ:
        key = subject if scope == SCOPE_ACROSS_CORPUS else (subject, event)
        grouped[key][instance] += 1
    return [_rank_counts(counts) for counts in grouped.values()]


def rank_frequencies(corpus: Corpus, category: str, scope: str) -> RankTable:
    """Occurrence proportions by frequency rank.

    Within-event scope ranks instances per (subject, event); across-corpus scope
    ranks per subject over all events. Counts are then aggregated by rank across
    units and normalized.
    """
    _check_scope(scope)
    totals: Counter = Counter()
    for ranked in _ranked_counts_by_unit(corpus, category, scope):
        for rank, count in ranked.items():
            totals[rank] += count
    grand = sum(totals.values())
    rows = tuple(
        RankRow(category, rank, float(totals[rank]), totals[rank] / grand)
        for rank in sorted(totals)
    )
    return RankTable(scope, rows)


def aggregate_rank_frequencies(corpus: Corpus, scope: str, categories=None) -> RankTable:
    """Raw rank counts aggregated across categories, then normalized.

    This is the significance variant: one exact distribution instead of a mean
    of per-category proportions.
    """
    _check_scope(scope)
    cats = sorted(categories) if categories is not None else sorted(corpus.categories)
    totals: Counter = Counter()
    any_ids = False
    for category in cats:
        try:
            units = _ranked_counts_by_unit(corpus, category, scope)
        except EmptyCategoryError:
            continue
        any_ids = True
        for ranked in units:
            for rank, count in ranked.items():
                totals[rank] += count
    if not any_ids:
        raise EmptyCategoryError("no identified instances in any requested category")
    grand = sum(totals.values())
    rows = tuple(
        RankRow(AGGREGATE_CATEGORY, rank, float(totals[rank]), totals[rank] / grand)
        for rank in sorted(totals)
    )
    return RankTable(scope, rows)


def distinct_instances_per_event(corpus: Corpus, category: str) -> dict[int, float]:
    """Proportion of (subject, event) units by number of distinct instance IDs present."""
    occ = _id_occurrences(corpus, category)
    if not occ:
        raise EmptyCategoryError(f"no identified instances for {category!r}")
    per_event: dict = defaultdict(set)
    for subject, event, instance in occ:
        per_event[(subject, event)].add(instance)
    sizes = Counter(len(ids) for ids in per_event.values())
    total = sum(sizes.values())
    return {k: sizes[k] / total for k in sorted(sizes)}


def available_instance_ids(corpus: Corpus, category: str) -> dict[str, tuple[str, ...]]:
    """All instance IDs ever coded for each subject in `category` (sorted)."""
    pools: dict = defaultdict(set)
    for subject, _event, instance in _id_occurrences(corpus, category):
        pools[subject].add(instance)
    return {s: tuple(sorted(ids)) for s, ids in pools.items()}


def _null_counts_one_seed(corpus: Corpus, categories, seed: int, draws) -> Counter:
    """Aggregated rank counts for one null replicate (across-corpus scope)."""
    totals: Counter = Counter()
    for category in categories:
        pools = available_instance_ids(corpus, category)
        observed: Counter = Counter()
        for subject, _event, _instance in _id_occurrences(corpus, category):
            observed[subject] += 1
        for subject in sorted(pools):
            ids = pools[subject]
            n_draws = observed[subject] if draws is None else int(draws)
            if n_draws == 0:
                continue
            if not ids:
                raise EmptyCategoryError(
                    f"no available instance IDs for subject {subject!r}, category {category!r}"
                )
            rng = substream(seed, "null-rank", subject, category)
            picks = rng.integers(0, len(ids), size=n_draws)
            counts = Counter()
            hist = np.bincount(picks, minlength=len(ids))
            for idx, instance in enumerate(ids):
                if hist[idx] > 0:
                    counts[instance] = int(hist[idx])
            for rank, count in _rank_counts(counts).items():
                totals[rank] += count
    return totals


def null_rank_frequencies(corpus: Corpus, seeds=range(500), draws=None, categories=None) -> RankTable:
    """Null rank-frequency distribution from uniform resampling of instance IDs.

    For each seed and each (subject, category), the observed total occurrence
    count is redrawn uniformly (with replacement) over that subject's available
    IDs; ranks are recomputed, raw counts aggregated across categories and
    subjects, normalized per seed, and proportions averaged over seeds. Seeds
    are deduplicated, so a repeated seed cannot double-count.
    """
    seed_list = sorted(set(int(s) for s in seeds))
    if not seed_list:
        raise ValidationError("need at least one seed")
    cats = sorted(categories) if categories is not None else sorted(corpus.categories)
    per_seed: list[dict[int, float]] = []
    count_sums: Counter = Counter()
    for seed in seed_list:
        totals = _null_counts_one_seed(corpus, cats, seed, draws)
        grand = sum(totals.values())
        if grand == 0:
            raise EmptyCategoryError("null resampling produced no counts")
        per_seed.append({rank: count / grand for rank, count in totals.items()})
        for rank, count in totals.items():
            count_sums[rank] += count
    ranks = sorted({rank for dist in per_seed for rank in dist})
    n = len(per_seed)
    rows = tuple(
        RankRow(
            AGGREGATE_CATEGORY,
            rank,
            count_sums[rank] / n,
            sum(dist.get(rank, 0.0) for dist in per_seed) / n,
        )
        for rank in ranks
    )
    return RankTable(SCOPE_ACROSS_CORPUS, rows)


def rank_occurrence_sample(table: RankTable, category: str | None = None) -> np.ndarray:
    """Expand a rank table into one datapoint per occurrence (value = rank).

    Used to compare observed and null rank distributions with two-sample tests
    on the discrete counts. Requires integral counts.
    """
    rows = table.rows if category is None else table.for_category(category)
    values = []
    for row in rows:
        count = int(round(row.count))
        if abs(count - row.count) > 1e-9:
            raise ValidationError("rank table has non-integral counts; use a single-seed table")
        values.extend([row.rank] * count)
    return np.asarray(values, dtype=np.float64)
