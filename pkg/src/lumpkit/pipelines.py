"""Analysis pipelines: corpus-level figure analogs shared by the CLI and tests.

Conventions: everything operates on distances (lower = more similar); the
within/between ratio is M_within/M_between so lower is better; graph-vs-null
comparisons transfer the observed graph's absolute top-quantile cutoff onto the
null's planar distances; dataset-vs-dataset graph comparisons share one pooled
cutoff per category so edge counts are free to differ.
"""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from lumpkit._rng import child_seed
from lumpkit.descriptors import Descriptor, GistExtractor, RGBHistogramExtractor
from lumpkit.distances import (
    METRIC_GIST,
    METRIC_HIST,
    PairDistanceSet,
    pair_set_from_matrix,
    pairwise_distances,
    pairwise_matrix,
)
from lumpkit.errors import EmptyCategoryError, ValidationError
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
from lumpkit.graphs import (
    WEIGHT_DISTANCE,
    WEIGHT_UNIT,
    build_similarity_graph,
    build_similarity_graph_at_threshold,
    geometric_null_graph,
    graph_metrics,
)
from lumpkit.ingest import Corpus, filter_for_pairwise, load_image, single_category_corpus
from lumpkit.simstruct import (
    RANK_TAG_OO,
    RANK_TAG_R1O,
    RANK_TAG_R1R1,
    EntropySpec,
    binned_entropy,
    null_similarity_sample,
    tag_pairs,
)
from lumpkit.stats import (
    PermutationSpec,
    ks_two_sample,
    permutation_test,
    ratio_statistic,
    welch_t,
    wilcoxon_rank_sum,
)

RANK_TAGS = (RANK_TAG_R1R1, RANK_TAG_R1O, RANK_TAG_OO)
GRAPH_METRIC_NAMES = ("mean_degree", "avg_connectivity", "avg_shortest_path")


def default_entropy_spec(metric: str) -> EntropySpec:
    """[0, 1.04] for histogram-correlation distances, [0, 2] for unit-norm GIST."""
    if metric == METRIC_HIST:
        return EntropySpec(lo=0.0, hi=1.04, bins=100)
    return EntropySpec(lo=0.0, hi=2.0, bins=100)


def compute_descriptors(
    corpus: Corpus,
    metric: str,
    jobs: int = 1,
    records=None,
    marginal_hist: bool = False,
    batch_size: int = 32,
) -> dict[str, Descriptor]:
    """Load images and extract the metric's descriptor for every record."""
    records = list(corpus.records if records is None else records)
    if metric == METRIC_HIST:
        extractor = RGBHistogramExtractor(marginal=marginal_hist)
    elif metric == METRIC_GIST:
        extractor = GistExtractor(batch_size=batch_size)
    else:
        raise ValidationError(f"unknown metric {metric!r}")
    kind = extractor.kind

    chunks = [records[k : k + batch_size] for k in range(0, len(records), batch_size)]

    def run_chunk(chunk):
        images = [load_image(corpus.image_path(rec)) for rec in chunk]
        return extractor.transform(images)

    if jobs <= 1:
        results = [run_chunk(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_chunk, chunks))
    out: dict[str, Descriptor] = {}
    for chunk, rows in zip(chunks, results):
        for rec, row in zip(chunk, rows):
            out[rec.image_id] = Descriptor(kind, row)
    return out


# ---------------------------------------------------------------------------
# frequency analyses


def frequency_analysis(corpus: Corpus, null_seed_count: int = 500, ks_seed: int = 0) -> dict:
    """Instance-count, distinct-instance, and rank-frequency tables plus the
    uniform-resampling null and its single-seed KS comparison."""
    cats = sorted(corpus.categories)
    per_category: dict[str, dict] = {}
    singles, rank1_within, rank1_across = [], [], []
    for cat in cats:
        entry: dict = {}
        try:
            counts = instance_count_proportions(corpus, cat)
        except EmptyCategoryError:
            continue
        entry["count_proportions"] = {str(k): v for k, v in counts.items()}
        singles.append(counts.get(1, 0.0))
        try:
            entry["distinct_per_event"] = {
                str(k): v for k, v in distinct_instances_per_event(corpus, cat).items()
            }
            within = rank_frequencies(corpus, cat, SCOPE_WITHIN_EVENT)
            across = rank_frequencies(corpus, cat, SCOPE_ACROSS_CORPUS)
        except EmptyCategoryError:
            per_category[cat] = entry
            continue
        entry["rank_within_event"] = [
            {"rank": r.rank, "count": r.count, "proportion": r.proportion} for r in within.rows
        ]
        entry["rank_across_corpus"] = [
            {"rank": r.rank, "count": r.count, "proportion": r.proportion} for r in across.rows
        ]
        rank1_within.append(within.proportion(cat, 1))
        rank1_across.append(across.proportion(cat, 1))
        per_category[cat] = entry

    section: dict = {"per_category": per_category}
    if singles:
        section["means"] = {
            "single_instance_proportion": float(np.mean(singles)),
            "single_instance_sd": float(np.std(singles, ddof=1)) if len(singles) > 1 else 0.0,
        }
    if rank1_within:
        section["means"]["rank1_within_event"] = float(np.mean(rank1_within))
        section["means"]["rank1_across_corpus"] = float(np.mean(rank1_across))

    try:
        observed = aggregate_rank_frequencies(corpus, SCOPE_ACROSS_CORPUS)
        null_avg = null_rank_frequencies(corpus, seeds=range(null_seed_count))
        null_single = null_rank_frequencies(corpus, seeds=[ks_seed])
        ks = ks_two_sample(
            rank_occurrence_sample(observed), rank_occurrence_sample(null_single)
        )
        section["observed_aggregate"] = [
            {"rank": r.rank, "count": r.count, "proportion": r.proportion} for r in observed.rows
        ]
        section["null_aggregate"] = [
            {"rank": r.rank, "count": r.count, "proportion": r.proportion} for r in null_avg.rows
        ]
        section["observed_vs_null_ks"] = ks.to_dict()
        section["null_seed_range"] = [0, null_seed_count - 1]
        section["ks_null_seed"] = ks_seed
    except EmptyCategoryError:
        pass
    return section


# ---------------------------------------------------------------------------
# similarity structure (comparison types, ratio, entropy, similarity null)


def _within_category_tagged(corpus, descriptors, metric, min_subject_images):
    """Per (category, subject) pair sets tagged by comparison type, pooled."""
    by_tag: dict[str, list[np.ndarray]] = {t: [] for t in RANK_TAGS}
    per_pairs: list[tuple[str, str, PairDistanceSet]] = []
    for cat in sorted(corpus.categories):
        try:
            ranks = instance_ranks(corpus, cat, SCOPE_ACROSS_CORPUS)
        except EmptyCategoryError:
            continue
        eligible = filter_for_pairwise(corpus, cat, min_subject_images)
        by_subject: dict[str, list] = defaultdict(list)
        for rec in eligible:
            by_subject[rec.subject].append(rec)
        for subject in sorted(by_subject):
            recs = by_subject[subject]
            if len(recs) < 2:
                continue
            ds = {r.image_id: descriptors[r.image_id] for r in recs}
            pairs = pairwise_distances(ds, metric)
            tagged = tag_pairs(pairs, corpus, category=cat, ranks=ranks)
            for t in RANK_TAGS:
                vals = tagged.distances_for_rank_tag(t)
                if vals.size:
                    by_tag[t].append(vals)
            per_pairs.append((cat, subject, pairs))
    pooled = {t: (np.concatenate(v) if v else np.empty(0)) for t, v in by_tag.items()}
    return pooled, per_pairs


def similarity_analysis(
    corpus: Corpus,
    descriptors: dict[str, Descriptor],
    metric: str,
    permutations: int = 9999,
    subsample: float = 0.25,
    seed: int = 0,
    entropy_spec: EntropySpec | None = None,
    min_subject_images: int = 10,
    min_images_per_instance: int = 5,
) -> dict:
    """Comparison-type distributions, within/between ratios, binned entropy, and
    the instance-balanced similarity null, with their test battery."""
    entropy_spec = entropy_spec or default_entropy_spec(metric)
    section: dict = {"sign_convention": "distances: lower = more similar; ratio lower is better"}

    pooled, _ = _within_category_tagged(corpus, descriptors, metric, min_subject_images)
    section["comparison_types"] = {
        t: {"n": int(v.size), "mean": (float(v.mean()) if v.size else None)}
        for t, v in pooled.items()
    }
    section["n_within_datapoints"] = int(sum(v.size for v in pooled.values()))
    tests = {}
    r1r1 = pooled[RANK_TAG_R1R1]
    for other in (RANK_TAG_R1O, RANK_TAG_OO):
        vals = pooled[other]
        if r1r1.size and vals.size:
            tests[f"ks_R1R1_vs_{other}"] = ks_two_sample(r1r1, vals).to_dict()
            tests[f"wilcoxon_R1R1_vs_{other}"] = wilcoxon_rank_sum(r1r1, vals).to_dict()
            tests[f"welch_R1R1_vs_{other}"] = welch_t(r1r1, vals).to_dict()
    section["comparison_type_tests"] = tests

    # within/between ratios over single-category frames, grouped Rank1/Other/All
    single = single_category_corpus(corpus)
    groups = _ratio_groups(single, descriptors, metric, min_subject_images)
    section["ratio_groups"] = {
        name: {
            "n": int(data[0].size),
            "ratio_mean": _safe_ratio(data, "mean"),
            "ratio_median": _safe_ratio(data, "median"),
        }
        for name, data in groups.items()
    }
    if groups["rank1"][0].size and groups["all"][0].size:
        spec = PermutationSpec(permutations, subsample, child_seed(seed, "perm-ratio"))
        section["ratio_rank1_vs_all_permutation"] = permutation_test(
            groups["rank1"], groups["all"], ratio_statistic("mean"), spec
        ).to_dict()

    # entropy of the observed within-category distance distribution vs the null
    observed = np.concatenate([v for v in pooled.values() if v.size]) if any(
        v.size for v in pooled.values()
    ) else np.empty(0)
    if observed.size:
        section["entropy"] = {
            "observed": binned_entropy(observed, entropy_spec),
            "observed_without_R1R1": (
                binned_entropy(
                    np.concatenate([pooled[RANK_TAG_R1O], pooled[RANK_TAG_OO]]), entropy_spec
                )
                if pooled[RANK_TAG_R1O].size and pooled[RANK_TAG_OO].size
                else None
            ),
            "spec": {"lo": entropy_spec.lo, "hi": entropy_spec.hi, "bins": entropy_spec.bins},
        }
        null_values = _null_similarity_values(
            corpus, descriptors, metric, min_images_per_instance, min_subject_images, seed
        )
        if null_values.size >= 2:
            section["entropy"]["null"] = binned_entropy(null_values, entropy_spec)
            section["null_similarity_n"] = int(null_values.size)
            section["observed_vs_null_ks"] = ks_two_sample(observed, null_values).to_dict()
            spec = PermutationSpec(permutations, subsample, child_seed(seed, "perm-entropy"))
            entropy_stat = lambda vals: binned_entropy(vals, entropy_spec)  # noqa: E731
            section["entropy_observed_vs_null_permutation"] = permutation_test(
                observed, null_values, entropy_stat, spec
            ).to_dict()
    return section


def _safe_ratio(data, statistic):
    values, within = data
    if not values.size:
        return None
    w = values[within]
    b = values[~within]
    if not w.size or not b.size:
        return None
    agg = np.mean if statistic == "mean" else np.median
    denom = float(agg(b))
    return float(agg(w)) / denom if denom else None


def _ratio_groups(single, descriptors, metric, min_subject_images):
    """Pooled (values, within_mask) per image group: rank1, other, all."""
    group_values: dict[str, list] = {"rank1": [], "other": [], "all": []}
    ranks_by_cat = {}
    for cat in sorted(single.categories):
        try:
            ranks_by_cat[cat] = instance_ranks(single, cat, SCOPE_ACROSS_CORPUS)
        except EmptyCategoryError:
            continue

    def is_rank1(rec):
        cat = rec.categories_in_view()[0]
        ann = rec.annotation_for(cat)
        ranks = ranks_by_cat.get(cat)
        if ranks is None or ann.instance_id is None:
            return None
        return ranks.get(rec.subject, {}).get(ann.instance_id) == 1

    eligible = []
    for cat in sorted(single.categories):
        eligible.extend(
            filter_for_pairwise(single, cat, min_subject_images, scope="subject")
        )
    by_subject: dict[str, list] = defaultdict(list)
    seen = set()
    for rec in eligible:
        if rec.image_id not in seen:
            seen.add(rec.image_id)
            by_subject[rec.subject].append(rec)

    for subject in sorted(by_subject):
        recs = by_subject[subject]
        flags = {rec.image_id: is_rank1(rec) for rec in recs}
        group_records = {
            "rank1": [r for r in recs if flags[r.image_id] is True],
            "other": [r for r in recs if flags[r.image_id] is False],
            "all": recs,
        }
        for name, members in group_records.items():
            if len(members) < 2:
                continue
            ds = {r.image_id: descriptors[r.image_id] for r in members}
            pairs = pairwise_distances(ds, metric)
            tagged = tag_pairs(pairs, single)
            defined = tagged.cat_codes >= 0
            group_values[name].append(
                (pairs.distances[defined], tagged.cat_codes[defined] == 0)
            )

    out = {}
    for name, chunks in group_values.items():
        if chunks:
            out[name] = (
                np.concatenate([c[0] for c in chunks]),
                np.concatenate([c[1] for c in chunks]),
            )
        else:
            out[name] = (np.empty(0), np.empty(0, dtype=bool))
    return out


def _null_similarity_values(
    corpus, descriptors, metric, min_images_per_instance, min_subject_images, seed
):
    values = []
    for cat in sorted(corpus.categories):
        try:
            sample = null_similarity_sample(
                corpus,
                cat,
                min_images_per_instance,
                min_subject_images,
                seed=child_seed(seed, "similarity-null", cat),
            )
        except (EmptyCategoryError, ValidationError):
            continue
        except Exception:
            continue
        by_subject: dict[str, list] = defaultdict(list)
        for rec in sample:
            by_subject[rec.subject].append(rec)
        for subject in sorted(by_subject):
            recs = by_subject[subject]
            if len(recs) < 2:
                continue
            ds = {r.image_id: descriptors[r.image_id] for r in recs}
            values.append(pairwise_distances(ds, metric).distances)
    return np.concatenate(values) if values else np.empty(0)


# ---------------------------------------------------------------------------
# graphs: observed vs geometric null


def observed_vs_null_graphs(
    corpus: Corpus,
    descriptors: dict[str, Descriptor],
    metric: str,
    quantile: float = 0.10,
    null_seeds: int = 30,
    seed: int = 0,
    connectivity_pair_cap: int | None = None,
    min_subject_images: int = 10,
) -> dict:
    """Per (subject, category) top-quantile graphs against seeded geometric nulls.

    Nulls share the observed graph's absolute distance cutoff (its top-quantile
    range applied to planar distances), so they may have fewer edges or none;
    edgeless nulls are excluded from the metric comparison and counted.
    """
    graphs_out = []
    ols_rows = []
    for cat in sorted(corpus.categories):
        eligible = filter_for_pairwise(corpus, cat, min_subject_images)
        by_subject: dict[str, list] = defaultdict(list)
        for rec in eligible:
            by_subject[rec.subject].append(rec)
        for subject in sorted(by_subject):
            recs = by_subject[subject]
            if len(recs) < 2:
                continue
            ds = {r.image_id: descriptors[r.image_id] for r in recs}
            pairs = pairwise_distances(ds, metric)
            observed = build_similarity_graph(pairs, quantile, WEIGHT_UNIT)
            obs_metrics = graph_metrics(
                observed, connectivity_pair_cap, child_seed(seed, "conn", cat, subject)
            )
            null_metrics = []
            n_edgeless = 0
            for k in range(null_seeds):
                null = geometric_null_graph(
                    observed.n_nodes,
                    seed=child_seed(seed, "geom-null", cat, subject, k),
                    distance_threshold=observed.threshold,
                )
                if null.n_edges == 0:
                    n_edgeless += 1
                    continue
                null_metrics.append(
                    graph_metrics(
                        null, connectivity_pair_cap, child_seed(seed, "conn-null", cat, subject, k)
                    )
                )
            entry = {
                "category": cat,
                "subject": subject,
                "n_nodes": observed.n_nodes,
                "n_edges": observed.n_edges,
                "threshold": observed.threshold,
                "observed": obs_metrics.to_dict(),
                "null_edgeless": n_edgeless,
                "n_null": len(null_metrics),
            }
            medians = {}
            for name in GRAPH_METRIC_NAMES:
                vals = [getattr(m, name) for m in null_metrics if getattr(m, name) is not None]
                medians[name] = float(np.median(vals)) if vals else None
            entry["null_median"] = medians
            graphs_out.append(entry)
            for name in GRAPH_METRIC_NAMES:
                value = getattr(obs_metrics, name)
                if value is not None:
                    ols_rows.append(
                        {
                            "response": value,
                            "distribution": "observed",
                            "category": cat,
                            "unit": subject,
                            "metric": name,
                        }
                    )
                if medians[name] is not None:
                    ols_rows.append(
                        {
                            "response": medians[name],
                            "distribution": "null",
                            "category": cat,
                            "unit": subject,
                            "metric": name,
                        }
                    )

    section: dict = {"quantile": quantile, "null_seeds": null_seeds, "graphs": graphs_out}
    section["ols"] = _per_metric_ols(ols_rows)
    return section


def _per_metric_ols(rows) -> dict:
    from lumpkit.stats import ols_fixed_effects

    out = {}
    for name in GRAPH_METRIC_NAMES:
        sub = [
            {k: r[k] for k in ("response", "distribution", "category", "unit")}
            for r in rows
            if r["metric"] == name
        ]
        if len(sub) < 4 or len({r["distribution"] for r in sub}) < 2:
            continue
        include_units = len({r["unit"] for r in sub}) >= 2
        include_cats = len({r["category"] for r in sub}) >= 2
        for row in sub:
            if not include_cats:
                row.pop("category")
        try:
            out[name] = ols_fixed_effects(sub, include_unit_dummies=include_units).to_dict()
        except ValidationError as exc:
            out[name] = {"error": str(exc)}
    return out


# ---------------------------------------------------------------------------
# dataset-vs-dataset structural comparison (Infant-like vs Uniform analogs)


@dataclass
class DatasetPairData:
    """Pooled pair distances of one dataset, tagged within/between category."""

    label: str
    values: np.ndarray
    within: np.ndarray
    per_category: dict[str, tuple[tuple[str, ...], np.ndarray]] = field(repr=False, default_factory=dict)

    @property
    def within_values(self) -> np.ndarray:
        return self.values[self.within]

    @property
    def between_values(self) -> np.ndarray:
        return self.values[~self.within]


def dataset_pair_data(
    corpus: Corpus, descriptors: dict[str, Descriptor], metric: str, label: str
) -> DatasetPairData:
    """All-pairs distances of a single-category-per-image dataset."""
    records = [rec for rec in corpus.records if rec.is_single_category()]
    if len(records) < 2:
        raise ValidationError(f"dataset {label!r} has fewer than 2 single-category images")
    ids = sorted(rec.image_id for rec in records)
    cat_of = {rec.image_id: rec.categories_in_view()[0] for rec in records}
    ds = {i: descriptors[i] for i in ids}
    id_tuple, matrix = pairwise_matrix(ds, metric)
    n = len(id_tuple)
    iu, ju = np.triu_indices(n, k=1)
    codes = np.asarray([hash(cat_of[i]) for i in id_tuple])
    cats = sorted({cat_of[i] for i in id_tuple})
    cat_idx = {c: k for k, c in enumerate(cats)}
    codes = np.asarray([cat_idx[cat_of[i]] for i in id_tuple])
    within = codes[iu] == codes[ju]
    per_category = {}
    for cat in cats:
        members = np.flatnonzero(codes == cat_idx[cat])
        sub_ids = tuple(id_tuple[m] for m in members)
        per_category[cat] = (sub_ids, matrix[np.ix_(members, members)])
    return DatasetPairData(label, matrix[iu, ju], within, per_category)


def compare_dataset_structure(
    data_a: DatasetPairData,
    data_b: DatasetPairData,
    metric: str,
    quantile: float = 0.05,
    entropy_spec: EntropySpec | None = None,
    permutation_spec: PermutationSpec | None = None,
    connectivity_pair_cap: int | None = 2000,
    seed: int = 0,
    unit: str = "(all)",
) -> dict:
    """One condition pair: entropy, mean within-similarity, ratio (+ permutation),
    and shared-threshold graph metrics per category."""
    entropy_spec = entropy_spec or default_entropy_spec(metric)
    wa, wb = data_a.within_values, data_b.within_values
    section: dict = {
        "labels": [data_a.label, data_b.label],
        "entropy": {
            data_a.label: binned_entropy(wa, entropy_spec),
            data_b.label: binned_entropy(wb, entropy_spec),
        },
        "mean_within_distance": {
            data_a.label: float(wa.mean()),
            data_b.label: float(wb.mean()),
        },
        "wilcoxon_within": wilcoxon_rank_sum(wa, wb).to_dict(),
        "welch_within": welch_t(wa, wb).to_dict(),
    }
    section["relative_mean_within_difference"] = float(
        (wa.mean() - wb.mean()) / wb.mean()
    )
    section["ratio"] = {
        data_a.label: _safe_ratio((data_a.values, data_a.within), "mean"),
        data_b.label: _safe_ratio((data_b.values, data_b.within), "mean"),
    }
    if permutation_spec is not None:
        section["ratio_permutation"] = permutation_test(
            (data_a.values, data_a.within),
            (data_b.values, data_b.within),
            ratio_statistic("mean"),
            permutation_spec,
        ).to_dict()

    graph_rows = []
    per_category = {}
    for cat in sorted(set(data_a.per_category) & set(data_b.per_category)):
        ids_a, mat_a = data_a.per_category[cat]
        ids_b, mat_b = data_b.per_category[cat]
        tri_a = mat_a[np.triu_indices(len(ids_a), k=1)]
        tri_b = mat_b[np.triu_indices(len(ids_b), k=1)]
        pooled = np.concatenate([tri_a, tri_b])
        k = max(1, int(np.ceil(quantile * pooled.size)))
        threshold = float(np.partition(pooled, k - 1)[k - 1])
        cat_entry = {"threshold": threshold}
        for label, ids, mat in ((data_a.label, ids_a, mat_a), (data_b.label, ids_b, mat_b)):
            pairs = pair_set_from_matrix(ids, mat, metric)
            graph = build_similarity_graph_at_threshold(pairs, threshold, WEIGHT_DISTANCE)
            metrics = graph_metrics(
                graph, connectivity_pair_cap, child_seed(seed, "conn", unit, cat, label)
            )
            cat_entry[label] = metrics.to_dict()
            for name in GRAPH_METRIC_NAMES:
                value = getattr(metrics, name)
                if value is not None:
                    graph_rows.append(
                        {
                            "response": value,
                            "distribution": label,
                            "category": cat,
                            "unit": unit,
                            "metric": name,
                        }
                    )
        per_category[cat] = cat_entry
    section["graphs_per_category"] = per_category
    section["graph_rows"] = graph_rows
    return section


def structural_suite(
    pairs_by_kind: dict[str, tuple[DatasetPairData, DatasetPairData]],
    metric: str,
    quantile: float = 0.05,
    permutations: int = 999,
    subsample: float = 0.20,
    permutation_kind: str | None = None,
    entropy_spec: EntropySpec | None = None,
    connectivity_pair_cap: int | None = 2000,
    seed: int = 0,
) -> dict:
    """Multi-view-kind structural comparison with one pooled fixed-effects model.

    The ratio permutation test runs on `permutation_kind` (default: the first
    kind); other kinds report their ratios without their own permutation run.
    """
    kinds = sorted(pairs_by_kind)
    if permutation_kind is None:
        permutation_kind = kinds[0]
    sections = {}
    all_rows = []
    for kind in kinds:
        data_a, data_b = pairs_by_kind[kind]
        spec = (
            PermutationSpec(permutations, subsample, child_seed(seed, "ratio-perm", kind))
            if kind == permutation_kind
            else None
        )
        sub = compare_dataset_structure(
            data_a,
            data_b,
            metric,
            quantile=quantile,
            entropy_spec=entropy_spec,
            permutation_spec=spec,
            connectivity_pair_cap=connectivity_pair_cap,
            seed=child_seed(seed, "graphs", kind),
            unit=kind,
        )
        all_rows.extend(sub.pop("graph_rows"))
        sections[kind] = sub
    return {
        "per_kind": sections,
        "permutation_kind": permutation_kind,
        "graph_ols": _per_metric_ols(all_rows),
    }
