"""Comparison-type structure of pair distances: tags, ratios, entropy, and the
instance-balanced null sample.

Everything here standardizes on distances (lower = more similar). The
within/between ratio is M_within / M_between on distances, so a LOWER ratio is
better; reports should state this sign convention since similarity-space
phrasing flips it.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from lumpkit._rng import substream
from lumpkit.distances import PairDistanceSet
from lumpkit.errors import (
    DegenerateStatisticError,
    EmptySampleError,
    ValidationError,
)
from lumpkit.ingest import Corpus, ImageRecord

RANK_TAG_R1R1 = "R1R1"
RANK_TAG_R1O = "R1O"
RANK_TAG_OO = "OO"
CAT_WITHIN = "within"
CAT_BETWEEN = "between"

_RANK_CODES = {0: RANK_TAG_R1R1, 1: RANK_TAG_R1O, 2: RANK_TAG_OO}
_CAT_CODES = {0: CAT_WITHIN, 1: CAT_BETWEEN}


@dataclass(frozen=True)
class EntropySpec:
    lo: float = 0.0
    hi: float = 1.04
    bins: int = 100
    log_base: float = 2.0

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValidationError("entropy range must satisfy lo < hi")
        if self.bins < 2:
            raise ValidationError("need at least 2 entropy bins")
        if self.log_base not in (2.0, math.e):
            raise ValidationError("log_base must be 2 or e")


@dataclass(frozen=True)
class TaggedPair:
    i: str
    j: str
    distance: float
    rank_tag: str | None
    cat_tag: str | None


@dataclass(frozen=True)
class TaggedPairSet:
    """Column-oriented tags aligned with a PairDistanceSet.

    rank codes: 0=R1R1, 1=R1O, 2=OO, -1 undefined; cat codes: 0=within,
    1=between, -1 undefined (a side is not a single-category frame).
    """

    pairs: PairDistanceSet
    rank_codes: np.ndarray
    cat_codes: np.ndarray

    def __iter__(self):
        for k, (i, j, d) in enumerate(self.pairs.entries()):
            yield TaggedPair(
                i,
                j,
                d,
                _RANK_CODES.get(int(self.rank_codes[k])),
                _CAT_CODES.get(int(self.cat_codes[k])),
            )

    def distances_for_rank_tag(self, tag: str) -> np.ndarray:
        code = {v: k for k, v in _RANK_CODES.items()}[tag]
        return self.pairs.distances[self.rank_codes == code]

    def distances_for_cat_tag(self, tag: str) -> np.ndarray:
        code = {v: k for k, v in _CAT_CODES.items()}[tag]
        return self.pairs.distances[self.cat_codes == code]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["i", "j", "distance", "rank_tag", "cat_tag"])
            for tp in self:
                writer.writerow(
                    [tp.i, tp.j, repr(tp.distance), tp.rank_tag or "", tp.cat_tag or ""]
                )


def tag_pairs(
    pairs: PairDistanceSet,
    corpus: Corpus,
    category: str | None = None,
    ranks: dict | None = None,
) -> TaggedPairSet:
    """Attach comparison-type tags to every pair.

    With `category` and `ranks` (freqstats.instance_ranks output, across-corpus
    scope), pairs are rank-tagged by whether each side shows the subject's
    rank-1 instance; every image must then carry an instance ID for the
    category. Category tags (within/between) are defined only when both sides
    are single-category frames.
    """
    if (category is None) != (ranks is None):
        raise ValidationError("category and ranks must be given together")
    n = pairs.n_images
    single_cat = np.zeros(n, dtype=bool)
    cat_of = np.full(n, -1, dtype=np.int64)
    cat_index: dict[str, int] = {}
    is_r1 = np.zeros(n, dtype=bool)
    referenced = np.zeros(n, dtype=bool)
    referenced[pairs.i_indices] = True
    referenced[pairs.j_indices] = True
    for idx, image_id in enumerate(pairs.image_ids):
        if not referenced[idx]:
            continue
        rec = corpus.record(image_id)
        in_view = rec.categories_in_view()
        if len(in_view) == 1:
            single_cat[idx] = True
            cat_of[idx] = cat_index.setdefault(in_view[0], len(cat_index))
        if category is not None:
            ann = rec.annotation_for(category)
            if ann is None or ann.instance_id is None:
                raise ValidationError(
                    f"image {image_id!r} lacks an identified {category!r} instance; "
                    "filter upstream before tagging"
                )
            subject_ranks = ranks.get(rec.subject)
            if subject_ranks is None:
                raise ValidationError(f"no ranks for subject {rec.subject!r}")
            is_r1[idx] = subject_ranks.get(ann.instance_id) == 1
    iu, ju = pairs.i_indices, pairs.j_indices
    if category is not None:
        r1_count = is_r1[iu].astype(np.int64) + is_r1[ju].astype(np.int64)
        rank_codes = np.where(r1_count == 2, 0, np.where(r1_count == 1, 1, 2))
    else:
        rank_codes = np.full(pairs.n_pairs, -1, dtype=np.int64)
    both_single = single_cat[iu] & single_cat[ju]
    same_cat = cat_of[iu] == cat_of[ju]
    cat_codes = np.where(both_single, np.where(same_cat, 0, 1), -1)
    return TaggedPairSet(pairs, rank_codes.astype(np.int64), cat_codes.astype(np.int64))


def similarity_ratio_from_values(within, between, statistic: str = "mean") -> float:
    within = np.asarray(within, dtype=np.float64)
    between = np.asarray(between, dtype=np.float64)
    if within.size == 0 or between.size == 0:
        raise ValidationError("need at least one within and one between pair")
    if statistic == "mean":
        mw, mb = float(within.mean()), float(between.mean())
    elif statistic == "median":
        mw, mb = float(np.median(within)), float(np.median(between))
    else:
        raise ValidationError(f"unknown statistic {statistic!r}")
    if mb == 0.0:
        raise DegenerateStatisticError("between-category aggregate is zero")
    return mw / mb


def similarity_ratio(tagged: TaggedPairSet, statistic: str = "mean") -> float:
    """M_within / M_between over distances; lower is better by construction."""
    return similarity_ratio_from_values(
        tagged.distances_for_cat_tag(CAT_WITHIN),
        tagged.distances_for_cat_tag(CAT_BETWEEN),
        statistic,
    )


def binned_entropy(values, spec: EntropySpec = EntropySpec()) -> float:
    """Shannon entropy of the bin-occupancy distribution over [lo, hi].

    Values exactly at hi land in the last bin; values outside the range raise
    (no silent clipping). Empty bins contribute zero.
    """
    vals = np.asarray(values, dtype=np.float64)
    if vals.size == 0:
        raise ValidationError("binned_entropy needs at least one value")
    if float(vals.min()) < spec.lo or float(vals.max()) > spec.hi:
        raise ValidationError(
            f"values outside entropy range [{spec.lo}, {spec.hi}]: "
            f"[{vals.min()}, {vals.max()}]"
        )
    width = spec.hi - spec.lo
    idx = np.floor((vals - spec.lo) * spec.bins / width).astype(np.int64)
    np.clip(idx, 0, spec.bins - 1, out=idx)  # right-closed final bin
    counts = np.bincount(idx, minlength=spec.bins)
    p = counts[counts > 0] / vals.size
    return float(-(p * (np.log(p) / math.log(spec.log_base))).sum())


def null_similarity_sample(
    corpus: Corpus,
    category: str,
    min_images_per_instance: int = 5,
    min_subject_images: int = 10,
    seed: int = 0,
) -> list[ImageRecord]:
    """Instance-balanced null image sample for one category.

    Per subject: keep instances with at least `min_images_per_instance` images,
    sample the minimum qualifying instance size from each (without
    replacement), and drop subjects left with fewer than `min_subject_images`.
    Then equalize across subjects by sampling the smallest subject's count from
    each. Deterministic given the seed.
    """
    corpus.require_category(category)
    by_subject: dict[str, dict[str, list[ImageRecord]]] = defaultdict(lambda: defaultdict(list))
    for rec in corpus.records:
        ann = rec.annotation_for(category)
        if ann is not None and ann.instance_id is not None:
            by_subject[rec.subject][ann.instance_id].append(rec)

    surviving: dict[str, list[ImageRecord]] = {}
    for subject in sorted(by_subject):
        instances = {
            inst: recs
            for inst, recs in by_subject[subject].items()
            if len(recs) >= min_images_per_instance
        }
        if not instances:
            continue
        take = min(len(recs) for recs in instances.values())
        picked: list[ImageRecord] = []
        for inst in sorted(instances):
            recs = sorted(instances[inst], key=lambda r: r.image_id)
            rng = substream(seed, "null-similarity", category, subject, inst)
            idx = np.sort(rng.choice(len(recs), size=take, replace=False))
            picked.extend(recs[i] for i in idx)
        if len(picked) < min_subject_images:
            continue
        surviving[subject] = picked

    if not surviving:
        raise EmptySampleError(f"no qualifying subjects for null sample of {category!r}")
    n_min = min(len(recs) for recs in surviving.values())
    out: list[ImageRecord] = []
    for subject in sorted(surviving):
        recs = sorted(surviving[subject], key=lambda r: r.image_id)
        rng = substream(seed, "null-similarity-equalize", category, subject)
        idx = np.sort(rng.choice(len(recs), size=n_min, replace=False))
        out.extend(recs[i] for i in idx)
    return out
