"""Uniform and Infant-like dataset plans, view plans, and plan realization.

A DatasetPlan fixes per-instance image counts for each category; a ViewPlan
fixes the object orientations (intrinsic Z-Y-X Euler angles, degrees) shared by
every instance. Plans are realized by sampling without replacement from
per-instance image pools.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from lumpkit._rng import substream
from lumpkit.errors import EmptySampleError, ValidationError

PLAN_UNIFORM = "uniform"
PLAN_INFANT_LIKE = "infant-like"

VIEW_RANDOM = "random"
VIEW_BIASED = "biased"
VIEW_ANTI_BIASED = "anti-biased"
VIEW_KINDS = (VIEW_RANDOM, VIEW_BIASED, VIEW_ANTI_BIASED)

# The six cube-face ("planar") orientations, and six corner views maximally far
# from them; 35.264 deg = atan(1/sqrt(2)).
PLANAR_ANCHORS = (
    (0.0, 0.0, 0.0),
    (90.0, 0.0, 0.0),
    (180.0, 0.0, 0.0),
    (-90.0, 0.0, 0.0),
    (0.0, 90.0, 0.0),
    (0.0, -90.0, 0.0),
)
CORNER_ANCHORS = (
    (45.0, 35.264, 0.0),
    (-45.0, 35.264, 0.0),
    (45.0, -35.264, 0.0),
    (-45.0, -35.264, 0.0),
    (135.0, 35.264, 0.0),
    (135.0, -35.264, 0.0),
)
PERTURBATION_DEG = 15.0


@dataclass(frozen=True)
class CategoryPlan:
    instances: tuple[str, ...]
    counts: dict[str, int]
    rank1: str

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class DatasetPlan:
    kind: str
    per_category: dict[str, CategoryPlan]
    total: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "total": self.total,
            "per_category": {
                cat: {"instances": list(p.instances), "counts": p.counts, "rank1": p.rank1}
                for cat, p in self.per_category.items()
            },
        }


@dataclass(frozen=True)
class ViewPlan:
    kind: str
    orientations: np.ndarray  # (n, 3) degrees in [-180, 180]
    shared_across_instances: bool = True

    @property
    def n_views(self) -> int:
        return int(self.orientations.shape[0])


@dataclass(frozen=True)
class SampledDataset:
    plan: DatasetPlan
    images: dict[tuple[str, str], tuple[str, ...]]  # (category, instance) -> image ids

    def image_ids(self) -> list[str]:
        out = []
        for key in sorted(self.images):
            out.extend(self.images[key])
        return out

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.images.values())


def _default_instances(k: int) -> tuple[str, ...]:
    if k > 26:
        raise ValidationError("at most 26 default instance letters")
    return tuple(chr(ord("A") + i) for i in range(k))


def _split_with_remainder(total: int, instances: Sequence[str]) -> dict[str, int]:
    base, rem = divmod(total, len(instances))
    if base < 1:
        raise ValidationError(f"{total} images cannot give every one of {len(instances)} instances a positive count")
    return {inst: base + (1 if i < rem else 0) for i, inst in enumerate(instances)}


def uniform_plan(
    categories: Sequence[str],
    instances_per_category: int = 6,
    total: int = 3600,
    instance_ids: Sequence[str] | None = None,
) -> DatasetPlan:
    """Equal counts per instance; any remainder goes to the lowest-index instances."""
    categories = tuple(categories)
    if not categories:
        raise ValidationError("need at least one category")
    if total % len(categories) != 0:
        raise ValidationError(f"total {total} not divisible by {len(categories)} categories")
    per_cat_total = total // len(categories)
    instances = (
        tuple(instance_ids) if instance_ids is not None else _default_instances(instances_per_category)
    )
    if len(instances) != instances_per_category:
        raise ValidationError("instance_ids length must match instances_per_category")
    per_category = {}
    for cat in categories:
        counts = _split_with_remainder(per_cat_total, instances)
        per_category[cat] = CategoryPlan(instances, counts, rank1=instances[0])
    return DatasetPlan(PLAN_UNIFORM, per_category, total)


def infantlike_plan(
    categories: Sequence[str],
    instances_per_category: int = 6,
    total: int = 3600,
    rank1_share: float = 0.35,
    seed: int = 0,
    rank1_ids: Mapping[str, str] | None = None,
    instance_ids: Sequence[str] | None = None,
) -> DatasetPlan:
    """Skewed counts: the rank-1 instance takes round(share * per-category total),
    the remainder splits equally over the others.

    The rank-1 instance is chosen at random per category unless `rank1_ids`
    pins it. Shares at or below the uniform share are rejected: that would not
    be an Infant-like plan.
    """
    categories = tuple(categories)
    if not categories:
        raise ValidationError("need at least one category")
    if total % len(categories) != 0:
        raise ValidationError(f"total {total} not divisible by {len(categories)} categories")
    k = instances_per_category
    if k < 2:
        raise ValidationError("need at least 2 instances per category")
    if not (rank1_share < 1.0):
        raise ValidationError("rank1_share must be < 1")
    if rank1_share <= 1.0 / k:
        raise ValidationError(
            f"rank1_share {rank1_share} does not exceed the uniform share {1.0 / k:.4f}"
        )
    per_cat_total = total // len(categories)
    instances = tuple(instance_ids) if instance_ids is not None else _default_instances(k)
    if len(instances) != k:
        raise ValidationError("instance_ids length must match instances_per_category")
    per_category = {}
    for cat in categories:
        if rank1_ids is not None:
            rank1 = rank1_ids[cat]
            if rank1 not in instances:
                raise ValidationError(f"rank1 instance {rank1!r} not in instance list")
        else:
            rng = substream(seed, "rank1-choice", cat)
            rank1 = instances[int(rng.integers(0, k))]
        rank1_count = int(round(rank1_share * per_cat_total))
        others = [i for i in instances if i != rank1]
        counts = _split_with_remainder(per_cat_total - rank1_count, others)
        counts[rank1] = rank1_count
        per_category[cat] = CategoryPlan(instances, {i: counts[i] for i in instances}, rank1)
    return DatasetPlan(PLAN_INFANT_LIKE, per_category, total)


def _wrap_degrees(angles: np.ndarray) -> np.ndarray:
    return (angles + 180.0) % 360.0 - 180.0


def view_plan(kind: str, n_views: int = 600, seed: int = 0) -> ViewPlan:
    """Orientation set shared by all instances.

    random: n iid uniform Euler triples in [-180, 180].
    biased: the six planar anchors, each perturbed uniformly within +-15 deg per
    axis; anti-biased: the same around the six corner anchors. n mod 6 extra
    views go to the lowest-index anchors.
    """
    if n_views < 1:
        raise ValidationError("n_views must be >= 1")
    if kind == VIEW_RANDOM:
        rng = substream(seed, "views", kind)
        orientations = rng.uniform(-180.0, 180.0, size=(n_views, 3))
    elif kind in (VIEW_BIASED, VIEW_ANTI_BIASED):
        anchors = PLANAR_ANCHORS if kind == VIEW_BIASED else CORNER_ANCHORS
        base, rem = divmod(n_views, len(anchors))
        chunks = []
        for idx, anchor in enumerate(anchors):
            n_here = base + (1 if idx < rem else 0)
            if n_here == 0:
                continue
            rng = substream(seed, "views", kind, idx)
            jitter = rng.uniform(-PERTURBATION_DEG, PERTURBATION_DEG, size=(n_here, 3))
            chunks.append(_wrap_degrees(np.asarray(anchor) + jitter))
        orientations = np.concatenate(chunks, axis=0)
    else:
        raise ValidationError(f"unknown view kind {kind!r}")
    orientations.setflags(write=False)
    return ViewPlan(kind, orientations)


def realize_plan(
    plan: DatasetPlan,
    pool: Mapping[tuple[str, str], Sequence[str]],
    seed: int = 0,
    held_out: frozenset = frozenset(),
) -> SampledDataset:
    """Sample the planned count per instance, without replacement, from its pool."""
    images: dict[tuple[str, str], tuple[str, ...]] = {}
    for cat in sorted(plan.per_category):
        cplan = plan.per_category[cat]
        for inst in cplan.instances:
            want = cplan.counts[inst]
            if (cat, inst) in held_out:
                raise ValidationError(f"instance ({cat}, {inst}) is held out for testing")
            available = list(pool.get((cat, inst), ()))
            if len(available) < want:
                raise EmptySampleError(
                    f"pool underflow for ({cat}, {inst}): need {want}, have {len(available)}"
                )
            rng = substream(seed, "realize", cat, inst)
            picks = rng.choice(len(available), size=want, replace=False)
            images[(cat, inst)] = tuple(available[i] for i in np.sort(picks))
    return SampledDataset(plan, images)
