"""End-to-end synthetic corpus generation: pools, plans, manifests, image files.

The reference corpus mirrors the multi-view construction: per category, eight
seeded instances (A..H), the last two held out for testing; per view kind, one
shared orientation pool per instance; training datasets realize a Uniform or
Infant-like plan over those pools; the test set renders the held-out instances
once and is byte-identical across all conditions.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from lumpkit._rng import child_seed
from lumpkit.errors import ValidationError
from lumpkit.ingest import Annotation, ImageRecord, write_manifest
from lumpkit.sampler import (
    PLAN_INFANT_LIKE,
    PLAN_UNIFORM,
    VIEW_KINDS,
    VIEW_RANDOM,
    DatasetPlan,
    ViewPlan,
    infantlike_plan,
    realize_plan,
    uniform_plan,
    view_plan,
)
from lumpkit.synthgen.models import categories as template_categories
from lumpkit.synthgen.models import make_instance
from lumpkit.synthgen.render import RenderConfig, render_view

TEST_EVENT = "test"
TRAIN_EVENT = "train"
SYNTH_SUBJECT = "synthetic"


@dataclass(frozen=True)
class SynthConfig:
    categories: tuple[str, ...] = ()
    instances_per_category: int = 8
    train_instances: int = 6
    views_per_instance: int = 600
    test_views_per_instance: int = 300
    total_train: int = 3600
    rank1_share: float = 0.35
    image_size: int = 128
    master_seed: int = 0
    view_kinds: tuple[str, ...] = VIEW_KINDS
    distributions: tuple[str, ...] = (PLAN_UNIFORM, PLAN_INFANT_LIKE)
    jobs: int = 1

    def resolved_categories(self) -> tuple[str, ...]:
        return self.categories or template_categories()

    def render_config(self) -> RenderConfig:
        return RenderConfig(image_size=self.image_size)


@dataclass
class SynthResult:
    out_dir: Path
    manifest_paths: dict[str, Path]  # condition name (or "test") -> manifest file
    plans: dict[str, DatasetPlan] = field(default_factory=dict)
    n_images: int = 0


def instance_letter(index: int) -> str:
    return chr(ord("A") + index)


def _render_jobs(jobs: int, tasks):
    """Run render closures preserving task order regardless of worker count."""
    if jobs <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [f.result() for f in futures]


def _save_png(image: np.ndarray, path: Path) -> None:
    from PIL import Image

    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(image).save(path, format="PNG", compress_level=6)


def _pool_record(category, instance, kind, view_idx, rel_path) -> ImageRecord:
    image_id = f"{kind}/{category}/{instance}/v{view_idx:04d}"
    return ImageRecord(
        image_id=image_id,
        path=rel_path,
        subject=SYNTH_SUBJECT,
        event=TRAIN_EVENT,
        annotations=(Annotation(category, 1, instance),),
    )


def render_instance_pool(
    out_dir: Path,
    category: str,
    instance: str,
    instance_seed: int,
    plan: ViewPlan,
    kind: str,
    render_config: RenderConfig,
    jobs: int = 1,
) -> list[ImageRecord]:
    """Render one instance's full view pool to PNG files; returns pool records."""
    model = make_instance(category, instance_seed)
    rel_dir = Path("pool") / kind / f"{category}_{instance}"

    def make_task(idx: int, orientation):
        def task():
            image = render_view(model, orientation, render_config)
            rel_path = rel_dir / f"v{idx:04d}.png"
            _save_png(image, out_dir / rel_path)
            return _pool_record(category, instance, kind, idx, str(rel_path))

        return task

    tasks = [make_task(i, o) for i, o in enumerate(plan.orientations)]
    return _render_jobs(jobs, tasks)


def generate_reference_corpus(out_dir, config: SynthConfig = SynthConfig()) -> SynthResult:
    """Write the full multi-condition corpus: pools, per-condition train manifests,
    and one shared test manifest.

    Condition names are `{distribution}-{view kind}`; the same pool images back
    both distributions of a view kind, so manifests share image files.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cats = config.resolved_categories()
    if config.train_instances >= config.instances_per_category:
        raise ValidationError("need at least one held-out instance per category")
    render_config = config.render_config()
    train_letters = [instance_letter(i) for i in range(config.train_instances)]
    held_letters = [
        instance_letter(i) for i in range(config.train_instances, config.instances_per_category)
    ]

    result = SynthResult(out_dir=out_dir, manifest_paths={})

    # Training pools and realized datasets per view kind.
    pool_records: dict[str, dict[tuple[str, str], list[ImageRecord]]] = {}
    for kind in config.view_kinds:
        vplan = view_plan(kind, config.views_per_instance, seed=child_seed(config.master_seed, "views", kind))
        pools: dict[tuple[str, str], list[ImageRecord]] = {}
        for category in cats:
            for idx, instance in enumerate(train_letters):
                records = render_instance_pool(
                    out_dir, category, instance, idx, vplan, kind, render_config, config.jobs
                )
                pools[(category, instance)] = records
                result.n_images += len(records)
        pool_records[kind] = pools

    plans: dict[str, DatasetPlan] = {}
    for dist in config.distributions:
        if dist == PLAN_UNIFORM:
            plans[dist] = uniform_plan(cats, config.train_instances, config.total_train,
                                       instance_ids=train_letters)
        elif dist == PLAN_INFANT_LIKE:
            plans[dist] = infantlike_plan(
                cats,
                config.train_instances,
                config.total_train,
                rank1_share=config.rank1_share,
                seed=child_seed(config.master_seed, "rank1"),
                instance_ids=train_letters,
            )
        else:
            raise ValidationError(f"unknown distribution {dist!r}")
    result.plans = plans

    for kind in config.view_kinds:
        pools = pool_records[kind]
        pool_ids = {key: [rec.image_id for rec in recs] for key, recs in pools.items()}
        by_id = {rec.image_id: rec for recs in pools.values() for rec in recs}
        for dist, plan in plans.items():
            sampled = realize_plan(
                plan, pool_ids, seed=child_seed(config.master_seed, "realize", dist, kind)
            )
            records = [by_id[i] for i in sampled.image_ids()]
            name = f"{dist}-{kind}"
            manifest_path = out_dir / f"{name}.jsonl"
            write_manifest(records, manifest_path)
            result.manifest_paths[name] = manifest_path

    # Shared test set: held-out instances, random views, identical across conditions.
    test_plan = view_plan(
        VIEW_RANDOM, config.test_views_per_instance, seed=child_seed(config.master_seed, "test-views")
    )
    test_records: list[ImageRecord] = []
    for category in cats:
        for offset, instance in enumerate(held_letters):
            seed_idx = config.train_instances + offset
            model = make_instance(category, seed_idx)
            rel_dir = Path("test") / f"{category}_{instance}"

            def make_task(idx: int, orientation, model=model, rel_dir=rel_dir,
                          category=category, instance=instance):
                def task():
                    image = render_view(model, orientation, render_config)
                    rel_path = rel_dir / f"v{idx:04d}.png"
                    _save_png(image, out_dir / rel_path)
                    return ImageRecord(
                        image_id=f"test/{category}/{instance}/v{idx:04d}",
                        path=str(rel_path),
                        subject=SYNTH_SUBJECT,
                        event=TEST_EVENT,
                        annotations=(Annotation(category, 1, instance),),
                    )

                return task

            tasks = [make_task(i, o) for i, o in enumerate(test_plan.orientations)]
            test_records.extend(_render_jobs(config.jobs, tasks))
            result.n_images += len(tasks)
    test_path = out_dir / "test.jsonl"
    write_manifest(test_records, test_path)
    result.manifest_paths["test"] = test_path
    return result
