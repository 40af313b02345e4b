"""Manifest parsing, image loading, and the inclusion/exclusion rules applied before analysis.

A corpus manifest is line-delimited JSON, one record per line:

    {"image_id": str, "path": str, "subject": str, "event": str,
     "annotations": [{"category": str, "count": int, "instance_id": str|null}]}

Paths are relative to a declared corpus root. Instance IDs exist only for
annotations with 1 <= count <= 3; coders do not assign unique IDs when four or
more instances are in view, and such frames are excluded from any analysis that
needs pairwise identity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from lumpkit.errors import ImageLoadError, ManifestError, ValidationError

SCOPE_CATEGORY = "category"
SCOPE_SUBJECT = "subject"

_MANIFEST_FIELDS = ("image_id", "path", "subject", "event", "annotations")


@dataclass(frozen=True)
class Annotation:
    category: str
    count: int
    instance_id: str | None = None


@dataclass(frozen=True)
class ImageRecord:
    """One frame: pixel source plus per-category instance annotations."""

    image_id: str
    path: str
    subject: str
    event: str
    annotations: tuple[Annotation, ...]

    def annotation_for(self, category: str) -> Annotation | None:
        for ann in self.annotations:
            if ann.category == category:
                return ann
        return None

    def categories_in_view(self) -> tuple[str, ...]:
        """Categories annotated with at least one instance present."""
        return tuple(a.category for a in self.annotations if a.count >= 1)

    def is_single_category(self) -> bool:
        return len(self.categories_in_view()) == 1

    def to_json(self) -> str:
        obj = {
            "image_id": self.image_id,
            "path": self.path,
            "subject": self.subject,
            "event": self.event,
            "annotations": [
                {"category": a.category, "count": a.count, "instance_id": a.instance_id}
                for a in self.annotations
            ],
        }
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Corpus:
    records: tuple[ImageRecord, ...]
    subjects: frozenset[str]
    categories: frozenset[str]
    root: str = "."
    _by_id: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_records(cls, records: Iterable[ImageRecord], root: str = ".") -> "Corpus":
        records = tuple(records)
        by_id: dict[str, ImageRecord] = {}
        for rec in records:
            if rec.image_id in by_id:
                raise ValidationError(f"duplicate image_id {rec.image_id!r}")
            by_id[rec.image_id] = rec
        subjects = frozenset(r.subject for r in records)
        categories = frozenset(a.category for r in records for a in r.annotations)
        return cls(records, subjects, categories, root, by_id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ImageRecord]:
        return iter(self.records)

    def record(self, image_id: str) -> ImageRecord:
        try:
            return self._by_id[image_id]
        except KeyError:
            raise ValidationError(f"unknown image_id {image_id!r}") from None

    def require_category(self, category: str) -> None:
        if category not in self.categories:
            raise ValidationError(f"unknown category {category!r}")

    def records_with_category(self, category: str) -> list[ImageRecord]:
        """Records annotating `category` with at least one instance present."""
        self.require_category(category)
        out = []
        for rec in self.records:
            ann = rec.annotation_for(category)
            if ann is not None and ann.count >= 1:
                out.append(rec)
        return out

    def image_path(self, rec: ImageRecord) -> Path:
        return Path(self.root) / rec.path

    def restricted(self, records: Iterable[ImageRecord]) -> "Corpus":
        """New corpus over a subset of this corpus's records (same root)."""
        return Corpus.from_records(records, root=self.root)


def _parse_annotation(obj, line: int) -> Annotation:
    if not isinstance(obj, dict):
        raise ManifestError("annotation must be an object", line)
    for key in ("category", "count"):
        if key not in obj:
            raise ManifestError(f"annotation missing {key!r}", line)
    category = obj["category"]
    count = obj["count"]
    instance_id = obj.get("instance_id")
    if not isinstance(category, str) or not category:
        raise ManifestError("annotation category must be a non-empty string", line)
    if not isinstance(count, int) or isinstance(count, bool) or count < 0:
        raise ManifestError(f"annotation count must be an integer >= 0, got {count!r}", line)
    if instance_id is not None and not isinstance(instance_id, str):
        raise ManifestError("instance_id must be a string or null", line)
    if instance_id is not None and not (1 <= count <= 3):
        raise ManifestError(
            f"instance_id {instance_id!r} with count {count}: unique IDs exist only for counts 1-3",
            line,
        )
    return Annotation(category, count, instance_id)


def parse_manifest(text: str, root: str = ".") -> Corpus:
    """Parse a line-delimited JSON manifest into a validated Corpus.

    Counts >= 4 are admitted, flagged by their missing instance_id; an explicit
    instance_id on such a line is a validation error.
    """
    records: list[ImageRecord] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"invalid JSON ({exc.msg})", lineno) from exc
        if not isinstance(obj, dict):
            raise ManifestError("record must be a JSON object", lineno)
        missing = [k for k in _MANIFEST_FIELDS if k not in obj]
        if missing:
            raise ManifestError(f"missing fields: {', '.join(missing)}", lineno)
        for key in ("image_id", "path", "subject", "event"):
            if not isinstance(obj[key], str) or not obj[key]:
                raise ManifestError(f"{key} must be a non-empty string", lineno)
        if not isinstance(obj["annotations"], list):
            raise ManifestError("annotations must be a list", lineno)
        image_id = obj["image_id"]
        if image_id in seen:
            raise ManifestError(f"duplicate image_id {image_id!r}", lineno)
        seen.add(image_id)
        annotations = tuple(_parse_annotation(a, lineno) for a in obj["annotations"])
        categories = [a.category for a in annotations]
        if len(set(categories)) != len(categories):
            raise ManifestError("duplicate category within one record", lineno)
        records.append(ImageRecord(image_id, obj["path"], obj["subject"], obj["event"], annotations))
    return Corpus.from_records(records, root=root)


def load_manifest(path, root: str | None = None) -> Corpus:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_manifest(text, root=str(path.parent) if root is None else root)


def write_manifest(corpus_or_records, path=None) -> str:
    """Serialize records to manifest text; optionally write it to `path`."""
    records = list(corpus_or_records)
    text = "\n".join(rec.to_json() for rec in records)
    if records:
        text += "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def load_image(path) -> np.ndarray:
    """Load a PNG/JPEG file as an (H, W, 3) uint8 RGB raster."""
    from PIL import Image, UnidentifiedImageError

    path = Path(path)
    if not path.exists():
        raise ImageLoadError(path, "no such file")
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise ImageLoadError(path, "not a decodable image") from exc
    except OSError as exc:
        raise ImageLoadError(path, f"decode failed: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ImageLoadError(path, f"unexpected raster shape {arr.shape}")
    return arr


def filter_for_pairwise(
    corpus: Corpus,
    category: str,
    min_subject_images: int = 10,
    scope: str = SCOPE_CATEGORY,
) -> list[ImageRecord]:
    """Records of `category` eligible for pairwise analysis.

    Drops frames without a unique instance ID for the category (count >= 4, or
    uncoded), then drops every record of subjects whose surviving image count is
    below `min_subject_images`. The tally scope is per (subject, category) by
    default; `scope="subject"` counts a subject's identified records across all
    categories, the grouping used when within- and between-category pairs are
    mixed.
    """
    if min_subject_images < 1:
        raise ValidationError("min_subject_images must be >= 1")
    if scope not in (SCOPE_CATEGORY, SCOPE_SUBJECT):
        raise ValidationError(f"unknown scope {scope!r}")
    corpus.require_category(category)

    eligible = [
        rec
        for rec in corpus.records
        if (ann := rec.annotation_for(category)) is not None and ann.instance_id is not None
    ]
    tallies: dict[str, int] = {}
    if scope == SCOPE_CATEGORY:
        for rec in eligible:
            tallies[rec.subject] = tallies.get(rec.subject, 0) + 1
    else:
        for rec in corpus.records:
            if any(a.instance_id is not None for a in rec.annotations):
                tallies[rec.subject] = tallies.get(rec.subject, 0) + 1
    keep = {s for s, n in tallies.items() if n >= min_subject_images}
    return [rec for rec in eligible if rec.subject in keep]


def single_category_corpus(corpus: Corpus) -> Corpus:
    """Corpus restricted to frames with exactly one category in view."""
    return corpus.restricted(rec for rec in corpus.records if rec.is_single_category())
