"""Category templates and seeded instance models.

Each category is a hand-authored assembly of primitives (see templates.json;
dims are box half-extents, cylinder (r, r, half-height) with axis +z, or
ellipsoid semi-axes). An instance jitters every part dimension by +-20% and
rotates the assembly's hue, so two instances of a category share a silhouette
family but differ in proportions and brightness. Equal (category, instance_seed)
always yields an identical model.
"""

from __future__ import annotations

import colorsys
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from lumpkit._rng import substream
from lumpkit.errors import ValidationError

PRIMITIVES = ("box", "cylinder", "ellipsoid")
DIMENSION_JITTER = 0.2
HUE_JITTER = 0.25  # turns


@dataclass(frozen=True)
class Part:
    primitive: str
    dims: tuple[float, float, float]
    offset: tuple[float, float, float]
    color: tuple[float, float, float]


@dataclass(frozen=True)
class InstanceModel:
    category: str
    instance_seed: int
    parts: tuple[Part, ...]


@lru_cache(maxsize=1)
def load_templates() -> dict:
    text = resources.files("lumpkit.synthgen").joinpath("templates.json").read_text()
    data = json.loads(text)
    for name, spec in data["categories"].items():
        for part in spec["parts"]:
            if part["primitive"] not in PRIMITIVES:
                raise ValidationError(f"template {name}: unknown primitive {part['primitive']}")
            if min(part["dims"]) <= 0:
                raise ValidationError(f"template {name}: non-positive dimension")
    return data


def categories() -> tuple[str, ...]:
    return tuple(sorted(load_templates()["categories"]))


def _rotate_hue(color, shift: float) -> tuple[float, float, float]:
    h, s, v = colorsys.rgb_to_hsv(*color)
    r, g, b = colorsys.hsv_to_rgb((h + shift) % 1.0, s, v)
    return (r, g, b)


def make_instance(category: str, instance_seed: int) -> InstanceModel:
    """Template with seeded per-part dimension jitter and one per-instance hue shift."""
    templates = load_templates()["categories"]
    if category not in templates:
        raise ValidationError(f"unknown category {category!r}")
    rng = substream(instance_seed, "instance", category)
    hue_shift = float(rng.uniform(-HUE_JITTER, HUE_JITTER))
    parts = []
    for spec in templates[category]["parts"]:
        factors = 1.0 + rng.uniform(-DIMENSION_JITTER, DIMENSION_JITTER, size=3)
        if spec["primitive"] == "cylinder":
            factors[1] = factors[0]  # keep the cross-section circular
        dims = tuple(float(d * f) for d, f in zip(spec["dims"], factors))
        parts.append(
            Part(
                primitive=spec["primitive"],
                dims=dims,
                offset=tuple(float(x) for x in spec["offset"]),
                color=_rotate_hue(tuple(spec["color"]), hue_shift),
            )
        )
    return InstanceModel(category, int(instance_seed), tuple(parts))
