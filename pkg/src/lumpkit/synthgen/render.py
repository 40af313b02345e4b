"""Orthographic ray-cast renderer for primitive assemblies.

Rendering is exact per pixel: each pixel casts one axis-aligned view ray,
intersected analytically with every part (slab test for boxes, quadratics for
cylinders and ellipsoids). Per-pixel depths are compared across parts in fixed
part order (a z-buffer), so output is deterministic. The object is auto-scaled
so its bounding sphere fills `fill_fraction` of the frame; the default light is
the view direction, which makes rotations about the view axis exact image
rotations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lumpkit.errors import ValidationError
from lumpkit.synthgen.models import InstanceModel, Part

_PARALLEL_EPS = 1e-12


@dataclass(frozen=True)
class RenderConfig:
    image_size: int = 128
    fill_fraction: float = 0.8
    light_dir: tuple[float, float, float] = (0.0, 0.0, -1.0)  # into the scene
    ambient: float = 0.25
    background: tuple[int, int, int] = (0, 0, 0)

    def __post_init__(self):
        if self.image_size < 32:
            raise ValidationError("image_size must be >= 32")
        if not (0.0 < self.fill_fraction <= 1.0):
            raise ValidationError("fill_fraction must be in (0, 1]")


def rotation_matrix(orientation_deg) -> np.ndarray:
    """Intrinsic Z-Y-X (yaw, pitch, roll) rotation, degrees."""
    yaw, pitch, roll = (np.deg2rad(float(a)) for a in orientation_deg)
    cz, sz = np.cos(yaw), np.sin(yaw)
    cy, sy = np.cos(pitch), np.sin(pitch)
    cx, sx = np.cos(roll), np.sin(roll)
    rz = np.array([[cz, -sz, 0.0], [sz, cz, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cx, -sx], [0.0, sx, cx]])
    return rz @ ry @ rx


def part_bounding_radius(part: Part) -> float:
    dx, dy, dz = part.dims
    if part.primitive == "box":
        reach = float(np.sqrt(dx * dx + dy * dy + dz * dz))
    elif part.primitive == "cylinder":
        reach = float(np.sqrt(dx * dx + dz * dz))
    else:
        reach = float(max(part.dims))
    return reach


def bounding_radius(model: InstanceModel) -> float:
    return max(
        float(np.linalg.norm(part.offset)) + part_bounding_radius(part) for part in model.parts
    )


def _axis_interval(o, d, half):
    """Per-axis slab interval [lo, hi] of depths; empty encoded as lo > hi."""
    parallel = np.abs(d) < _PARALLEL_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = (-half - o) / d
        tb = (half - o) / d
    lo = np.minimum(ta, tb)
    hi = np.maximum(ta, tb)
    inside = np.abs(o) <= half
    lo = np.where(parallel, np.where(inside, -np.inf, np.inf), lo)
    hi = np.where(parallel, np.where(inside, np.inf, -np.inf), hi)
    return lo, hi


def _quadratic_interval(a, b, c):
    """Depth interval where a t^2 + b t + c <= 0 (a may be ~0 for parallel rays)."""
    linear = a < _PARALLEL_EPS
    disc = b * b - 4.0 * a * c
    ok = disc >= 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        root = np.sqrt(np.where(ok, disc, 0.0))
        lo = (-b - root) / (2.0 * a)
        hi = (-b + root) / (2.0 * a)
    inside = c <= 0.0
    lo = np.where(linear, np.where(inside, -np.inf, np.inf), np.where(ok, lo, np.inf))
    hi = np.where(linear, np.where(inside, np.inf, -np.inf), np.where(ok, hi, -np.inf))
    return lo, hi


def _intersect_part(part: Part, o: np.ndarray, d: np.ndarray):
    """Viewer-side hit of one part.

    o: (n, 3) ray origins in the part frame; d: (3,) ray direction (toward the
    viewer as depth increases). Returns (hit mask, depth, normal (n, 3) in the
    part frame).
    """
    n = o.shape[0]
    dims = part.dims
    normals = np.zeros((n, 3))
    if part.primitive == "box":
        los, his = zip(*(_axis_interval(o[:, k], d[k], dims[k]) for k in range(3)))
        lo = np.maximum.reduce(los)
        hi = np.minimum.reduce(his)
        hit = (lo <= hi) & np.isfinite(hi)
        axis = np.argmin(np.stack(his), axis=0)
        for k in range(3):
            sel = hit & (axis == k)
            normals[sel, k] = np.sign(d[k]) if abs(d[k]) >= _PARALLEL_EPS else 1.0
        return hit, hi, normals
    if part.primitive == "cylinder":
        r, _, hh = dims
        a = d[0] * d[0] + d[1] * d[1]
        b = 2.0 * (o[:, 0] * d[0] + o[:, 1] * d[1])
        c = o[:, 0] ** 2 + o[:, 1] ** 2 - r * r
        rlo, rhi = _quadratic_interval(np.full(n, a), b, c)
        zlo, zhi = _axis_interval(o[:, 2], d[2], hh)
        lo = np.maximum(rlo, zlo)
        hi = np.minimum(rhi, zhi)
        hit = (lo <= hi) & np.isfinite(hi)
        side = hit & (rhi <= zhi)
        cap = hit & ~side
        p = o + np.where(hit, hi, 0.0)[:, None] * d[None, :]
        normals[side, 0] = p[side, 0] / r
        normals[side, 1] = p[side, 1] / r
        normals[cap, 2] = np.sign(d[2]) if abs(d[2]) >= _PARALLEL_EPS else 1.0
        return hit, hi, normals
    # ellipsoid
    ax = np.asarray(dims)
    os = o / ax[None, :]
    ds = d / ax
    a = float(ds @ ds)
    b = 2.0 * (os @ ds)
    c = np.einsum("ij,ij->i", os, os) - 1.0
    lo, hi = _quadratic_interval(np.full(n, a), b, c)
    hit = (lo <= hi) & np.isfinite(hi)
    p = o + np.where(hit, hi, 0.0)[:, None] * d[None, :]
    normals = p / (ax * ax)[None, :]
    return hit, hi, normals


def render_view(model: InstanceModel, orientation_deg, config: RenderConfig = RenderConfig()) -> np.ndarray:
    """Render the model at an intrinsic Z-Y-X orientation to an (S, S, 3) uint8 raster."""
    s = config.image_size
    rot = rotation_matrix(orientation_deg)
    scale = config.fill_fraction * (s / 2.0) / bounding_radius(model)

    cols = np.arange(s) + 0.5 - s / 2.0
    rows = s / 2.0 - (np.arange(s) + 0.5)
    xs, ys = np.meshgrid(cols, rows)  # ys[r, c] decreases down the image
    plane = np.stack([xs.ravel() / scale, ys.ravel() / scale, np.zeros(s * s)], axis=1)
    origins = plane @ rot  # == rot.T applied to each row
    direction = rot.T @ np.array([0.0, 0.0, 1.0])  # depth axis, toward the viewer

    light = -np.asarray(config.light_dir, dtype=np.float64)
    light = light / np.linalg.norm(light)

    depth = np.full(s * s, -np.inf)
    rgb = np.zeros((s * s, 3))
    bg = np.asarray(config.background, dtype=np.float64) / 255.0
    rgb[:] = bg

    for part in model.parts:
        o = origins - np.asarray(part.offset)[None, :]
        hit, t, normals = _intersect_part(part, o, direction)
        closer = hit & (t > depth)
        if not np.any(closer):
            continue
        n_model = normals[closer]
        norms = np.linalg.norm(n_model, axis=1, keepdims=True)
        n_model = n_model / np.maximum(norms, 1e-30)
        n_view = n_model @ rot.T
        lambert = np.maximum(n_view @ light, 0.0)
        shade = config.ambient + (1.0 - config.ambient) * lambert
        rgb[closer] = np.asarray(part.color)[None, :] * shade[:, None]
        depth[closer] = t[closer]

    out = np.floor(np.clip(rgb, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    return out.reshape(s, s, 3)
