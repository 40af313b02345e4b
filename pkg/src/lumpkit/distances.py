"""Pairwise distances between descriptors under the two supported metrics.

Distances are column-oriented: a PairDistanceSet stores all unordered pairs in
a deterministic order (lexicographic by id pair), so downstream results are
independent of input iteration order and worker count.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from lumpkit.descriptors import KIND_GIST_PREFIX, KIND_HIST_PREFIX, Descriptor
from lumpkit.errors import DegenerateHistogramError, ValidationError

METRIC_HIST = "hist-correl"
METRIC_GIST = "euclid-gist"


@dataclass(frozen=True)
class PairDistanceSet:
    """All unordered pairs {i, j, distance} over a fixed id list.

    `i_indices`/`j_indices` index into `image_ids`; every pair satisfies
    image_ids[i] < image_ids[j] lexicographically and pairs are sorted by
    (image_ids[i], image_ids[j]).
    """

    image_ids: tuple[str, ...]
    i_indices: np.ndarray
    j_indices: np.ndarray
    distances: np.ndarray
    metric: str

    @property
    def n_pairs(self) -> int:
        return int(self.distances.shape[0])

    @property
    def n_images(self) -> int:
        return len(self.image_ids)

    def entries(self) -> Iterator[tuple[str, str, float]]:
        for i, j, d in zip(self.i_indices, self.j_indices, self.distances):
            yield self.image_ids[i], self.image_ids[j], float(d)

    def subset(self, mask: np.ndarray) -> "PairDistanceSet":
        return PairDistanceSet(
            self.image_ids,
            self.i_indices[mask],
            self.j_indices[mask],
            self.distances[mask],
            self.metric,
        )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["i", "j", "distance"])
            for i, j, d in self.entries():
                writer.writerow([i, j, repr(d)])


def histogram_correlation(h1: Descriptor, h2: Descriptor) -> float:
    """Pearson correlation between two histograms over their bins."""
    _check_hist_pair(h1, h2)
    a = h1.values - h1.values.mean()
    b = h2.values - h2.values.mean()
    ssa = float(a @ a)
    ssb = float(b @ b)
    if ssa == 0.0 or ssb == 0.0:
        raise DegenerateHistogramError("constant histogram has no defined correlation")
    c = float(a @ b) / float(np.sqrt(ssa * ssb))
    return min(1.0, max(-1.0, c))


def histogram_distance(h1: Descriptor, h2: Descriptor) -> float:
    """1 - correlation; 0 for identical shapes, up to 2 for anticorrelated ones."""
    return 1.0 - histogram_correlation(h1, h2)


def euclidean_distance(d1: Descriptor, d2: Descriptor) -> float:
    if d1.kind != d2.kind:
        raise ValidationError(f"descriptor kind mismatch: {d1.kind} vs {d2.kind}")
    if len(d1) != len(d2):
        raise ValidationError("descriptor length mismatch")
    diff = d1.values - d2.values
    return float(np.sqrt(diff @ diff))


def _check_hist_pair(h1: Descriptor, h2: Descriptor) -> None:
    for h in (h1, h2):
        if not h.kind.startswith(KIND_HIST_PREFIX):
            raise ValidationError(f"histogram correlation needs rgb-hist descriptors, got {h.kind}")
    if len(h1) != len(h2):
        raise ValidationError("histogram length mismatch")
    if len(h1) < 2:
        raise ValidationError("histograms must have at least 2 bins")


def _stack(descriptors: Mapping[str, Descriptor], metric: str) -> tuple[tuple[str, ...], np.ndarray]:
    if len(descriptors) < 2:
        raise ValidationError("need at least 2 descriptors")
    ids = tuple(sorted(descriptors))
    kinds = {descriptors[i].kind for i in ids}
    if len(kinds) != 1:
        raise ValidationError(f"mixed descriptor kinds: {sorted(kinds)}")
    kind = next(iter(kinds))
    if metric == METRIC_HIST and not kind.startswith(KIND_HIST_PREFIX):
        raise ValidationError(f"metric {metric} needs rgb-hist descriptors, got {kind}")
    if metric == METRIC_GIST and not kind.startswith(KIND_GIST_PREFIX):
        raise ValidationError(f"metric {metric} needs gist descriptors, got {kind}")
    mat = np.stack([descriptors[i].values for i in ids])
    return ids, mat


def pairwise_matrix(descriptors: Mapping[str, Descriptor], metric: str) -> tuple[tuple[str, ...], np.ndarray]:
    """Full symmetric distance matrix (ids sorted lexicographically)."""
    ids, mat = _stack(descriptors, metric)
    if metric == METRIC_HIST:
        centered = mat - mat.mean(axis=1, keepdims=True)
        norms = np.linalg.norm(centered, axis=1)
        bad = np.flatnonzero(norms == 0.0)
        if bad.size:
            raise DegenerateHistogramError(
                f"constant histogram for image {ids[bad[0]]!r}: correlation undefined"
            )
        unit = centered / norms[:, None]
        dist = 1.0 - np.clip(unit @ unit.T, -1.0, 1.0)
        np.clip(dist, 0.0, 2.0, out=dist)
    elif metric == METRIC_GIST:
        sq = np.einsum("ij,ij->i", mat, mat)
        dist = sq[:, None] + sq[None, :] - 2.0 * (mat @ mat.T)
        np.maximum(dist, 0.0, out=dist)
        np.sqrt(dist, out=dist)
    else:
        raise ValidationError(f"unknown metric {metric!r}")
    np.fill_diagonal(dist, 0.0)
    return ids, dist


def pairwise_distances(descriptors: Mapping[str, Descriptor], metric: str) -> PairDistanceSet:
    """All n(n-1)/2 unordered pair distances, in deterministic id-pair order."""
    ids, dist = pairwise_matrix(descriptors, metric)
    n = len(ids)
    iu, ju = np.triu_indices(n, k=1)
    return PairDistanceSet(
        image_ids=ids,
        i_indices=iu.astype(np.int32),
        j_indices=ju.astype(np.int32),
        distances=dist[iu, ju],
        metric=metric,
    )


def pair_set_from_matrix(ids, matrix, metric: str) -> PairDistanceSet:
    """Wrap a precomputed symmetric distance matrix (ids must be sorted)."""
    ids = tuple(ids)
    if list(ids) != sorted(ids):
        raise ValidationError("ids must be lexicographically sorted")
    matrix = np.asarray(matrix, dtype=np.float64)
    n = len(ids)
    if matrix.shape != (n, n):
        raise ValidationError("matrix shape does not match ids")
    iu, ju = np.triu_indices(n, k=1)
    return PairDistanceSet(ids, iu.astype(np.int32), ju.astype(np.int32), matrix[iu, ju], metric)


def distance_matrix(pairs: PairDistanceSet) -> np.ndarray:
    """Dense symmetric matrix view of a PairDistanceSet."""
    n = pairs.n_images
    out = np.zeros((n, n), dtype=np.float64)
    out[pairs.i_indices, pairs.j_indices] = pairs.distances
    out[pairs.j_indices, pairs.i_indices] = pairs.distances
    return out


def save_descriptors(base_path, descriptors: Mapping[str, Descriptor]) -> None:
    """Write a descriptor cache: `<base>.npy` matrix plus `<base>.json` sidecar."""
    base = Path(base_path)
    ids = tuple(sorted(descriptors))
    kinds = {descriptors[i].kind for i in ids}
    if len(kinds) != 1:
        raise ValidationError("descriptor cache requires a uniform kind")
    mat = np.stack([descriptors[i].values for i in ids])
    np.save(base.with_suffix(".npy"), mat)
    sidecar = {"kind": next(iter(kinds)), "length": int(mat.shape[1]), "image_ids": list(ids)}
    base.with_suffix(".json").write_text(json.dumps(sidecar, sort_keys=True, indent=2) + "\n")


def load_descriptors(base_path) -> dict[str, Descriptor]:
    base = Path(base_path)
    sidecar = json.loads(base.with_suffix(".json").read_text())
    mat = np.load(base.with_suffix(".npy"))
    ids = sidecar["image_ids"]
    if mat.shape != (len(ids), sidecar["length"]):
        raise ValidationError("descriptor cache matrix does not match its sidecar")
    return {image_id: Descriptor(sidecar["kind"], row) for image_id, row in zip(ids, mat)}
