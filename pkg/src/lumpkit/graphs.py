"""Top-quantile similarity graphs, their metrics, and random geometric null graphs.

Edge selection is deterministic: pairs are ordered by (distance, id pair) and the
ceil(q*m) smallest are kept, so the edge set is monotone in q. Metrics follow the
component-weighted convention: mean degree is over all nodes with isolated nodes
contributing zero; average connectivity and average shortest path are computed
per connected component (single-node components excluded) and averaged with
weight equal to the component's node-pair count.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from lumpkit._maxflow import SplitGraph
from lumpkit._rng import substream
from lumpkit.distances import PairDistanceSet
from lumpkit.errors import ValidationError

WEIGHT_INVERSE = "inverse-distance"
WEIGHT_UNIT = "unit"
WEIGHT_DISTANCE = "distance"
_WEIGHT_KINDS = (WEIGHT_INVERSE, WEIGHT_UNIT, WEIGHT_DISTANCE)

INVERSE_DISTANCE_FLOOR = 1e-9


@dataclass(frozen=True)
class SimilarityGraph:
    """Simple weighted graph over image ids (or abstract points for nulls)."""

    node_ids: tuple[str, ...]
    edges_u: np.ndarray
    edges_v: np.ndarray
    weights: np.ndarray
    weight_kind: str
    quantile: float | None = None
    threshold: float | None = None
    coords: np.ndarray | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return int(self.edges_u.shape[0])

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in zip(self.edges_u, self.edges_v)}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["u", "v", "weight"])
            for u, v, w in zip(self.edges_u, self.edges_v, self.weights):
                writer.writerow([self.node_ids[u], self.node_ids[v], repr(float(w))])


@dataclass(frozen=True)
class GraphMetrics:
    mean_degree: float
    avg_connectivity: float | None
    avg_shortest_path: float | None
    has_edges: bool
    n_nodes: int
    n_edges: int
    n_components: int
    pair_count: int  # within-component node pairs backing the path metrics
    connectivity_exact: bool = True

    def to_dict(self) -> dict:
        return {
            "mean_degree": self.mean_degree,
            "avg_connectivity": self.avg_connectivity,
            "avg_shortest_path": self.avg_shortest_path,
            "has_edges": self.has_edges,
            "n_nodes": self.n_nodes,
            "n_edges": self.n_edges,
            "n_components": self.n_components,
            "pair_count": self.pair_count,
            "connectivity_exact": self.connectivity_exact,
        }


def _edge_weights(distances: np.ndarray, weight_kind: str) -> np.ndarray:
    if weight_kind == WEIGHT_INVERSE:
        return 1.0 / np.maximum(distances, INVERSE_DISTANCE_FLOOR)
    if weight_kind == WEIGHT_UNIT:
        return np.ones_like(distances)
    if weight_kind == WEIGHT_DISTANCE:
        return distances.copy()
    raise ValidationError(f"unknown weight kind {weight_kind!r}")


def quantile_edge_count(n_pairs: int, top_quantile: float) -> int:
    if not (0.0 < top_quantile <= 1.0):
        raise ValidationError("top_quantile must be in (0, 1]")
    return int(math.ceil(top_quantile * n_pairs))


def quantile_distance_threshold(pairs: PairDistanceSet, top_quantile: float) -> float:
    """Distance of the ceil(q*m)-th closest pair: the graph's absolute cutoff."""
    if pairs.n_pairs == 0:
        raise ValidationError("empty pair set")
    k = quantile_edge_count(pairs.n_pairs, top_quantile)
    return float(np.partition(pairs.distances, k - 1)[k - 1])


def build_similarity_graph(
    pairs: PairDistanceSet, top_quantile: float, path_weight: str
) -> SimilarityGraph:
    """Graph whose edges are the top-quantile most similar (smallest-distance) pairs.

    Ties at the quantile boundary break by the deterministic id-pair order of
    the PairDistanceSet.
    """
    if pairs.n_pairs == 0:
        raise ValidationError("empty pair set")
    if path_weight not in _WEIGHT_KINDS:
        raise ValidationError(f"unknown weight kind {path_weight!r}")
    k = quantile_edge_count(pairs.n_pairs, top_quantile)
    order = np.argsort(pairs.distances, kind="stable")[:k]
    order = np.sort(order)  # keep edges in id-pair order
    dist = pairs.distances[order]
    return SimilarityGraph(
        node_ids=pairs.image_ids,
        edges_u=pairs.i_indices[order].astype(np.int64),
        edges_v=pairs.j_indices[order].astype(np.int64),
        weights=_edge_weights(dist, path_weight),
        weight_kind=path_weight,
        quantile=float(top_quantile),
        threshold=float(dist.max()) if k else None,
    )


def build_similarity_graph_at_threshold(
    pairs: PairDistanceSet, distance_threshold: float, path_weight: str
) -> SimilarityGraph:
    """Graph whose edges are all pairs with distance <= the given absolute cutoff.

    This is the rule that transfers one graph's top-quantile range onto another
    distance distribution (observed-vs-null, Infant-vs-Uniform); unlike the
    quantile rule it can produce zero edges.
    """
    if path_weight not in _WEIGHT_KINDS:
        raise ValidationError(f"unknown weight kind {path_weight!r}")
    mask = pairs.distances <= distance_threshold
    dist = pairs.distances[mask]
    return SimilarityGraph(
        node_ids=pairs.image_ids,
        edges_u=pairs.i_indices[mask].astype(np.int64),
        edges_v=pairs.j_indices[mask].astype(np.int64),
        weights=_edge_weights(dist, path_weight),
        weight_kind=path_weight,
        quantile=None,
        threshold=float(distance_threshold),
    )


def geometric_null_graph(
    n: int,
    top_quantile: float | None = None,
    seed: int = 0,
    distance_threshold: float | None = None,
) -> SimilarityGraph:
    """Random geometric null: n points uniform in the unit square, unit edge weights.

    Edges come from the same top-quantile rule (closest ceil(q*m) pairs) or,
    when `distance_threshold` is given instead, from the observed graph's
    absolute cutoff applied to the planar distances.
    """
    if n < 2:
        raise ValidationError("geometric null graph needs n >= 2")
    if (top_quantile is None) == (distance_threshold is None):
        raise ValidationError("give exactly one of top_quantile or distance_threshold")
    rng = substream(seed, "geometric-null", n)
    coords = rng.uniform(0.0, 1.0, size=(n, 2))
    iu, ju = np.triu_indices(n, k=1)
    dist = np.sqrt(((coords[iu] - coords[ju]) ** 2).sum(axis=1))
    ids = tuple(f"p{i:06d}" for i in range(n))
    if top_quantile is not None:
        k = quantile_edge_count(dist.shape[0], top_quantile)
        order = np.sort(np.argsort(dist, kind="stable")[:k])
        threshold = float(dist[order].max()) if k else None
    else:
        order = np.flatnonzero(dist <= distance_threshold)
        threshold = float(distance_threshold)
    return SimilarityGraph(
        node_ids=ids,
        edges_u=iu[order].astype(np.int64),
        edges_v=ju[order].astype(np.int64),
        weights=np.ones(order.shape[0]),
        weight_kind=WEIGHT_UNIT,
        quantile=top_quantile,
        threshold=threshold,
        coords=coords,
    )


def _components(graph: SimilarityGraph) -> tuple[int, np.ndarray]:
    n = graph.n_nodes
    adj = csr_matrix(
        (np.ones(graph.n_edges), (graph.edges_u, graph.edges_v)), shape=(n, n)
    )
    return connected_components(adj, directed=False)


def _pair_index_to_local(k: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Decode flat upper-triangular pair indices for a component of `size` nodes."""
    rows = np.arange(size, dtype=np.int64)
    row_starts = rows * size - rows * (rows + 1) // 2  # first flat index of each row
    i = np.searchsorted(row_starts, k, side="right") - 1
    j = k - row_starts[i] + i + 1
    return i.astype(np.int64), j.astype(np.int64)


def graph_metrics(
    graph: SimilarityGraph,
    connectivity_pair_cap: int | None = None,
    connectivity_seed: int = 0,
) -> GraphMetrics:
    """Mean degree, average connectivity, and average shortest path.

    With `connectivity_pair_cap`, components whose total pair count exceeds the
    cap are estimated from that many uniformly sampled within-component pairs
    (seeded); the estimate targets the same pair-count-weighted average.
    """
    n = graph.n_nodes
    degrees = np.bincount(
        np.concatenate([graph.edges_u, graph.edges_v]), minlength=n
    )
    mean_degree = float(degrees.sum() / n) if n else 0.0
    if graph.n_edges == 0:
        return GraphMetrics(mean_degree, None, None, False, n, 0, n, 0)

    n_comp, labels = _components(graph)
    comp_nodes = [np.flatnonzero(labels == c) for c in range(n_comp)]
    multi = [nodes for nodes in comp_nodes if nodes.size >= 2]
    pair_counts = np.array([nodes.size * (nodes.size - 1) // 2 for nodes in multi], dtype=np.int64)
    total_pairs = int(pair_counts.sum())

    # shortest paths: exact per component on the stored edge weights
    weight_sum = 0.0
    for nodes in multi:
        index = np.full(n, -1, dtype=np.int64)
        index[nodes] = np.arange(nodes.size)
        mask = index[graph.edges_u] >= 0
        eu = index[graph.edges_u[mask]]
        ev = index[graph.edges_v[mask]]
        ew = graph.weights[mask]
        sub = csr_matrix((ew, (eu, ev)), shape=(nodes.size, nodes.size))
        dmat = dijkstra(sub, directed=False)
        weight_sum += float(np.triu(dmat, k=1).sum())
    avg_shortest_path = weight_sum / total_pairs

    # average connectivity: max-flow per within-component pair (possibly sampled)
    if connectivity_pair_cap is not None and total_pairs > connectivity_pair_cap:
        rng = substream(connectivity_seed, "connectivity-sample")
        chosen = np.sort(rng.choice(total_pairs, size=connectivity_pair_cap, replace=False))
        exact = False
    else:
        chosen = np.arange(total_pairs)
        exact = True

    kappa_sum = 0.0
    kappa_n = 0
    offsets = np.concatenate([[0], np.cumsum(pair_counts)])
    for ci, nodes in enumerate(multi):
        lo, hi = offsets[ci], offsets[ci + 1]
        local_flat = chosen[(chosen >= lo) & (chosen < hi)] - lo
        if local_flat.size == 0:
            continue
        li, lj = _pair_index_to_local(local_flat, nodes.size)
        index = np.full(n, -1, dtype=np.int64)
        index[nodes] = np.arange(nodes.size)
        mask = index[graph.edges_u] >= 0
        split = SplitGraph(nodes.size, index[graph.edges_u[mask]], index[graph.edges_v[mask]])
        kappa = split.pair_connectivity(li, lj)
        kappa_sum += float(kappa.sum())
        kappa_n += int(kappa.shape[0])
    avg_connectivity = kappa_sum / kappa_n

    return GraphMetrics(
        mean_degree=mean_degree,
        avg_connectivity=avg_connectivity,
        avg_shortest_path=avg_shortest_path,
        has_edges=True,
        n_nodes=n,
        n_edges=graph.n_edges,
        n_components=n_comp,
        pair_count=total_pairs,
        connectivity_exact=exact,
    )
