"""Pairwise vertex connectivity via max-flow on the split-node digraph.

Each undirected graph node w becomes w_in -> w_out with capacity 1; each edge
{a, b} becomes a_out -> b_in and b_out -> a_in with capacity 1. The maximum
flow from u_out to v_in equals the maximum number of internally disjoint u-v
paths (a direct edge contributes one path through its own unit-capacity arc).

The Dinic kernel is numba-compiled: average connectivity needs O(n^2) max-flow
calls per graph, far beyond pure-Python budgets.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _bfs_levels(n_nodes, head, nxt, to, cap, source, sink, level, queue):
    for i in range(n_nodes):
        level[i] = -1
    level[source] = 0
    queue[0] = source
    qh, qt = 0, 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        e = head[u]
        while e != -1:
            v = to[e]
            if cap[e] > 0 and level[v] == -1:
                level[v] = level[u] + 1
                queue[qt] = v
                qt += 1
            e = nxt[e]
    return level[sink] != -1


@njit(cache=True)
def _dinic(n_nodes, head, nxt, to, cap, source, sink, level, queue, it, path):
    flow = 0
    while _bfs_levels(n_nodes, head, nxt, to, cap, source, sink, level, queue):
        for i in range(n_nodes):
            it[i] = head[i]
        depth = 0
        u = source
        while True:
            if u == sink:
                bottleneck = cap[path[0]]
                for k in range(1, depth):
                    if cap[path[k]] < bottleneck:
                        bottleneck = cap[path[k]]
                for k in range(depth):
                    e = path[k]
                    cap[e] -= bottleneck
                    cap[e ^ 1] += bottleneck
                first_sat = 0
                for k in range(depth):
                    if cap[path[k]] == 0:
                        first_sat = k
                        break
                flow += bottleneck
                depth = first_sat
                u = source if depth == 0 else to[path[depth - 1]]
                continue
            advanced = False
            e = it[u]
            while e != -1:
                v = to[e]
                if cap[e] > 0 and level[v] == level[u] + 1:
                    path[depth] = e
                    depth += 1
                    u = v
                    advanced = True
                    break
                e = nxt[e]
                it[u] = e
            if not advanced:
                level[u] = -1
                if depth == 0:
                    break
                depth -= 1
                e = path[depth]
                u = to[e ^ 1]  # tail of the arc we came through
                it[u] = nxt[e]
    return flow


@njit(cache=True)
def _pair_connectivities(n, head, nxt, to, cap_template, split_arc, pairs_s, pairs_t, big, out):
    n_split = 2 * n
    n_arcs = cap_template.shape[0]
    cap = cap_template.copy()
    level = np.empty(n_split, dtype=np.int64)
    queue = np.empty(n_split, dtype=np.int64)
    it = np.empty(n_split, dtype=np.int64)
    path = np.empty(n_arcs, dtype=np.int64)
    for k in range(pairs_s.shape[0]):
        s = pairs_s[k]
        t = pairs_t[k]
        for e in range(n_arcs):
            cap[e] = cap_template[e]
        cap[split_arc[s]] = big
        cap[split_arc[t]] = big
        source = s + n  # s_out
        sink = t  # t_in
        out[k] = _dinic(n_split, head, nxt, to, cap, source, sink, level, queue, it, path)
    return out


class SplitGraph:
    """Reusable split-node digraph for one undirected graph."""

    def __init__(self, n_nodes: int, edges_u: np.ndarray, edges_v: np.ndarray):
        self.n = int(n_nodes)
        m = len(edges_u)
        n_arcs = 2 * (self.n + 2 * m)  # every arc paired with its reverse via e^1
        head = np.full(2 * self.n, -1, dtype=np.int64)
        nxt = np.empty(n_arcs, dtype=np.int64)
        to = np.empty(n_arcs, dtype=np.int64)
        cap = np.zeros(n_arcs, dtype=np.int64)
        split_arc = np.empty(self.n, dtype=np.int64)
        count = 0

        def add_arc(u, v, c):
            nonlocal count
            to[count] = v
            cap[count] = c
            nxt[count] = head[u]
            head[u] = count
            count += 1

        for w in range(self.n):
            split_arc[w] = count
            add_arc(w, w + self.n, 1)  # w_in -> w_out
            add_arc(w + self.n, w, 0)
        for a, b in zip(edges_u, edges_v):
            a, b = int(a), int(b)
            add_arc(a + self.n, b, 1)  # a_out -> b_in
            add_arc(b, a + self.n, 0)
            add_arc(b + self.n, a, 1)  # b_out -> a_in
            add_arc(a, b + self.n, 0)

        self.head, self.nxt, self.to = head, nxt, to
        self.cap_template = cap
        self.split_arc = split_arc

    def pair_connectivity(self, pairs_s, pairs_t) -> np.ndarray:
        out = np.empty(len(pairs_s), dtype=np.int64)
        if len(pairs_s) == 0:
            return out
        _pair_connectivities(
            self.n,
            self.head,
            self.nxt,
            self.to,
            self.cap_template,
            self.split_arc,
            np.asarray(pairs_s, dtype=np.int64),
            np.asarray(pairs_t, dtype=np.int64),
            self.n + 1,
            out,
        )
        return out
