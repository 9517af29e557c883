"""Shared test oracles, deliberately independent of the library internals.

Vertex distances come from scipy's Dijkstra on a dense float matrix, point
distances from explicit four-way endpoint routing, the diameter oracle from
dense grid sampling, and path enumeration from a recursive DFS.  None of
these share code with the exact-arithmetic implementations they check.
"""

import numpy as np
import pytest
from scipy.sparse.csgraph import shortest_path

from specgap.graphs import MetricGraph


@pytest.fixture(scope="session")
def rng_seed():
    return 20260810


def vertex_distance_oracle(g: MetricGraph):
    """(vertex order, index map, dense all-pairs matrix) via scipy Dijkstra."""
    verts = sorted(g.vertices)
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    mat = np.full((n, n), np.inf)
    np.fill_diagonal(mat, 0.0)
    for e in g.edges:
        i, j = idx[e.u], idx[e.v]
        w = float(e.length)
        if w < mat[i, j]:
            mat[i, j] = mat[j, i] = w
    dist = shortest_path(mat, method="D", directed=False)
    return verts, idx, dist


def point_distance_oracle(g, dv, idx, e1, t, e2, s):
    """min over endpoint routings plus the within-edge direct option."""
    l1, l2 = float(e1.length), float(e2.length)
    best = np.inf
    for va, offa in ((e1.u, t), (e1.v, l1 - t)):
        for vb, offb in ((e2.u, s), (e2.v, l2 - s)):
            best = min(best, offa + dv[idx[va], idx[vb]] + offb)
    if e1.id == e2.id:
        u = abs(t - s)
        best = min(best, min(u, l1 - u) if e1.is_loop else u)
    return best


def diameter_oracle(g: MetricGraph, grid: int = 40):
    """Dense-sample point pairs; returns (max found, worst-case grid error)."""
    _, idx, dv = vertex_distance_oracle(g)
    best = 0.0
    err = 0.0
    edges = g.edges
    for i, e1 in enumerate(edges):
        for e2 in edges[i:]:
            l1, l2 = float(e1.length), float(e2.length)
            ts = np.linspace(0.0, l1, grid)
            ss = np.linspace(0.0, l2, grid)
            err = max(err, (l1 + l2) / (2 * (grid - 1)))
            for t in ts:
                for s in ss:
                    best = max(best, point_distance_oracle(g, dv, idx, e1, t, e2, s))
    return best, err


def all_simple_paths_oracle(g: MetricGraph, s: str, t: str):
    """Every simple s-t path as an edge-id tuple, by exhaustive DFS."""
    out = []

    def dfs(v, visited, edges):
        if v == t:
            out.append(tuple(edges))
            return
        for e in g._adjacency[v]:
            if e.is_loop:
                continue
            w = e.other(v)
            if w in visited:
                continue
            edges.append(e.id)
            dfs(w, visited | {w}, edges)
            edges.pop()

    dfs(s, {s}, [])
    return out
