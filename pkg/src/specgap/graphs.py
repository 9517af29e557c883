"""Compact metric graphs with exact rational edge lengths.

A metric graph is a combinatorial multigraph whose edges carry positive
lengths and are treated as one-dimensional segments, so points interior to
an edge are first-class citizens.  Loops and parallel edges are allowed;
every graph is required to be connected.

Edge lengths are stored as :class:`fractions.Fraction` (floats convert
exactly), so distances, both diameters and the surgery operations are
evaluated without rounding.  Query functions return floats at the API
boundary; witnesses keep their exact offsets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from heapq import heappop, heappush
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

from .errors import InputError, ParseError, ValidationError

Real = Union[int, float, Fraction]


def as_fraction(value: Real, what: str = "value") -> Fraction:
    """Convert a numeric input to an exact Fraction, rejecting non-finite values."""
    if isinstance(value, bool):
        raise InputError(f"{what} must be a number, got bool")
    try:
        return Fraction(value)
    except (TypeError, ValueError, OverflowError) as exc:
        raise InputError(f"{what} is not a finite number: {value!r}") from exc


def as_length(value: Real, what: str = "length") -> Fraction:
    frac = as_fraction(value, what)
    if frac <= 0:
        raise InputError(f"{what} must be strictly positive, got {value!r}")
    return frac


@dataclass(frozen=True)
class Edge:
    """An undirected edge with a strictly positive length; ``u == v`` is a loop."""

    id: str
    u: str
    v: str
    length: Fraction

    @property
    def is_loop(self) -> bool:
        return self.u == self.v

    def other(self, vertex: str) -> str:
        if vertex == self.u:
            return self.v
        if vertex == self.v:
            return self.u
        raise InputError(f"vertex {vertex!r} is not an endpoint of edge {self.id!r}")


@dataclass(frozen=True)
class GraphPoint:
    """A point on a graph: an edge id plus an offset from the edge's ``u`` end.

    Offsets 0 and (edge length) denote the endpoint vertices themselves; see
    :func:`canonical_key`.
    """

    edge: str
    offset: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "offset", as_fraction(self.offset, "offset"))
        if self.offset < 0:
            raise InputError(f"offset must be nonnegative, got {self.offset}")


@dataclass(frozen=True)
class MetricGraph:
    """Immutable connected multigraph with positive rational edge lengths."""

    vertices: frozenset
    edges: tuple

    def __post_init__(self) -> None:
        if not self.vertices:
            raise ValidationError("graph must have at least one vertex")
        seen = set()
        for e in self.edges:
            if e.id in seen:
                raise ValidationError(f"duplicate edge id {e.id!r}")
            seen.add(e.id)
            if e.u not in self.vertices or e.v not in self.vertices:
                raise ValidationError(
                    f"edge {e.id!r} references unknown endpoint {e.u!r} or {e.v!r}"
                )
            if e.length <= 0:
                raise ValidationError(f"edge {e.id!r} has nonpositive length")
        self._check_connected()

    def _check_connected(self) -> None:
        verts = self.vertices
        if len(verts) == 1:
            return
        adj: dict = {v: [] for v in verts}
        for e in self.edges:
            adj[e.u].append(e.v)
            adj[e.v].append(e.u)
        start = next(iter(verts))
        stack = [start]
        seen = {start}
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != verts:
            missing = sorted(verts - seen)
            raise ValidationError(f"graph is not connected; unreachable: {missing}")

    @classmethod
    def build(cls, vertices: Iterable[str], edges: Iterable) -> "MetricGraph":
        """Build from vertex ids and ``(id, u, v, length)`` tuples (or Edge/dicts)."""
        out = []
        for item in edges:
            if isinstance(item, Edge):
                out.append(item)
            elif isinstance(item, Mapping):
                out.append(
                    Edge(
                        str(item["id"]),
                        str(item["from"]),
                        str(item["to"]),
                        as_length(item["length"], f"edge {item['id']!r} length"),
                    )
                )
            else:
                eid, u, v, length = item
                out.append(Edge(str(eid), str(u), str(v), as_length(length, f"edge {eid!r} length")))
        return cls(frozenset(str(v) for v in vertices), tuple(out))

    # -- basic statistics ------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def total_length_exact(self) -> Fraction:
        return sum((e.length for e in self.edges), Fraction(0))

    @property
    def total_length(self) -> float:
        return float(self.total_length_exact)

    @cached_property
    def _edge_map(self) -> dict:
        return {e.id: e for e in self.edges}

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._edge_map[edge_id]
        except KeyError:
            raise InputError(f"no edge with id {edge_id!r}") from None

    @cached_property
    def _adjacency(self) -> dict:
        adj: dict = {v: [] for v in sorted(self.vertices)}
        for e in self.edges:
            adj[e.u].append(e)
            if not e.is_loop:
                adj[e.v].append(e)
        return adj

    @cached_property
    def min_edge_length(self) -> float:
        if not self.edges:
            raise InputError("graph has no edges")
        return float(min(e.length for e in self.edges))

    def degree(self, vertex: str) -> int:
        if vertex not in self.vertices:
            raise InputError(f"no vertex {vertex!r}")
        return sum(2 if e.is_loop else 1 for e in self._adjacency[vertex])


# ---------------------------------------------------------------------------
# shortest paths
# ---------------------------------------------------------------------------


def dijkstra(
    g: MetricGraph,
    source: str,
    target: str | None = None,
    banned_edges: frozenset = frozenset(),
    banned_vertices: frozenset = frozenset(),
):
    """Single-source shortest paths with deterministic lexicographic tie-breaks.

    Returns ``(dist, path)`` for ``target`` (``None`` if unreachable), or a
    dict ``vertex -> (dist, path)`` when ``target`` is None.  Paths are edge-id
    tuples; among equal-length paths the lexicographically smallest edge
    sequence wins, which makes every downstream choice reproducible.
    """
    if source not in g.vertices:
        raise InputError(f"no vertex {source!r}")
    if source in banned_vertices:
        return None if target is not None else {}
    best: dict = {}
    heap = [(Fraction(0), (), source)]
    while heap:
        dist, path, v = heappop(heap)
        if v in best:
            continue
        best[v] = (dist, path)
        if v == target:
            break
        for e in g._adjacency[v]:
            if e.is_loop or e.id in banned_edges:
                continue
            w = e.other(v)
            if w in best or w in banned_vertices:
                continue
            heappush(heap, (dist + e.length, path + (e.id,), w))
    if target is not None:
        return best.get(target)
    return best


def _vertex_distances(g: MetricGraph) -> dict:
    """All-pairs shortest vertex distances as exact Fractions."""
    table = {}
    for v in sorted(g.vertices):
        table[v] = {w: rec[0] for w, rec in dijkstra(g, v).items()}
    return table


# ---------------------------------------------------------------------------
# points and distances
# ---------------------------------------------------------------------------


def vertex_point(g: MetricGraph, vertex: str) -> GraphPoint:
    """Represent a vertex as a canonical GraphPoint on one of its edges."""
    if vertex not in g.vertices:
        raise InputError(f"no vertex {vertex!r}")
    for e in g.edges:
        if e.u == vertex:
            return GraphPoint(e.id, Fraction(0))
        if e.v == vertex:
            return GraphPoint(e.id, e.length)
    raise InputError(f"vertex {vertex!r} has no incident edge")


def _check_point(g: MetricGraph, p: GraphPoint) -> Edge:
    e = g.edge(p.edge)
    if p.offset > e.length:
        raise InputError(
            f"offset {p.offset} exceeds length {e.length} of edge {p.edge!r}"
        )
    return e


def canonical_key(g: MetricGraph, p: GraphPoint):
    """Canonical identity of a point: vertices absorb offset-0/length points."""
    e = _check_point(g, p)
    if p.offset == 0:
        return ("vertex", e.u)
    if p.offset == e.length:
        return ("vertex", e.v)
    return ("interior", e.id, p.offset)


def _distance_exact(g: MetricGraph, p: GraphPoint, q: GraphPoint) -> Fraction:
    ep = _check_point(g, p)
    eq = _check_point(g, q)
    dv = _vertex_distances(g)

    def exits(e: Edge, off: Fraction):
        return ((e.u, off), (e.v, e.length - off))

    best = None
    if ep.id == eq.id:
        u = abs(p.offset - q.offset)
        if ep.is_loop:
            return min(u, ep.length - u)
        best = u
    for va, offa in exits(ep, p.offset):
        for vb, offb in exits(eq, q.offset):
            cand = offa + dv[va][vb] + offb
            if best is None or cand < best:
                best = cand
    return best


def distance(g: MetricGraph, p: GraphPoint, q: GraphPoint) -> float:
    """Length of the shortest path between two points of the graph."""
    return float(_distance_exact(g, p, q))


# ---------------------------------------------------------------------------
# diameters
# ---------------------------------------------------------------------------


def _minimum_of_four(fns, t: Fraction, s: Fraction) -> Fraction:
    return min(ct * t + cs * s + c for ct, cs, c in fns)


def _cross_pair_max(g, e1: Edge, e2: Edge, dv):
    """Exact max over (t, s) of the min of the four endpoint-routing distances.

    Each routing is affine in (t, s) with gradients (+-1, +-1), so their min is
    concave and piecewise linear; the maximum over the rectangle is attained at
    an intersection of two of the affine pieces or of a piece with the
    rectangle boundary.  All candidates are enumerated in exact arithmetic.
    """
    L1, L2 = e1.length, e2.length
    # (coef_t, coef_s, const)
    fns = [
        (Fraction(1), Fraction(1), dv[e1.u][e2.u]),
        (Fraction(1), Fraction(-1), dv[e1.u][e2.v] + L2),
        (Fraction(-1), Fraction(1), dv[e1.v][e2.u] + L1),
        (Fraction(-1), Fraction(-1), dv[e1.v][e2.v] + L1 + L2),
    ]
    # Lines A*t + B*s = C: rectangle sides plus all pairwise equalities.
    lines = [
        (Fraction(1), Fraction(0), Fraction(0)),
        (Fraction(1), Fraction(0), L1),
        (Fraction(0), Fraction(1), Fraction(0)),
        (Fraction(0), Fraction(1), L2),
    ]
    for i in range(4):
        for j in range(i + 1, 4):
            at, as_, ac = fns[i]
            bt, bs, bc = fns[j]
            lines.append((at - bt, as_ - bs, bc - ac))
    best = None
    nl = len(lines)
    for i in range(nl):
        a1, b1, c1 = lines[i]
        for j in range(i + 1, nl):
            a2, b2, c2 = lines[j]
            det = a1 * b2 - a2 * b1
            if det == 0:
                continue
            t = (c1 * b2 - c2 * b1) / det
            s = (a1 * c2 - a2 * c1) / det
            if not (0 <= t <= L1 and 0 <= s <= L2):
                continue
            val = _minimum_of_four(fns, t, s)
            if best is None or val > best[0]:
                best = (val, t, s)
    return best


def _diameter_exact(g: MetricGraph):
    """Exact continuous diameter with a witnessing point pair."""
    if not g.edges:
        raise InputError("diameter requires at least one edge")
    dv = _vertex_distances(g)
    verts = sorted(g.vertices)

    best_val = Fraction(-1)
    best_pair = None

    # Vertex pairs first, so vertex witnesses win ties deterministically.
    for i, u in enumerate(verts):
        for v in verts[i:]:
            d = dv[u][v]
            if d > best_val:
                best_val = d
                best_pair = (vertex_point(g, u), vertex_point(g, v))

    # Same-edge suprema.
    for e in g.edges:
        if e.is_loop:
            val = e.length / 2
            if val > best_val:
                best_val = val
                best_pair = (GraphPoint(e.id, Fraction(0)), GraphPoint(e.id, val))
        else:
            d = dv[e.u][e.v]
            val = (e.length + d) / 2
            if val > best_val:
                best_val = val
                best_pair = (GraphPoint(e.id, val), GraphPoint(e.id, Fraction(0)))

    # Cross-edge pairs.
    edges = g.edges
    for i, e1 in enumerate(edges):
        for e2 in edges[i + 1 :]:
            cand = _cross_pair_max(g, e1, e2, dv)
            if cand is not None and cand[0] > best_val:
                best_val = cand[0]
                best_pair = (GraphPoint(e1.id, cand[1]), GraphPoint(e2.id, cand[2]))

    return best_val, best_pair


def diameter(g: MetricGraph):
    """Continuous diameter ``sup dist(x, y)`` over all graph points.

    Returns ``(value, (p, q))`` where the points witness the supremum.  The
    witness pair is deterministic but otherwise arbitrary when several pairs
    attain the diameter.
    """
    val, pair = _diameter_exact(g)
    return float(val), pair


def _combinatorial_diameter_exact(g: MetricGraph):
    if g.n_vertices < 2:
        raise InputError("combinatorial diameter requires at least 2 vertices")
    dv = _vertex_distances(g)
    verts = sorted(g.vertices)
    best = None
    for i, u in enumerate(verts):
        for v in verts[i + 1 :]:
            d = dv[u][v]
            if best is None or d > best[0]:
                best = (d, u, v)
    return best


def combinatorial_diameter(g: MetricGraph) -> float:
    """Maximum shortest-path distance over vertex pairs."""
    return float(_combinatorial_diameter_exact(g)[0])


# ---------------------------------------------------------------------------
# surgery operations
# ---------------------------------------------------------------------------


def cut_pendant(
    g: MetricGraph,
    attach: str,
    seed_vertex: str | None = None,
    seed_edge: str | None = None,
) -> MetricGraph:
    """Remove a subgraph that meets the rest of the graph only at ``attach``.

    The pendant is the connected component of ``g`` minus ``attach`` that
    contains ``seed_vertex``, or the single edge ``seed_edge`` when that edge
    is a loop at ``attach``.
    """
    if attach not in g.vertices:
        raise InputError(f"no vertex {attach!r}")
    if (seed_vertex is None) == (seed_edge is None):
        raise InputError("specify exactly one of seed_vertex or seed_edge")

    if seed_edge is not None:
        e = g.edge(seed_edge)
        if e.is_loop and e.u == attach:
            return MetricGraph(g.vertices, tuple(x for x in g.edges if x.id != e.id))
        seed_vertex = e.u if e.u != attach else e.v
        if seed_vertex == attach:
            raise InputError(f"edge {seed_edge!r} is not attached at {attach!r}")

    if seed_vertex == attach or seed_vertex not in g.vertices:
        raise InputError(f"invalid pendant seed {seed_vertex!r}")

    component = {seed_vertex}
    stack = [seed_vertex]
    while stack:
        v = stack.pop()
        for e in g._adjacency[v]:
            w = e.other(v)
            if w != attach and w not in component:
                component.add(w)
                stack.append(w)
    keep_edges = tuple(
        e
        for e in g.edges
        if not (e.u in component or e.v in component)
    )
    keep_vertices = g.vertices - frozenset(component)
    return MetricGraph(keep_vertices, keep_edges)


def _merge_vertices(g: MetricGraph, keep: str, gone: str) -> MetricGraph:
    new_edges = []
    for e in g.edges:
        u = keep if e.u == gone else e.u
        v = keep if e.v == gone else e.v
        new_edges.append(Edge(e.id, u, v, e.length))
    return MetricGraph(g.vertices - {gone}, tuple(new_edges))


def shorten_edge(g: MetricGraph, edge_id: str, new_length: Real) -> MetricGraph:
    """Shorten one edge; length 0 contracts the edge and merges its endpoints."""
    e = g.edge(edge_id)
    frac = as_fraction(new_length, "new length")
    if frac < 0 or frac > e.length:
        raise InputError(
            f"new length must lie in [0, {e.length}], got {new_length!r}"
        )
    if frac == 0:
        remaining = tuple(x for x in g.edges if x.id != edge_id)
        shrunk = MetricGraph(g.vertices, remaining)
        if e.is_loop:
            return shrunk
        keep, gone = sorted((e.u, e.v))
        return _merge_vertices(shrunk, keep, gone)
    new_edges = tuple(
        Edge(x.id, x.u, x.v, frac) if x.id == edge_id else x for x in g.edges
    )
    return MetricGraph(g.vertices, new_edges)


def identify_vertices(g: MetricGraph, keep: str, other: str) -> MetricGraph:
    """Glue two distinct vertices into one; edges between them become loops."""
    if keep not in g.vertices or other not in g.vertices:
        raise InputError("both vertices must exist")
    if keep == other:
        raise InputError("vertices to identify must be distinct")
    return _merge_vertices(g, keep, other)


# ---------------------------------------------------------------------------
# vertex insertion
# ---------------------------------------------------------------------------


def _fresh_ids(taken, stem: str):
    i = 0
    while True:
        cand = f"{stem}{i}"
        if cand not in taken:
            taken.add(cand)
            yield cand
        i += 1


def insert_points(g: MetricGraph, points: Sequence[GraphPoint]):
    """Insert degree-2 vertices at the given points.

    Points at offset 0 or at the full edge length resolve to the existing
    endpoint vertices.  Several points on one edge are handled together.
    Returns ``(new_graph, vertex_ids)`` with ids aligned to ``points``.
    """
    per_edge: dict = {}
    resolved: list = [None] * len(points)
    for i, p in enumerate(points):
        e = _check_point(g, p)
        if p.offset == 0:
            resolved[i] = e.u
        elif p.offset == e.length:
            resolved[i] = e.v
        else:
            per_edge.setdefault(e.id, []).append((p.offset, i))

    taken_v = set(g.vertices)
    taken_e = {e.id for e in g.edges}
    vgen = _fresh_ids(taken_v, "w")
    created = set()
    new_edges = []
    for e in g.edges:
        if e.id not in per_edge:
            new_edges.append(e)
            continue
        cuts = sorted(per_edge[e.id])
        offsets: list = []
        names: list = []
        for off, idx in cuts:
            if offsets and off == offsets[-1]:
                resolved[idx] = names[-1]
                continue
            name = next(vgen)
            created.add(name)
            offsets.append(off)
            names.append(name)
            resolved[idx] = name
        bounds = [Fraction(0)] + offsets + [e.length]
        chain_vertices = [e.u] + names + [e.v]
        egen = _fresh_ids(taken_e, f"{e.id}:")
        for k in range(len(bounds) - 1):
            new_edges.append(
                Edge(
                    next(egen),
                    chain_vertices[k],
                    chain_vertices[k + 1],
                    bounds[k + 1] - bounds[k],
                )
            )
    return MetricGraph(g.vertices | frozenset(created), tuple(new_edges)), resolved


# ---------------------------------------------------------------------------
# JSON input/output
# ---------------------------------------------------------------------------


def graph_to_json_obj(g: MetricGraph) -> dict:
    return {
        "vertices": sorted(g.vertices),
        "edges": [
            {"id": e.id, "from": e.u, "to": e.v, "length": float(e.length)}
            for e in g.edges
        ],
    }


def graph_from_json_obj(obj) -> MetricGraph:
    if not isinstance(obj, Mapping):
        raise ParseError("graph document must be a JSON object")
    if "vertices" not in obj or "edges" not in obj:
        raise ParseError('graph document needs "vertices" and "edges" fields')
    vertices = obj["vertices"]
    edges = obj["edges"]
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise ParseError('"vertices" must be a list of strings')
    if not isinstance(edges, list):
        raise ParseError('"edges" must be a list')
    out = []
    for i, rec in enumerate(edges):
        if not isinstance(rec, Mapping):
            raise ParseError(f"edges[{i}]: must be an object")
        for field in ("id", "from", "to", "length"):
            if field not in rec:
                raise ParseError(f'edges[{i}]: missing field "{field}"')
        if not isinstance(rec["length"], (int, float)) or isinstance(rec["length"], bool):
            raise ParseError(f'edges[{i}]: "length" must be a number')
        if not math.isfinite(rec["length"]) or rec["length"] <= 0:
            raise ValidationError(f'edges[{i}]: length must be positive and finite')
        out.append(Edge(str(rec["id"]), str(rec["from"]), str(rec["to"]), Fraction(rec["length"])))
    return MetricGraph(frozenset(vertices), tuple(out))


def read_graph(path) -> MetricGraph:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return graph_from_json_obj(obj)


def write_graph(g: MetricGraph, path) -> None:
    Path(path).write_text(json.dumps(graph_to_json_obj(g), indent=2, sort_keys=True) + "\n")
