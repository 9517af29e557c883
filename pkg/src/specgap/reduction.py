"""Reduction of an arbitrary compact metric graph to a pumpkin chain.

The pipeline never decreases the spectral gap: it promotes a
diameter-realizing point pair to vertices, enumerates simple
endpoint-to-endpoint paths in nondecreasing length order, prunes everything
else (pendants), shortens the private part of each path until all have the
diameter's length, synchronizes vertex levels across paths, and identifies
vertices at equal levels.  Segment lengths of the resulting chain are level
gaps; multiplicities count the surviving parallel edges per gap.

All lengths are exact rationals, so the output chain's total length equals
the input diameter exactly and "equal level" means equal numbers, with no
tolerance.  Ties between equal-length paths are broken by lexicographic
edge-id order, which makes the whole pipeline deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from heapq import heappop, heappush
from pathlib import Path
from typing import Optional, Tuple

from .chains import PumpkinChain, chain_to_json_obj, eigenvalue
from .errors import InputError, ReductionError
from .graphs import (
    Edge,
    GraphPoint,
    MetricGraph,
    _combinatorial_diameter_exact,
    _diameter_exact,
    _fresh_ids,
    dijkstra,
    graph_to_json_obj,
    insert_points,
)


@dataclass(frozen=True)
class PathRecord:
    """A simple path as an edge-id sequence with its vertex walk and length."""

    edges: Tuple[str, ...]
    vertices: Tuple[str, ...]
    length: Fraction


def _record(g: MetricGraph, start: str, edge_ids) -> PathRecord:
    seq = [start]
    total = Fraction(0)
    for eid in edge_ids:
        e = g.edge(eid)
        if e.u == seq[-1]:
            seq.append(e.v)
        elif e.v == seq[-1]:
            seq.append(e.u)
        else:
            raise ReductionError(f"edge {eid!r} does not continue the walk at {seq[-1]!r}")
        total += e.length
    return PathRecord(tuple(edge_ids), tuple(seq), total)


# ---------------------------------------------------------------------------
# which edges can a simple path between the endpoints use at all?
# ---------------------------------------------------------------------------


def _biconnected_blocks(g: MetricGraph) -> list:
    """Biconnected components as frozensets of edge ids (loops excluded)."""
    index: dict = {}
    low: dict = {}
    estack: list = []
    blocks: list = []
    counter = 0
    for root in sorted(g.vertices):
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        work = [(root, None, iter(g._adjacency[root]))]
        while work:
            v, parent_eid, it = work[-1]
            descended = False
            for e in it:
                if e.is_loop or e.id == parent_eid:
                    continue
                w = e.other(v)
                if w not in index:
                    estack.append(e.id)
                    index[w] = low[w] = counter
                    counter += 1
                    work.append((w, e.id, iter(g._adjacency[w])))
                    descended = True
                    break
                if index[w] < index[v]:
                    estack.append(e.id)
                    low[v] = min(low[v], index[w])
            if descended:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
                if low[v] >= index[pv]:
                    block = set()
                    while True:
                        eid = estack.pop()
                        block.add(eid)
                        if eid == parent_eid:
                            break
                    blocks.append(frozenset(block))
    return blocks


def edges_on_simple_paths(g: MetricGraph, s: str, t: str) -> frozenset:
    """Edge ids lying on at least one simple s-t path.

    These are exactly the edges of the biconnected blocks along the
    block-cut-tree path from s to t (Menger); loops are never usable.
    """
    if s == t:
        raise InputError("endpoints must be distinct")
    if s not in g.vertices or t not in g.vertices:
        raise InputError("both endpoints must be vertices")
    blocks = _biconnected_blocks(g)
    # Bipartite incidence forest: vertex nodes <-> block nodes.
    adjacency: dict = {}
    for bi, block in enumerate(blocks):
        bnode = ("b", bi)
        for eid in block:
            e = g.edge(eid)
            for v in (e.u, e.v):
                adjacency.setdefault(("v", v), set()).add(bnode)
                adjacency.setdefault(bnode, set()).add(("v", v))
    start, goal = ("v", s), ("v", t)
    if start not in adjacency or goal not in adjacency:
        return frozenset()
    prev = {start: None}
    queue = [start]
    while queue:
        node = queue.pop(0)
        if node == goal:
            break
        for nxt in sorted(adjacency[node]):
            if nxt not in prev:
                prev[nxt] = node
                queue.append(nxt)
    if goal not in prev:
        return frozenset()
    used: set = set()
    node = goal
    while node is not None:
        if node[0] == "b":
            used |= blocks[node[1]]
        node = prev[node]
    return frozenset(used)


# ---------------------------------------------------------------------------
# k-shortest simple paths (Yen-style deviation search on the multigraph)
# ---------------------------------------------------------------------------


def yen_paths(g: MetricGraph, source: str, target: str):
    """Yield simple source-target paths in nondecreasing (length, edges) order.

    Deviation search with edge-id bans, so parallel edges yield distinct
    paths.  Exhausts every simple path eventually; all ties are broken by the
    lexicographic order of the edge-id tuples.
    """
    first = dijkstra(g, source, target)
    if first is None:
        return
    accepted = [_record(g, source, first[1])]
    yield accepted[0]
    seen = {first[1]}
    candidates: list = []
    while True:
        prev = accepted[-1]
        for i in range(len(prev.edges)):
            root = prev.edges[:i]
            spur = prev.vertices[i]
            root_len = sum((g.edge(eid).length for eid in root), Fraction(0))
            banned_e = frozenset(
                r.edges[i]
                for r in accepted
                if len(r.edges) > i and r.edges[:i] == root
            )
            banned_v = frozenset(prev.vertices[:i])
            res = dijkstra(g, spur, target, banned_e, banned_v)
            if res is None:
                continue
            full = root + res[1]
            if full in seen:
                continue
            seen.add(full)
            heappush(candidates, (root_len + res[0], full))
        if not candidates:
            return
        _, edges = heappop(candidates)
        rec = _record(g, source, edges)
        yield rec
        accepted.append(rec)


def enumerate_paths(g: MetricGraph, v0: str, vD: str, max_candidates: int = 100000):
    """Paths kept by the coverage rule: drop paths that add no new edge.

    Stops as soon as the kept union covers every edge that any simple
    v0-vD path can use, or when the path supply is exhausted.
    """
    usable = edges_on_simple_paths(g, v0, vD)
    kept: list = []
    union: set = set()
    count = 0
    for rec in yen_paths(g, v0, vD):
        count += 1
        if count > max_candidates:
            raise ReductionError("path enumeration exceeded the candidate cap")
        if set(rec.edges) <= union:
            continue
        kept.append(rec)
        union.update(rec.edges)
        if union >= usable:
            break
    if not kept:
        raise ReductionError(f"no path found from {v0!r} to {vD!r}")
    return kept


# ---------------------------------------------------------------------------
# pipeline stages
# ---------------------------------------------------------------------------


def prune_to_union(g: MetricGraph, paths) -> MetricGraph:
    """Keep only the union of the given paths; everything removed must be
    a pendant (attached to the union at a single vertex), which is asserted."""
    union_ids = set()
    union_vertices = set()
    for p in paths:
        union_ids.update(p.edges)
        union_vertices.update(p.vertices)
    discarded = [e for e in g.edges if e.id not in union_ids]

    parent = {e.id: e.id for e in discarded}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    by_vertex: dict = {}
    for e in discarded:
        for v in (e.u, e.v):
            if v in union_vertices:
                continue
            if v in by_vertex:
                parent[find(e.id)] = find(by_vertex[v])
            else:
                by_vertex[v] = e.id
    attachments: dict = {}
    for e in discarded:
        root = find(e.id)
        spots = attachments.setdefault(root, set())
        for v in (e.u, e.v):
            if v in union_vertices:
                spots.add(v)
    for root, spots in attachments.items():
        if len(spots) != 1:
            raise ReductionError(
                f"discarded component at {sorted(spots)} is not a pendant; "
                "path enumeration missed a route"
            )
    return MetricGraph(
        frozenset(union_vertices), tuple(e for e in g.edges if e.id in union_ids)
    )


def equalize_path_lengths(gU: MetricGraph, paths):
    """Assign every vertex a level in [0, D] by shortening private edges.

    The first (shortest) path defines levels by arclength.  Each later path
    is processed as a sequence of maximal runs of not-yet-leveled edges
    between level-anchored vertices; every run is scaled so its length
    becomes exactly the level gap of its anchors.  A run between anchors at
    the same level contracts to a point, identifying its vertices (all at one
    level, so the level map stays consistent).  Only edge shortenings and
    equal-level identifications are used, so the spectral gap never drops and
    the endpoint distance D is preserved exactly.

    Paths whose runs all scale to positive gaps forward along the chain come
    out with length exactly D; a path may instead fold back and survive only
    through its edges (each spanning a level gap), which is noted.  Returns
    ``(graph, paths_of_length_D, level_positions, notes)``.
    """
    D = paths[0].length
    lengths = {e.id: e.length for e in gU.edges}
    endpoints = {e.id: (e.u, e.v) for e in gU.edges}
    parent = {v: v for v in gU.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    level: dict = {}

    def merge(a, b):
        ra, rb = find(a), find(b)
        if ra == rb:
            return
        la, lb = level.get(ra), level.get(rb)
        if la is not None and lb is not None and la != lb:
            raise ReductionError("attempted to identify vertices at different levels")
        keep, gone = sorted((ra, rb))
        parent[gone] = keep
        kept_level = la if la is not None else lb
        if kept_level is not None:
            level[keep] = kept_level
            level.pop(gone, None)

    contracted: set = set()
    leveled: set = set()
    notes: list = []
    v0 = paths[0].vertices[0]
    level[v0] = Fraction(0)

    def process_run(anchor: str, closing: str, run: list, note_tag: str) -> None:
        """Scale a run of fresh edges to exactly its anchors' level gap."""
        la, lb = level[anchor], level[find(closing)]
        target = abs(lb - la)
        run_len = sum((lengths[eid] for eid in run), Fraction(0))
        if target == 0:
            cursor = anchor
            for eid in run:
                u, v = endpoints[eid]
                nxt = find(v) if find(u) == cursor else find(u)
                merge(cursor, nxt)
                cursor = find(nxt)
                contracted.add(eid)
            notes.append(f"{note_tag}: run contracted to a point at level {float(la):.6g}")
            return
        if run_len < target:
            raise ReductionError("run shorter than its anchors' level gap")
        scale = target / run_len
        direction = 1 if lb > la else -1
        pos = la
        cursor = anchor
        for eid in run:
            lengths[eid] *= scale
            u, v = endpoints[eid]
            nxt = find(v) if find(u) == cursor else find(u)
            pos += direction * lengths[eid]
            existing = level.get(nxt)
            if existing is None:
                level[nxt] = pos
            elif existing != pos:
                raise ReductionError("run interior vertex already leveled inconsistently")
            leveled.add(eid)
            cursor = nxt
        if pos != lb:
            raise ReductionError("run did not close on its anchor level")
        if direction < 0:
            notes.append(f"{note_tag}: run folds backward across levels")

    # The shortest path defines the level parametrization.
    pos = Fraction(0)
    cursor = find(v0)
    for eid, vert in zip(paths[0].edges, paths[0].vertices[1:]):
        pos += lengths[eid]
        level[vert] = pos
        leveled.add(eid)
        cursor = vert
    if pos != D:
        raise ReductionError("shortest path length disagrees with the diameter")

    for i, path in enumerate(paths[1:], start=1):
        edges = [eid for eid in path.edges if eid not in contracted]
        if all(eid in leveled for eid in edges):
            notes.append(f"path {i}: subset of earlier paths; dropped")
            continue
        cursor = find(v0)
        run: list = []
        run_anchor = cursor
        for eid in edges:
            u, v = endpoints[eid]
            cu, cv = find(u), find(v)
            if cu == cursor:
                nxt = cv
            elif cv == cursor:
                nxt = cu
            else:
                raise ReductionError("walk broken while leveling a path")
            if eid in leveled:
                if run:
                    raise ReductionError("leveled edge inside an unleveled run")
                span = abs(level[nxt] - level[cursor])
                if span != lengths[eid]:
                    raise ReductionError("shared edge length differs from its level gap")
                run_anchor = nxt
            else:
                run.append(eid)
                if level.get(nxt) is not None:
                    process_run(run_anchor, nxt, run, f"path {i}")
                    run = []
                    run_anchor = find(nxt)
                    nxt = run_anchor
            cursor = find(nxt)
        if run:
            raise ReductionError("path ended inside an unleveled run")

    new_edges = tuple(
        Edge(e.id, find(e.u), find(e.v), lengths[e.id])
        for e in gU.edges
        if e.id not in contracted
    )
    vertices = frozenset(v for e in new_edges for v in (e.u, e.v))
    g2 = MetricGraph(vertices, new_edges)

    positions = {v: level[v] for v in vertices}
    survivors = []
    for i, path in enumerate(paths):
        edges = [eid for eid in path.edges if eid not in contracted]
        if not edges:
            continue
        rec = _record(g2, find(v0), edges)
        if rec.length == D and rec not in survivors:
            survivors.append(rec)
        elif rec.length != D:
            notes.append(f"path {i}: folded; kept only through its edges")
    return g2, survivors, positions, notes


def synchronize_levels(gE: MetricGraph, positions):
    """Insert degree-2 vertices so every edge spans two consecutive levels.

    ``positions`` maps each vertex to its exact level in [0, D].  Every edge
    must already span exactly its endpoints' level gap; fresh vertices are
    created at the interior levels an edge skips.  Returns
    ``(graph, levels, positions)`` with positions extended to new vertices.
    """
    positions = dict(positions)
    levels = sorted(set(positions.values()))

    taken_v = set(gE.vertices)
    vgen = _fresh_ids(taken_v, "s")
    taken_e = {e.id for e in gE.edges}
    new_edges = []
    for e in gE.edges:
        pu, pv = positions[e.u], positions[e.v]
        lo, hi = min(pu, pv), max(pu, pv)
        if hi - lo != e.length:
            raise ReductionError(f"edge {e.id!r}: length differs from its level gap")
        inner = [x for x in levels if lo < x < hi]
        if not inner:
            new_edges.append(e)
            continue
        lower, upper = (e.u, e.v) if pu < pv else (e.v, e.u)
        names = []
        for x in inner:
            name = next(vgen)
            positions[name] = x
            names.append(name)
        stations = [lower] + names + [upper]
        bounds = [lo] + inner + [hi]
        egen = _fresh_ids(taken_e, f"{e.id}~")
        for k in range(len(stations) - 1):
            new_edges.append(
                Edge(next(egen), stations[k], stations[k + 1], bounds[k + 1] - bounds[k])
            )
    g2 = MetricGraph(frozenset(taken_v), tuple(new_edges))
    return g2, tuple(levels), positions


def collapse_levels(gS: MetricGraph, levels, positions) -> PumpkinChain:
    """Identify all vertices at equal levels; count parallel edges per gap."""
    idx = {lev: i for i, lev in enumerate(levels)}
    counts = [0] * (len(levels) - 1)
    for e in gS.edges:
        iu, iv = idx[positions[e.u]], idx[positions[e.v]]
        if iu == iv:
            continue  # endpoints identified; the edge shrinks to a point
        if abs(iu - iv) != 1:
            raise ReductionError(f"edge {e.id!r} spans non-adjacent levels")
        counts[min(iu, iv)] += 1
    if any(c == 0 for c in counts):
        raise ReductionError("a level gap has no surviving edges")
    return PumpkinChain.build(
        [(levels[i + 1] - levels[i], counts[i]) for i in range(len(counts))]
    )


# ---------------------------------------------------------------------------
# endpoints and the full pipeline
# ---------------------------------------------------------------------------


def choose_endpoints(g: MetricGraph, mode: str = "metric"):
    """Pick and (in metric mode) insert the reduction endpoints.

    Returns ``(graph, v0, vD, D, witness)`` where D is the exact diameter in
    the requested mode and witness holds the metric-mode diameter points.
    """
    if mode == "metric":
        d_exact, (p, q) = _diameter_exact(g)
        g2, ids = insert_points(g, [p, q])
        v0, vD = ids
        if v0 == vD:
            raise ReductionError("degenerate diameter witness pair")
        check = dijkstra(g2, v0, vD)
        if check is None or check[0] != d_exact:
            raise ReductionError("diameter witnesses do not realize the diameter")
        return g2, v0, vD, d_exact, (p, q)
    if mode == "combinatorial":
        d_exact, u, v = _combinatorial_diameter_exact(g)
        return g, u, v, d_exact, None
    raise InputError(f"mode must be 'metric' or 'combinatorial', got {mode!r}")


@dataclass(frozen=True)
class ReductionTrace:
    """Everything the pipeline decided, suitable for re-rendering diagrams."""

    mode: str
    v0: str
    vD: str
    diameter_exact: Fraction
    witness: Optional[tuple]
    paths: tuple  # PathRecords as enumerated (original lengths)
    pruned_graph: MetricGraph
    equalized_graph: MetricGraph
    equalized_paths: tuple
    levels_exact: tuple
    chain: PumpkinChain
    notes: tuple
    input_vertices: int
    input_length_exact: Fraction
    lambda_check: Optional[dict] = None

    @property
    def diameter(self) -> float:
        return float(self.diameter_exact)

    @property
    def levels(self) -> tuple:
        return tuple(float(x) for x in self.levels_exact)

    def to_json_obj(self) -> dict:
        witness = None
        if self.witness is not None:
            witness = [
                {"edge": p.edge, "offset": float(p.offset)} for p in self.witness
            ]
        return {
            "mode": self.mode,
            "endpoints": [self.v0, self.vD],
            "diameter": self.diameter,
            "witness": witness,
            "paths": [
                {"edges": list(p.edges), "length": float(p.length)} for p in self.paths
            ],
            "pruned_graph": graph_to_json_obj(self.pruned_graph),
            "equalized_graph": graph_to_json_obj(self.equalized_graph),
            "levels": list(self.levels),
            "chain": chain_to_json_obj(self.chain),
            "notes": list(self.notes),
            "lambda_check": self.lambda_check,
        }


def reduce(g: MetricGraph, mode: str = "metric", tolerance: Optional[float] = None):
    """Full reduction pipeline; returns ``(chain, trace)``.

    The chain preserves the (mode-appropriate) diameter exactly, never gains
    total length, and respects the vertex-count bookkeeping: at most two
    extra vertices in metric mode, none in combinatorial mode.  When
    ``tolerance`` is given, the spectral-gap monotonicity
    ``lambda1(input) <= lambda1(chain) + tolerance`` is checked numerically
    and recorded in the trace.
    """
    g1, v0, vD, d_exact, witness = choose_endpoints(g, mode)
    kept = enumerate_paths(g1, v0, vD)
    if kept[0].length != d_exact:
        raise ReductionError("shortest path does not realize the chosen diameter")
    pruned = prune_to_union(g1, kept)
    equalized, eq_paths, positions, notes = equalize_path_lengths(pruned, kept)
    synced, levels, positions = synchronize_levels(equalized, positions)
    chain = collapse_levels(synced, levels, positions)

    if sum(chain.lengths) != d_exact:
        raise ReductionError("chain total length does not equal the diameter")
    if chain.total_length > g.total_length_exact:
        raise ReductionError("chain gained total length")
    budget = g.n_vertices + (2 if mode == "metric" else 0)
    if chain.m + 1 > budget:
        raise ReductionError("chain has more vertices than the bookkeeping allows")

    lambda_check = None
    if tolerance is not None:
        from .fem import lambda1_numeric  # deferred: scipy only when needed

        lam_in = lambda1_numeric(g, tol=1e-4).value
        lam_chain = eigenvalue(chain).lambda_
        lambda_check = {
            "lambda1_input": lam_in,
            "lambda1_chain": lam_chain,
            "tolerance": tolerance,
            "ok": lam_in <= lam_chain + tolerance,
        }

    trace = ReductionTrace(
        mode=mode,
        v0=v0,
        vD=vD,
        diameter_exact=d_exact,
        witness=witness,
        paths=tuple(kept),
        pruned_graph=pruned,
        equalized_graph=equalized,
        equalized_paths=tuple(eq_paths),
        levels_exact=tuple(levels),
        chain=chain,
        notes=tuple(notes),
        input_vertices=g.n_vertices,
        input_length_exact=g.total_length_exact,
        lambda_check=lambda_check,
    )
    return chain, trace


def write_trace(trace: ReductionTrace, path) -> None:
    Path(path).write_text(json.dumps(trace.to_json_obj(), indent=2, sort_keys=True) + "\n")
