import math
from fractions import Fraction
from random import Random

import pytest

from specgap.errors import InputError, ValidationError
from specgap.fem import lambda1_numeric
from specgap.graphs import (
    GraphPoint,
    MetricGraph,
    canonical_key,
    combinatorial_diameter,
    cut_pendant,
    diameter,
    distance,
    graph_from_json_obj,
    graph_to_json_obj,
    identify_vertices,
    insert_points,
    shorten_edge,
    vertex_point,
)
from specgap.testing import random_graph

from conftest import (
    diameter_oracle,
    point_distance_oracle,
    vertex_distance_oracle,
)


def triangle_345():
    return MetricGraph.build(
        ["A", "B", "C"],
        [("ab", "A", "B", 5.0), ("bc", "B", "C", 3.0), ("ca", "C", "A", 4.0)],
    )


# ---------------------------------------------------------------------------
# distance
# ---------------------------------------------------------------------------


def test_distance_direct_edge_beats_detour():
    g = triangle_345()
    assert distance(g, vertex_point(g, "A"), vertex_point(g, "B")) == 5.0


def test_distance_on_loop_is_circle_metric():
    g = MetricGraph.build(["A"], [("loop", "A", "A", 5.0)])
    for t, s in [(0.5, 1.0), (0.25, 4.75), (1.0, 4.0)]:
        p, q = GraphPoint("loop", Fraction(t)), GraphPoint("loop", Fraction(s))
        u = abs(t - s)
        assert distance(g, p, q) == pytest.approx(min(u, 5.0 - u), abs=1e-15)


def test_distance_interior_point_to_vertex():
    # interior of AB at offset 2 from A, to C: both routings cost 6
    g = triangle_345()
    p = GraphPoint("ab", Fraction(2))
    q = vertex_point(g, "C")
    assert distance(g, p, q) == 6.0
    # independent oracle: scipy APSP + four-way routing
    _, idx, dv = vertex_distance_oracle(g)
    val = point_distance_oracle(g, dv, idx, g.edge("ab"), 2.0, g.edge("ca"), 0.0)
    assert val == pytest.approx(6.0, abs=1e-12)


def test_distance_nonexistent_edge_is_input_error():
    g = triangle_345()
    with pytest.raises(InputError):
        distance(g, GraphPoint("zz", Fraction(0)), vertex_point(g, "A"))
    with pytest.raises(InputError):
        distance(g, GraphPoint("ab", Fraction(6)), vertex_point(g, "A"))


def test_distance_is_a_metric_on_random_points():
    rng = Random(4)
    for _ in range(25):
        g = random_graph(rng)
        pts = []
        for _ in range(3):
            e = rng.choice(g.edges)
            pts.append(GraphPoint(e.id, Fraction(rng.uniform(0, float(e.length)))))
        a, b, c = pts
        dab = distance(g, a, b)
        dba = distance(g, b, a)
        assert dab == dba
        assert dab + distance(g, b, c) >= distance(g, a, c) - 1e-12
        assert distance(g, a, a) == 0.0
        if canonical_key(g, a) != canonical_key(g, b):
            assert dab > 0.0


def test_zero_distance_iff_same_canonical_point():
    g = triangle_345()
    # endpoint of ab at B == endpoint of bc at B
    p = GraphPoint("ab", Fraction(5))
    q = GraphPoint("bc", Fraction(0))
    assert canonical_key(g, p) == canonical_key(g, q) == ("vertex", "B")
    assert distance(g, p, q) == 0.0


# ---------------------------------------------------------------------------
# diameters
# ---------------------------------------------------------------------------


def test_diameter_interval():
    g = MetricGraph.build(["A", "B"], [("e", "A", "B", 2.5)])
    val, (p, q) = diameter(g)
    assert val == 2.5
    assert {canonical_key(g, p), canonical_key(g, q)} == {("vertex", "A"), ("vertex", "B")}


def test_diameter_loop_is_half_length():
    g = MetricGraph.build(["A"], [("loop", "A", "A", 3.0)])
    val, (p, q) = diameter(g)
    assert val == 1.5
    assert distance(g, p, q) == 1.5


def test_diameter_lollipop():
    # stem of length 1 plus loop of length 2: free end to loop antipode
    g = MetricGraph.build(["A", "B"], [("stem", "A", "B", 1.0), ("loop", "B", "B", 2.0)])
    val, (p, q) = diameter(g)
    assert val == 2.0
    assert distance(g, p, q) == 2.0


def test_diameter_matches_grid_oracle_on_random_graphs():
    rng = Random(11)
    for _ in range(12):
        g = random_graph(rng)
        val, (p, q) = diameter(g)
        assert distance(g, p, q) == pytest.approx(val, rel=1e-12)
        sampled, err = diameter_oracle(g, grid=30)
        assert val >= sampled - 1e-9
        assert val <= sampled + err + 1e-9


def test_combinatorial_diameter_examples():
    assert combinatorial_diameter(triangle_345()) == 5.0
    path = MetricGraph.build(["A", "B", "C"], [("e1", "A", "B", 1.0), ("e2", "B", "C", 1.0)])
    assert combinatorial_diameter(path) == 2.0
    pumpkin = MetricGraph.build(["A", "B"], [(f"e{i}", "A", "B", 1.5) for i in range(4)])
    assert combinatorial_diameter(pumpkin) == 1.5


def test_combinatorial_diameter_needs_two_vertices():
    g = MetricGraph.build(["A"], [("loop", "A", "A", 1.0)])
    with pytest.raises(InputError):
        combinatorial_diameter(g)


def test_diameter_at_least_combinatorial_and_equal_on_paths():
    rng = Random(12)
    for _ in range(15):
        g = random_graph(rng)
        if g.n_vertices < 2:
            continue
        assert diameter(g)[0] >= combinatorial_diameter(g) - 1e-12
    # on a path graph the two diameters coincide
    path = MetricGraph.build(
        ["A", "B", "C", "D"],
        [("e1", "A", "B", 0.7), ("e2", "B", "C", 1.1), ("e3", "C", "D", 0.4)],
    )
    assert diameter(path)[0] == combinatorial_diameter(path) == pytest.approx(2.2)


# ---------------------------------------------------------------------------
# surgery
# ---------------------------------------------------------------------------


def test_identify_interval_endpoints_gives_loop_and_raises_gap():
    g = MetricGraph.build(["A", "B"], [("e", "A", "B", 1.0)])
    looped = identify_vertices(g, "A", "B")
    assert looped.n_vertices == 1
    assert looped.edges[0].is_loop
    lam_interval = lambda1_numeric(g, tol=1e-6).value
    lam_loop = lambda1_numeric(looped, tol=1e-6).value
    assert lam_interval == pytest.approx(math.pi**2, rel=1e-6)
    assert lam_loop == pytest.approx(4 * math.pi**2, rel=1e-6)


def test_cut_pendant_edge_from_two_edge_path():
    g = MetricGraph.build(["A", "B", "C"], [("e1", "A", "B", 1.0), ("e2", "B", "C", 2.0)])
    cut = cut_pendant(g, "B", seed_vertex="C")
    assert cut.n_edges == 1 and cut.edges[0].id == "e1"
    assert cut.vertices == frozenset({"A", "B"})


def test_cut_pendant_loop_via_seed_edge():
    g = MetricGraph.build(["A", "B"], [("stem", "A", "B", 1.0), ("loop", "B", "B", 2.0)])
    cut = cut_pendant(g, "B", seed_edge="loop")
    assert cut.n_edges == 1 and cut.edges[0].id == "stem"


def test_shorten_triangle_edge_raises_gap():
    g = triangle_345()
    g2 = shorten_edge(g, "ab", 2.0)
    lam_before = lambda1_numeric(g, tol=1e-5).value
    lam_after = lambda1_numeric(g2, tol=1e-5).value
    assert lam_after >= lam_before * (1 - 1e-4)


def test_shorten_to_zero_contracts_edge():
    g = triangle_345()
    g2 = shorten_edge(g, "ab", 0)
    assert g2.n_vertices == 2 and g2.n_edges == 2
    # remaining edges become parallel between the merged vertex and C
    assert {float(e.length) for e in g2.edges} == {3.0, 4.0}


def test_surgery_monotonicity_random_sample():
    from specgap.testing import random_surgery

    rng = Random(99)
    for _ in range(6):
        g = random_graph(rng)
        before, after, desc = random_surgery(rng, g)
        lam_b = lambda1_numeric(before, tol=1e-4).value
        lam_a = lambda1_numeric(after, tol=1e-4).value
        assert lam_a >= lam_b * (1 - 1e-3), desc


def test_surgery_errors():
    g = triangle_345()
    with pytest.raises(InputError):
        shorten_edge(g, "ab", 7.0)
    with pytest.raises(InputError):
        shorten_edge(g, "nope", 1.0)
    with pytest.raises(InputError):
        identify_vertices(g, "A", "A")
    with pytest.raises(InputError):
        identify_vertices(g, "A", "Z")
    with pytest.raises(InputError):
        cut_pendant(g, "A", seed_vertex="A")
    with pytest.raises(InputError):
        cut_pendant(g, "A")  # needs a seed


# ---------------------------------------------------------------------------
# insertion, canonicalization, JSON
# ---------------------------------------------------------------------------


def test_insert_points_splits_edges_and_resolves_endpoints():
    g = triangle_345()
    pts = [GraphPoint("ab", Fraction(2)), GraphPoint("ab", Fraction(4)), GraphPoint("bc", Fraction(0))]
    g2, ids = insert_points(g, pts)
    assert ids[2] == "B"  # offset 0 resolves to the endpoint vertex
    assert g2.n_vertices == 5
    assert g2.total_length == g.total_length
    # distances are preserved by insertion
    assert combinatorial_diameter(g2) == 5.0


def test_insert_duplicate_offsets_share_a_vertex():
    g = triangle_345()
    g2, ids = insert_points(g, [GraphPoint("ab", Fraction(2)), GraphPoint("ab", Fraction(2))])
    assert ids[0] == ids[1]
    assert g2.n_vertices == 4


def test_json_round_trip():
    g = triangle_345()
    obj = graph_to_json_obj(g)
    g2 = graph_from_json_obj(obj)
    assert g2 == g
    assert graph_to_json_obj(g2) == obj


def test_json_validation_errors():
    from specgap.errors import ParseError

    with pytest.raises(ParseError):
        graph_from_json_obj({"vertices": ["A"]})
    with pytest.raises(ParseError):
        graph_from_json_obj({"vertices": ["A"], "edges": [{"id": "e", "from": "A", "to": "A"}]})
    with pytest.raises(ValidationError):
        graph_from_json_obj(
            {"vertices": ["A", "B"], "edges": [{"id": "e", "from": "A", "to": "B", "length": -1.0}]}
        )
    with pytest.raises(ValidationError):
        graph_from_json_obj(
            {
                "vertices": ["A", "B", "C"],
                "edges": [{"id": "e", "from": "A", "to": "B", "length": 1.0}],
            }
        )  # disconnected


def test_graph_invariants_rejected():
    with pytest.raises(ValidationError):
        MetricGraph.build(["A", "B"], [("e", "A", "Z", 1.0)])
    with pytest.raises(InputError):
        MetricGraph.build(["A", "B"], [("e", "A", "B", 0.0)])
    with pytest.raises(ValidationError):
        MetricGraph.build(["A", "B"], [("e", "A", "B", 1.0), ("e", "A", "B", 2.0)])
