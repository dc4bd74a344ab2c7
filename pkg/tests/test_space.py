import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import connected_graphs
from oracles import floyd_warshall, shortest_simple_cycle
from propa.errors import Rejection
from propa.space import (
    INFINITE, CoarseUnion, Graph, ball, bfs_metric, build_graph, coarse_disjoint_union, diameter,
    girth, load_space, subset,
)


def test_cycle_and_complete():
    g = build_graph("cycle(6)")
    assert g.vertex_count == 6 and g.edge_count == 6
    assert all(g.degree(v) == 2 for v in range(6))
    assert build_graph("complete:4").edge_count == 6


@pytest.mark.parametrize("name,n,m,gi", [
    ("petersen", 10, 15, 5), ("heawood", 14, 21, 6), ("mcgee", 24, 36, 7), ("tutte-coxeter", 30, 45, 8),
])
def test_cages(name, n, m, gi):
    g = build_graph(name)
    assert (g.vertex_count, g.edge_count) == (n, m)
    assert all(g.degree(v) == 3 for v in range(n))
    assert girth(g) == gi == shortest_simple_cycle(g)


def test_petersen_diameter():
    assert diameter(build_graph("petersen")) == 2


def test_bfs_distances():
    assert bfs_metric(build_graph("cycle:6")).distance(0, 3) == 3
    assert bfs_metric(build_graph("path:4")).distance(0, 3) == 3


def test_girth_small():
    assert girth(build_graph("complete:3")) == 3
    assert girth(build_graph("path:5")) == INFINITE
    assert math.isinf(girth(build_graph("path:1")))


def test_rejections():
    with pytest.raises(Rejection, match="components"):
        build_graph({"vertices": 4, "edges": [[0, 1], [2, 3]]})
    with pytest.raises(Rejection):
        build_graph("cycle:2")
    with pytest.raises(Rejection):
        build_graph("path:0")
    with pytest.raises(Rejection):
        coarse_disjoint_union([])
    with pytest.raises(Rejection):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(Rejection):
        ball(build_graph("cycle:5"), 0, -1)


def test_union_cross_distances():
    c4, c8 = build_graph("cycle:4"), build_graph("cycle:8")
    U = coarse_disjoint_union([c4, c8])
    assert U.distance(0, 4) == 5
    assert U.distance(4, 8) == 4
    V = coarse_disjoint_union([c4, c4, c8])
    assert V.distance(0, 4) == 3
    assert V.distance(0, 8) == 5


def test_balls():
    C = ball(build_graph("cycle:8"), 0, 2)
    assert set(C.members) == {6, 7, 0, 1, 2} and C.diameter == 4
    one = ball(build_graph("cycle:8"), 3, 0)
    assert one.members == (3,) and one.diameter == 0
    U = coarse_disjoint_union([build_graph("cycle:4"), build_graph("cycle:8")])
    assert len(ball(U, 0, 5)) == 12


def test_json_and_dot_roundtrip(tmp_path):
    U = coarse_disjoint_union([build_graph("petersen"), build_graph("cycle:5")])
    path = tmp_path / "u.json"
    import json
    path.write_text(json.dumps(U.to_json()))
    V = load_space(path)
    assert [b.adjacency for b in V.blocks] == [b.adjacency for b in U.blocks]
    dot = U.to_dot()
    assert dot.count("subgraph cluster_") == 2


@given(connected_graphs())
def test_metric_axioms_and_oracle(g):
    M = bfs_metric(g)
    assert M.check_axioms()
    fw = floyd_warshall(g)
    assert all(M.distance(i, j) == fw[i][j] for i in range(g.vertex_count) for j in range(g.vertex_count))


@given(connected_graphs(min_n=3))
def test_girth_matches_cycle_enumeration(g):
    ref = shortest_simple_cycle(g)
    assert girth(g) == (INFINITE if ref is None else ref)


@given(connected_graphs(min_n=3), st.data())
def test_large_girth_balls_are_trees(g, data):
    gi = girth(g)
    x = data.draw(st.integers(0, g.vertex_count - 1))
    r = data.draw(st.integers(0, 4))
    if gi > 2 * r:
        members = ball(g, x, r).members
        inside = set(members)
        edges = [(u, v) for u, v in g.edges() if u in inside and v in inside]
        assert len(edges) == len(members) - 1


@given(connected_graphs(), st.data())
def test_ball_monotone(g, data):
    x = data.draw(st.integers(0, g.vertex_count - 1))
    r = data.draw(st.integers(0, 5))
    s = data.draw(st.integers(r, 6))
    assert set(ball(g, x, r).members) <= set(ball(g, x, s).members)


@given(st.lists(connected_graphs(max_n=6), min_size=2, max_size=4))
def test_union_formula(blocks):
    U = CoarseUnion(blocks)
    diams = U.block_diameters
    for x, y in itertools.combinations(range(U.size), 2):
        (i, a), (j, b) = U.block_of(x), U.block_of(y)
        if i != j:
            assert U.distance(x, y) == max(diams[i], diams[j]) + 1
        else:
            assert U.distance(x, y) == bfs_metric(blocks[i]).distance(a, b)
    full = U.submatrix(range(U.size), range(U.size))
    assert np.array_equal(full, full.T)


def test_subset_diameter():
    U = coarse_disjoint_union([build_graph("cycle:4"), build_graph("cycle:8")])
    assert subset(U, [0, 1, 4]).diameter == 5
