import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rwlab import graphs as G

FAMS = st.sampled_from(["line", "ladder", "grid2d", "stretched_line"])


def _params(family, stretch=3):
    return {"stretch": stretch} if family == "stretched_line" else {}


def test_window_sizes():
    assert len(G.free_window("line", 5)) == 11
    assert len(G.free_window("ladder", 1)) == 6
    assert len(G.free_window("ladder", 2)) == 10
    assert len(G.free_window("grid2d", 2)) == 13
    # stretched line N=1, r=1: {-1, 0, 1} plus the one interior vertex of the length-2 path
    F = G.free_window("stretched_line", 1, {"stretch": 1})
    assert len(F) == 4
    assert F.multiplicity(-1, ("s", 1, 1)) == 1 and F.multiplicity(("s", 1, 1), 1) == 1


def test_ball_sizes_grid():
    assert G.ball_sizes("grid2d", [1, 2, 3]) == {1: 5, 2: 13, 3: 25}
    assert G.ball_sizes("line", [4]) == {4: 9}


def test_wired_boundary_degree():
    F = G.wired_truncation("grid2d", {}, 1)
    # four leaves with three outside neighbours each
    assert F.deg(G.BOUNDARY) == 12
    F = G.wired_truncation("line", {}, 1)
    assert F.deg(G.BOUNDARY) == 2 and len(F) == 4


def test_wired_truncation_too_large():
    with pytest.raises(ValueError):
        G.wired_truncation("grid2d", {}, 50, max_vertices=100)


def test_invalid_params():
    with pytest.raises(ValueError):
        G.build_family("grid2d", {"radius": 0})
    with pytest.raises(ValueError):
        G.build_family("stretched_line", {"radius": 3})
    with pytest.raises(ValueError):
        G.build_family("torus", {"radius": 3})


def test_disconnected_and_loops_rejected():
    with pytest.raises(ValueError):
        G.graph_from_edges([(0, 1), (2, 3)])
    with pytest.raises(ValueError):
        G.graph_from_edges([(0, 0)])


def test_multiedges_accumulate():
    F = G.graph_from_edges([(0, 1), (1, 0), (1, 2)])
    assert F.multiplicity(0, 1) == 2
    assert F.deg(1) == 3


def test_exhaustion_must_increase():
    with pytest.raises(ValueError):
        G.exhaustion_sets("line", [4, 4])
    spec, sets = G.exhaustion_sets("grid2d", [1, 2, 4])
    assert all(a < b for a, b in zip(sets, sets[1:]))
    assert spec.radii == (1, 2, 4)


@given(FAMS, st.integers(1, 6), st.booleans())
def test_degree_sum_and_symmetry(family, r, wired):
    p = _params(family)
    F = G.wired_truncation(family, p, r) if wired else G.free_window(family, r, p)
    assert F.degree.sum() == 2 * sum(m for _, _, m in F.edges)
    A = F.adjacency
    assert (A != A.T).nnz == 0
    assert F.is_connected()


@given(FAMS, st.integers(1, 6))
def test_wired_degrees_match_infinite_graph(family, r):
    p = _params(family)
    F = G.wired_truncation(family, p, r)
    for v in F.vertices:
        if v != G.BOUNDARY:
            assert F.deg(v) == len(G.neighbours(family, v, p))


@given(FAMS, st.integers(1, 5))
def test_json_round_trip(family, r):
    F = G.wired_truncation(family, _params(family), r)
    H = G.FiniteGraph.loads(json.dumps(json.loads(F.dumps())))
    assert H.vertices == F.vertices
    assert H.edges == F.edges
    assert H.boundary == F.boundary
    assert np.array_equal(H.degree, F.degree)


@given(FAMS, st.integers(1, 5))
def test_interior_vertices_are_fully_inside(family, r):
    p = _params(family)
    F = G.free_window(family, r, p)
    inner = set(G.interior_vertices(F))
    for v in F.vertices:
        assert (v in inner) == all(w in F for w in G.neighbours(family, v, p))


@given(st.sampled_from(["line", "ladder", "grid2d"]), st.integers(1, 8))
def test_neighbour_relation_is_symmetric(family, r):
    for v in G.window_vertices(family, r):
        for w in G.neighbours(family, v):
            assert v in G.neighbours(family, w)
