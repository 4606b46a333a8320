import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

import ealab as ea
from ealab.errors import (
    Disconnected,
    EmptyInterior,
    InteriorDisconnected,
    InvalidTopology,
    NotSimple,
    TooFewEdges,
    TorusTooSmall,
)


def test_open_cube_1d_is_a_path():
    g = ea.build_cube(ea.Topology.open_cube(1, 3))
    assert g.n_vertices == 4
    assert g.n_edges == 3
    assert list(g.boundary) == [0, 3]
    assert list(g.interior) == [1, 2]


def test_open_cube_2d_counts():
    g = ea.build_cube(ea.Topology.open_cube(2, 2))
    assert g.n_vertices == 9
    assert g.n_edges == 12
    assert len(g.boundary) == 8
    assert len(g.interior) == 1


def test_torus_2d_counts_and_regularity():
    g = ea.build_cube(ea.Topology.torus(2, 3))
    assert g.n_vertices == 9
    assert g.n_edges == 18
    assert len(g.boundary) == 0
    assert all(g.degree(v) == 4 for v in range(9))


@pytest.mark.parametrize("d,L", [(1, 3), (1, 6), (2, 3), (2, 5), (3, 3)])
def test_torus_regular_of_degree_2d(d, L):
    g = ea.build_cube(ea.Topology.torus(d, L))
    assert g.n_edges == d * L**d
    assert all(g.degree(v) == 2 * d for v in range(g.n_vertices))


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("L", [2, 3, 4, 5, 6])
def test_open_cube_boundary_counts(d, L):
    g = ea.build_cube(ea.Topology.open_cube(d, L))
    assert len(g.interior) == (L - 1) ** d
    assert len(g.boundary) == (L + 1) ** d - (L - 1) ** d


def test_free_cube_has_no_boundary():
    g = ea.build_cube(ea.Topology.free_cube(2, 3))
    assert len(g.boundary) == 0
    assert len(g.interior) == g.n_vertices == 16


def test_build_cube_rejects_bad_parameters():
    with pytest.raises(InvalidTopology):
        ea.build_cube(ea.Topology.open_cube(0, 3))
    with pytest.raises(InvalidTopology):
        ea.build_cube(ea.Topology.open_cube(2, 0))
    with pytest.raises(TorusTooSmall):
        ea.build_cube(ea.Topology.torus(2, 2))
    # Degenerate cubes violate the standing assumptions (two edges, a
    # nonempty interior) and are rejected by validation.
    with pytest.raises((TooFewEdges, EmptyInterior)):
        ea.build_cube(ea.Topology.open_cube(1, 1))
    with pytest.raises(EmptyInterior):
        ea.build_cube(ea.Topology.open_cube(2, 1))


def test_build_explicit_validation():
    ea.build_explicit(3, [(0, 1), (1, 2), (0, 2)])  # triangle accepted
    with pytest.raises(Disconnected):
        ea.build_explicit(4, [(0, 1), (2, 3)])
    with pytest.raises(NotSimple):
        ea.build_explicit(3, [(0, 0), (1, 2)])
    with pytest.raises(NotSimple):
        ea.build_explicit(3, [(0, 1), (1, 0), (1, 2)])
    with pytest.raises(TooFewEdges):
        ea.build_explicit(2, [(0, 1)])
    with pytest.raises(InteriorDisconnected):
        ea.build_explicit(4, [(0, 1), (1, 2), (2, 3)], boundary=[1])
    with pytest.raises(EmptyInterior):
        ea.build_explicit(3, [(0, 1), (1, 2)], boundary=[0, 1, 2])


def test_edge_order_is_lexicographic():
    g = ea.build_cube(ea.Topology.torus(2, 4))
    pairs = [tuple(e) for e in g.edges]
    assert pairs == sorted(pairs)
    assert all(u < v for u, v in pairs)


def test_graph_distances_against_scipy():
    for g in (ea.build_cube(ea.Topology.open_cube(2, 4)),
              ea.build_cube(ea.Topology.torus(2, 5)),
              ea.build_explicit(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)])):
        m = csr_matrix((np.ones(g.n_edges), (g.edges[:, 0], g.edges[:, 1])),
                       shape=(g.n_vertices, g.n_vertices))
        ref = shortest_path(m, directed=False, unweighted=True)
        for i in range(g.n_vertices):
            got = g.distances_from(i)
            assert np.array_equal(got, ref[i].astype(int))


def test_path_and_cycle_distances():
    path = ea.build_cube(ea.Topology.open_cube(1, 3))
    assert ea.graph_distance(path, 0, 3) == 3
    assert ea.graph_distance(path, 2, 2) == 0
    cycle = ea.build_cube(ea.Topology.torus(1, 5))
    assert ea.graph_distance(cycle, 0, 3) == 2


def test_distance_to_boundary():
    g = ea.build_cube(ea.Topology.open_cube(1, 4))
    assert ea.distance_to_boundary(g, 2) == 2
    assert ea.distance_to_boundary(g, 0) == 0
    free = ea.build_cube(ea.Topology.free_cube(2, 3))
    assert ea.distance_to_boundary(free, 5) == float("inf")


def test_edge_boundary_examples():
    path = ea.build_cube(ea.Topology.open_cube(1, 3))
    cut = ea.edge_boundary(path, [1, 2])
    assert [tuple(path.edges[e]) for e in cut] == [(0, 1), (2, 3)]
    assert len(ea.edge_boundary(path, [])) == 0
    cyc = ea.build_cube(ea.Topology.torus(1, 4))
    cut = ea.edge_boundary(cyc, [0])
    assert all(0 in tuple(cyc.edges[e]) for e in cut)
    assert len(cut) == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(5, 12), st.integers(0, 2**30), st.data())
def test_edge_boundary_complement_symmetry(n, seed, data):
    rng = np.random.default_rng(seed)
    from oracles import random_tree_edges
    edges = random_tree_edges(rng, n)
    extra = [(i, j) for i in range(n) for j in range(i + 1, n)
             if (i, j) not in edges and rng.random() < 0.15]
    g = ea.build_explicit(n, edges + extra)
    region = data.draw(st.sets(st.integers(0, n - 1)))
    region = sorted(region)
    comp = sorted(set(range(n)) - set(region))
    assert np.array_equal(ea.edge_boundary(g, region), ea.edge_boundary(g, comp))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**30))
def test_graph_distance_is_a_metric(seed):
    rng = np.random.default_rng(seed)
    from oracles import random_tree_edges
    n = 9
    edges = random_tree_edges(rng, n)
    extra = [(i, j) for i in range(n) for j in range(i + 1, n)
             if (i, j) not in edges and rng.random() < 0.2]
    g = ea.build_explicit(n, edges + extra)
    for _ in range(20):
        i, j, k = rng.integers(0, n, 3)
        dij = ea.graph_distance(g, int(i), int(j))
        assert dij == ea.graph_distance(g, int(j), int(i))
        assert dij <= ea.graph_distance(g, int(i), int(k)) + ea.graph_distance(g, int(k), int(j))
        assert (dij == 0) == (i == j)


def test_graph_file_round_trip(tmp_path):
    g = ea.build_explicit(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)], boundary=[0])
    path = tmp_path / "graph.txt"
    ea.save_graph(g, path)
    g2 = ea.load_graph(path)
    assert g2.n_vertices == g.n_vertices
    assert np.array_equal(g2.edges, g.edges)
    assert np.array_equal(g2.boundary, g.boundary)


def test_load_graph_format(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("4 3 1\n0 1\n1 2\n2 3\n0\n")
    g = ea.load_graph(path)
    assert g.n_vertices == 4
    assert list(g.boundary) == [0]
    bad = tmp_path / "bad.txt"
    bad.write_text("4 3 1\n0 1\n1 2\n")
    with pytest.raises(ValueError):
        ea.load_graph(bad)


def test_cube_coordinates_row_major():
    g = ea.build_cube(ea.Topology.open_cube(2, 2))
    assert g.vertex_coords(0) == (0, 0)
    assert g.vertex_coords(1) == (0, 1)
    assert g.vertex_coords(3) == (1, 0)
    assert g.vertex_at((1, 1)) == 4
