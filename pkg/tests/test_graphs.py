"""Graph container, spanning-tree determinants, and resistance identities."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import errwlab as el
from helpers import connected_graphs, random_connected_graph, spanning_tree_sum_brute


def test_construction_canonicalizes_edges():
    g = el.Graph(n=3, edges=((2, 1), (1, 0), (2, 0)))
    assert g.edges == ((0, 1), (0, 2), (1, 2))
    assert g.m == 3
    assert list(g.degrees) == [2, 2, 2]


def test_construction_errors():
    with pytest.raises(el.GraphError):
        el.Graph(n=0, edges=())
    with pytest.raises(el.GraphError):
        el.Graph(n=3, edges=((0, 0), (0, 1), (1, 2)))
    with pytest.raises(el.GraphError):
        el.Graph(n=3, edges=((0, 1), (1, 0), (1, 2)))
    with pytest.raises(el.GraphError):
        el.Graph(n=4, edges=((0, 1), (2, 3)))
    with pytest.raises(el.GraphError):
        el.Graph(n=3, edges=((0, 3), (0, 1), (1, 2)))


def test_neighbors_and_incident_edges():
    g = el.path_graph(4)
    assert g.neighbors(1) == ((0, 0), (2, 1))
    assert list(g.incident_edges(1)) == [0, 1]
    assert g.degree(0) == 1 and g.degree(1) == 2


def test_tree_sum_matches_brute_force_enumeration():
    rng = np.random.default_rng(11)
    for _ in range(25):
        g = random_connected_graph(rng, n_lo=3, n_hi=8)
        w = rng.uniform(0.2, 3.0, size=g.m)
        brute = spanning_tree_sum_brute(g, w)
        assert_allclose(el.spanning_tree_log_sum(g, w), math.log(brute),
                        rtol=1e-10)


def test_tree_sum_known_values():
    tri = el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
    assert_allclose(el.spanning_tree_log_sum(tri, np.ones(3)), math.log(3.0))
    # complete graph on n vertices has n^(n-2) spanning trees
    k5 = el.complete_graph(5)
    assert_allclose(el.spanning_tree_log_sum(k5, np.ones(k5.m)),
                    3 * math.log(5.0), rtol=1e-12)
    # any tree has exactly one spanning tree: the product of its weights
    t = el.path_graph(6)
    w = np.array([0.5, 2.0, 1.5, 3.0, 0.25])
    assert_allclose(el.spanning_tree_log_sum(t, w), np.log(w).sum(), rtol=1e-12)


def test_tree_sum_scaling_and_extreme_weights():
    g = el.cycle_graph(4)
    w = np.array([1.0, 2.0, 3.0, 4.0])
    base = el.spanning_tree_log_sum(g, w)
    for c in (1e-150, 1e150):
        assert_allclose(el.spanning_tree_log_sum(g, c * w),
                        base + (g.n - 1) * math.log(c), rtol=1e-10)


def test_effective_resistance_series_parallel():
    path = el.path_graph(4)
    w = np.array([1.0, 0.5, 2.0])
    # series: resistances add as 1/w
    assert_allclose(el.effective_resistance(path, w, 0, 3),
                    1.0 + 2.0 + 0.5, rtol=1e-12)
    tri = el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
    # parallel: edge (0,1) against the two-edge path through 2
    assert_allclose(el.effective_resistance(tri, np.ones(3), 0, 1),
                    2.0 / 3.0, rtol=1e-12)


def test_effective_resistance_properties():
    rng = np.random.default_rng(5)
    for _ in range(10):
        g = random_connected_graph(rng, n_lo=4, n_hi=7)
        w = rng.uniform(0.3, 2.5, size=g.m)
        r = el.resistance_matrix(g, w)
        assert_allclose(r, r.T, atol=1e-12)
        assert np.all(np.diag(r) == 0.0)
        assert_allclose(r[0, 1], el.effective_resistance(g, w, 0, 1), rtol=1e-10)
        # triangle inequality for resistance distance
        for _ in range(5):
            i, j, k = rng.integers(g.n, size=3)
            assert r[i, j] <= r[i, k] + r[k, j] + 1e-12


def test_rayleigh_monotonicity():
    rng = np.random.default_rng(17)
    g = random_connected_graph(rng, n_lo=5, n_hi=6, extra_prob=0.8)
    w = rng.uniform(0.5, 2.0, size=g.m)
    base = el.effective_resistance(g, w, 0, g.n - 1)
    for e in range(g.m):
        bumped = w.copy()
        bumped[e] *= 2.0
        assert el.effective_resistance(g, bumped, 0, g.n - 1) <= base + 1e-12


def test_bfs_distances_and_diameter():
    g = el.path_graph(5)
    assert list(el.bfs_distances(g, 0)) == [0, 1, 2, 3, 4]
    assert el.diameter(g) == 4
    assert el.diameter(el.complete_graph(4)) == 1
    assert el.diameter(el.cycle_graph(6)) == 3


def test_shortest_path_tree_structure():
    g = el.cycle_graph(5)
    spt = el.shortest_path_tree(g, 0)
    assert spt.root == 0
    assert spt.parent[0] == -1
    dist = el.bfs_distances(g, 0)
    for v in range(1, 5):
        assert dist[spt.parent[v]] == dist[v] - 1
    # parents precede children in the replay order
    assert spt.order[0] == 0
    seen = {0}
    for v in spt.order[1:]:
        assert spt.parent[v] in seen
        seen.add(v)


def test_is_tree():
    assert el.is_tree(el.path_graph(7))
    assert not el.is_tree(el.cycle_graph(4))


def test_small_graph_census():
    # labeled connected graphs on 2, 3, 4 vertices: 1, 4, 38
    assert len(connected_graphs(2)) == 1
    assert len(connected_graphs(3)) == 4
    assert len(connected_graphs(4)) == 38


def test_as_weights_validation():
    g = el.path_graph(3)
    w = el.as_weights(g, [2.0, 0.5])
    assert w.dtype == np.float64
    with pytest.raises(ValueError):
        el.as_weights(g, [1.0, -1.0])
    with pytest.raises(ValueError):
        el.as_weights(g, [1.0, 1.0, 1.0])


def test_vertex_weights_sums_incident_edges():
    tri = el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
    a = np.array([1.0, 2.0, 4.0])
    assert_allclose(el.vertex_weights(tri, a), [3.0, 5.0, 6.0])
