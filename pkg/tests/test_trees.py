import itertools

import numpy as np
import pytest

from stochpump.errors import CountLimitExceeded, InvalidInput
from stochpump.graph_core import boundary, validate_graph
from stochpump.trees import (
    enumerate_spanning_trees,
    order_from_barriers,
    path_chain,
    sigma_tree,
    tree_boltzmann,
    tree_weight,
)

from conftest import random_connected_graph


def kirchhoff_count(g):
    """Matrix-tree theorem: any cofactor of the graph Laplacian."""
    B = g.incidence.astype(float)
    L = B @ B.T
    return int(round(np.linalg.det(L[1:, 1:]))) if g.vertex_count > 1 else 1


def is_spanning_tree(g, T):
    if len(T) != g.vertex_count - 1:
        return False
    parent = list(range(g.vertex_count))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for a in T:
        u, v = g.edges[a]
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def test_enumerate_g2(g2):
    assert enumerate_spanning_trees(g2) == [(0,), (1,)]


def test_enumerate_c3(c3):
    assert len(enumerate_spanning_trees(c3)) == kirchhoff_count(c3) == 3


def test_enumerate_star():
    g = validate_graph(4, [(0, 1), (0, 2), (0, 3)])
    assert enumerate_spanning_trees(g) == [(0, 1, 2)]


def test_enumeration_matches_kirchhoff_and_brute_force(rng):
    for _ in range(40):
        g = random_connected_graph(rng, max_vertices=6, max_edges=9, loops=True)
        trees = enumerate_spanning_trees(g)
        assert len(trees) == kirchhoff_count(g)
        assert trees == sorted(trees)
        brute = [T for T in itertools.combinations(range(g.edge_count), g.vertex_count - 1)
                 if is_spanning_tree(g, T)]
        assert trees == brute
        assert not any(a in g.loop_edges for T in trees for a in T)


def test_enumeration_cap():
    g = validate_graph(4, [(a, b) for a in range(4) for b in range(a + 1, 4)])
    assert len(enumerate_spanning_trees(g)) == 16
    with pytest.raises(CountLimitExceeded):
        enumerate_spanning_trees(g, cap=10)


def test_sigma_tree_c3(c3):
    assert sigma_tree(c3, (0, 1, 2)) == (0, 1)


def test_sigma_tree_keeps_bridge(g3):
    for order in itertools.permutations(range(3)):
        assert 0 in sigma_tree(g3, order)


def test_sigma_tree_of_tree_graph():
    g = validate_graph(4, [(0, 1), (1, 2), (1, 3)])
    for order in itertools.permutations(range(3)):
        assert sigma_tree(g, order) == (0, 1, 2)


def test_sigma_tree_rejects_bad_order(c3):
    with pytest.raises(InvalidInput):
        sigma_tree(c3, (0, 1, 1))


def test_tree_weight_examples(g2, c3):
    assert tree_weight((0,), [0, 5]) == 5
    assert tree_weight((0, 1), [0, 1, 2]) == 2
    assert tree_weight((1,), [0, 0]) == 0
    weights = {T: tree_weight(T, [0, 1, 2]) for T in enumerate_spanning_trees(c3)}
    assert max(weights, key=weights.get) == sigma_tree(c3, (0, 1, 2))


@pytest.mark.parametrize("name", ["g2", "c3", "g3"])
def test_sigma_tree_is_unique_maximizer(name, rng):
    from stochpump import fixtures

    g = getattr(fixtures, name)()
    trees = enumerate_spanning_trees(g)
    for _ in range(100):
        W = rng.normal(size=g.edge_count)
        w = np.array([tree_weight(T, W) for T in trees])
        best = np.flatnonzero(w == w.max())
        assert len(best) == 1
        assert trees[best[0]] == sigma_tree(g, order_from_barriers(W))


def test_path_chain_examples(g2, c3):
    assert path_chain(g2, (0,), 0, 0).tolist() == [0, 0]
    assert path_chain(g2, (0,), 0, 1).tolist() == [1, 0]
    q = path_chain(c3, (0, 1), 0, 2)
    assert q.tolist() == [1, 1, 0]
    assert boundary(c3, q).tolist() == [1, 0, -1]


def test_path_chain_outside_tree(g2):
    with pytest.raises(InvalidInput):
        path_chain(g2, (), 0, 1)


def test_path_boundary_all_pairs(fixture_graph):
    g = fixture_graph
    for T in enumerate_spanning_trees(g):
        for i in range(g.vertex_count):
            for j in range(g.vertex_count):
                expect = np.zeros(g.vertex_count, dtype=int)
                expect[i] += 1
                expect[j] -= 1
                assert np.array_equal(boundary(g, path_chain(g, T, i, j)), expect)


def test_path_concatenation(rng):
    for _ in range(30):
        g = random_connected_graph(rng, max_vertices=7, max_edges=10)
        T = sigma_tree(g, tuple(rng.permutation(g.edge_count)))
        i, k = (int(x) for x in rng.integers(0, g.vertex_count, 2))
        pik = path_chain(g, T, i, k)
        on_path = {v for a in np.flatnonzero(pik) for v in g.edges[a]} | {i}
        for j in on_path:
            assert np.array_equal(pik, path_chain(g, T, i, j) + path_chain(g, T, j, k))


def test_tree_boltzmann_examples(g2, c3):
    assert np.allclose(tree_boltzmann(g2, [0, 0], 3.0), [0.5, 0.5], atol=0, rtol=1e-15)
    assert np.allclose(tree_boltzmann(g2, [0, np.log(2)], 1.0), [2 / 3, 1 / 3], rtol=1e-14)
    rho = tree_boltzmann(c3, [0.3, -0.1, 0.7], 200.0)
    trees = enumerate_spanning_trees(c3)
    assert rho[trees.index(sigma_tree(c3, order_from_barriers([0.3, -0.1, 0.7])))] > 1 - 1e-12


def test_tree_boltzmann_normalized_and_shift_invariant(rng):
    for _ in range(30):
        g = random_connected_graph(rng, max_vertices=5, max_edges=8)
        W = rng.normal(size=g.edge_count)
        beta = float(rng.uniform(0, 50))
        rho = tree_boltzmann(g, W, beta)
        assert abs(rho.sum() - 1) < 1e-12 and np.all(rho >= 0)
        assert np.allclose(tree_boltzmann(g, W + 3.7, beta), rho, rtol=1e-12, atol=1e-15)
