import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochpump.errors import DimensionMismatch, Disconnected, IndexOutOfRange, InvalidInput, NotConserved
from stochpump.graph_core import boundary, coboundary, cycle_basis, to_cycle_coords, validate_graph

from conftest import random_connected_graph


def dense_incidence(g):
    B = np.zeros((g.vertex_count, g.edge_count))
    for a, (u, v) in enumerate(g.edges):
        B[u, a] += 1
        B[v, a] -= 1
    return B


def test_validate_fixture(g2):
    assert g2.vertex_count == 2 and g2.edges == ((0, 1), (0, 1))


def test_validate_disconnected():
    with pytest.raises(Disconnected):
        validate_graph(3, [(0, 1)])


def test_validate_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        validate_graph(2, [(0, 3)])


def test_validate_rejects_reversed_edge():
    with pytest.raises(InvalidInput):
        validate_graph(2, [(1, 0)])


def test_validate_keeps_order_and_loops():
    g = validate_graph(3, [(1, 2), (0, 0), (0, 1), (0, 1)])
    assert g.edges == ((1, 2), (0, 0), (0, 1), (0, 1))
    assert g.loop_edges == (1,)


def test_boundary_basis_edge(g2):
    assert boundary(g2, [1, 0]).tolist() == [1, -1]


def test_boundary_loop_is_zero():
    g = validate_graph(2, [(0, 1), (1, 1)])
    assert boundary(g, [0, 1]).tolist() == [0, 0]


def test_boundary_matches_dense_oracle(c3, rng):
    for _ in range(20):
        c = rng.integers(-5, 6, 3)
        out = boundary(c3, c)
        assert out.dtype.kind == "i"
        assert np.array_equal(out, dense_incidence(c3) @ c)
        assert out.sum() == 0


def test_boundary_dimension_mismatch(g2):
    with pytest.raises(DimensionMismatch):
        boundary(g2, [1, 2, 3])
    with pytest.raises(DimensionMismatch):
        coboundary(g2, [1])


def test_coboundary_formula(g2):
    assert coboundary(g2, [1, 0]).tolist() == [1, 1]


def test_coboundary_constant_is_zero(c3):
    assert np.all(coboundary(c3, np.full(3, 2.5)) == 0)


@pytest.mark.parametrize("seed", range(3))
def test_adjointness(fixture_graph, seed):
    r = np.random.default_rng(seed)
    g = fixture_graph
    for _ in range(100):
        c = r.normal(size=g.edge_count)
        v = r.normal(size=g.vertex_count)
        assert abs(boundary(g, c) @ v - c @ coboundary(g, v)) < 1e-12


def test_cycle_basis_g2(g2):
    b = cycle_basis(g2)
    assert b.tree == (0,)
    assert b.non_tree == (1,)
    assert b.cycles.tolist() == [[-1, 1]]


def test_cycle_basis_tree_graph_empty():
    g = validate_graph(4, [(0, 1), (1, 2), (1, 3)])
    b = cycle_basis(g)
    assert len(b) == 0
    assert to_cycle_coords(b, np.zeros(3, dtype=int)).size == 0


def test_cycle_basis_c3(c3):
    b = cycle_basis(c3)
    assert len(b) == 1
    assert not np.any(boundary(c3, b.cycles[0]))
    assert b.cycles[0].tolist() == [-1, -1, 1]


def test_loop_edge_is_own_cycle():
    g = validate_graph(2, [(0, 1), (1, 1)])
    b = cycle_basis(g)
    assert b.non_tree == (1,)
    assert b.cycles.tolist() == [[0, 1]]


def test_coords_read_off_non_tree(g2):
    b = cycle_basis(g2)
    assert to_cycle_coords(b, np.array([1, -1])).tolist() == [-1]
    assert to_cycle_coords(b, np.zeros(2, dtype=int)).tolist() == [0]


def test_coords_not_conserved(g2):
    with pytest.raises(NotConserved):
        to_cycle_coords(cycle_basis(g2), np.array([1, 0]))
    with pytest.raises(NotConserved):
        to_cycle_coords(cycle_basis(g2), np.array([1.0, -1.0 + 1e-6]))


def test_basis_invariants_random_graphs(rng):
    for _ in range(50):
        g = random_connected_graph(rng, max_vertices=7, max_edges=10, min_vertices=1, loops=True)
        b = cycle_basis(g)
        assert len(b) == g.edge_count - g.vertex_count + 1
        for k, (a, z) in enumerate(zip(b.non_tree, b.cycles)):
            assert not np.any(boundary(g, z))
            assert z[a] == 1
            others = [x for x in b.non_tree if x != a]
            assert not np.any(z[others])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.lists(st.integers(-4, 4), min_size=0, max_size=6))
def test_reconstruction_exact(seed, coeffs):
    r = np.random.default_rng(seed)
    g = random_connected_graph(r, max_vertices=5, max_edges=9, loops=True)
    b = cycle_basis(g)
    k = np.array((coeffs + [0] * len(b))[: len(b)], dtype=np.int64)
    c = b.reconstruct(k)
    assert np.array_equal(to_cycle_coords(b, c), k)
    assert np.array_equal(b.reconstruct(to_cycle_coords(b, c)), c)
    x = r.normal(size=len(b))
    cr = b.reconstruct(x)
    assert np.max(np.abs(b.reconstruct(to_cycle_coords(b, cr)) - cr), initial=0) <= 1e-12
