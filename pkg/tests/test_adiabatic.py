import mpmath as mp
import numpy as np
import pytest

from stochpump import fixtures
from stochpump.adiabatic import analytic_current, solve_A, tree_A, tree_A_matrix
from stochpump.dynamics import average_current
from stochpump.errors import NotZeroSum
from stochpump.graph_core import cycle_basis
from stochpump.params import ParamPoint
from stochpump.protocol import constant_protocol, smooth_time_change
from stochpump.trees import enumerate_spanning_trees

from conftest import random_connected_graph


def random_point(rng, g, scale=1.0):
    return ParamPoint(scale * rng.normal(size=g.vertex_count), scale * rng.normal(size=g.edge_count))


def zero_sum(rng, n):
    x = rng.normal(size=n)
    return x - x.mean()


def test_solve_A_examples(g2):
    y = solve_A(g2, 1.0, ParamPoint([0, 0], [0, 0]), [1, -1])
    assert np.allclose(y, [-0.5, -0.5], rtol=1e-15)
    y = solve_A(g2, 1.0, ParamPoint([0, 0], [0, np.log(3)]), [1, -1])
    assert np.allclose(y, [-0.75, -0.25], rtol=1e-14)
    assert np.array_equal(solve_A(g2, 1.0, ParamPoint([0, 0], [0, 1]), [0, 0]), [0, 0])


def test_solve_A_rejects_nonzero_sum(g2):
    with pytest.raises(NotZeroSum):
        solve_A(g2, 1.0, ParamPoint([0, 0], [0, 0]), [1, 0])


def test_solve_A_properties(rng):
    for _ in range(50):
        g = random_connected_graph(rng, max_vertices=6, max_edges=9, loops=True)
        beta = float(rng.uniform(0, 5))
        p = random_point(rng, g)
        x = zero_sum(rng, g.vertex_count)
        y = solve_A(g, beta, p, x)
        assert np.max(np.abs(-(g.incidence @ y) - x)) <= 1e-10
        gw = np.exp(beta * p.W)
        for z in cycle_basis(g).cycles:
            assert abs(z @ (gw * y)) <= 1e-10 * max(1.0, np.max(gw * np.abs(y)))


def mp_solve(g, beta, W, x):
    """Potential flow in 60-digit arithmetic."""
    mp.mp.dps = 60
    n = g.vertex_count
    c = [mp.e ** (-beta * mp.mpf(float(w))) for w in W]
    L = mp.zeros(n, n)
    for a, (u, v) in enumerate(g.edges):
        if u != v:
            L[u, u] += c[a]
            L[v, v] += c[a]
            L[u, v] -= c[a]
            L[v, u] -= c[a]
    phi = [mp.mpf(0)] + list(mp.lu_solve(L[1:, 1:], mp.matrix([-mp.mpf(float(v)) for v in x[1:]])))
    return np.array([float(c[a] * (phi[u] - phi[v])) for a, (u, v) in enumerate(g.edges)])


@pytest.mark.parametrize("beta", [2.0, 16.0, 50.0])
def test_solve_A_high_precision_oracle(beta, rng):
    for _ in range(15):
        g = random_connected_graph(rng, max_vertices=6, max_edges=9)
        p = random_point(rng, g)
        x = zero_sum(rng, g.vertex_count)
        ref = mp_solve(g, beta, p.W, x)
        assert np.max(np.abs(solve_A(g, beta, p, x) - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


def test_tree_A_examples(g2):
    assert np.allclose(tree_A(g2, 1.0, ParamPoint([0, 0], [0, 0]), 0, 1), [0.5, 0.5])
    assert np.array_equal(tree_A(g2, 1.0, ParamPoint([0, 0], [0, 1]), 1, 1), [0, 0])


def test_tree_A_equals_solve_A(rng):
    for _ in range(100):
        g = random_connected_graph(rng, max_vertices=6, max_edges=9)
        beta = float(rng.uniform(0, 4))
        p = random_point(rng, g)
        x = zero_sum(rng, g.vertex_count)
        i = int(rng.integers(g.vertex_count))
        via_trees = tree_A_matrix(g, beta, p, i) @ x
        assert np.max(np.abs(via_trees - solve_A(g, beta, p, x))) <= 1e-10


def test_tree_A_basepoint_independence(rng):
    for _ in range(20):
        g = random_connected_graph(rng, max_vertices=5, max_edges=8)
        p = random_point(rng, g)
        trees = enumerate_spanning_trees(g)
        j, k = (int(v) for v in rng.integers(0, g.vertex_count, 2))
        diffs = [tree_A(g, 1.3, p, i, j, trees) - tree_A(g, 1.3, p, i, k, trees) for i in range(g.vertex_count)]
        for d in diffs[1:]:
            assert np.allclose(d, diffs[0], atol=1e-12)


def test_analytic_current_constant(c3):
    rep = analytic_current(c3, constant_protocol(ParamPoint([0.1, 0.2, 0.3], [0, 1, 2])), 4.0)
    assert np.max(np.abs(rep.chain)) == 0


def test_analytic_current_g2(g2):
    rep = analytic_current(g2, fixtures.g2_loop(), 8.0)
    assert abs(abs(rep.coords[0]) - 1) <= 0.02
    assert rep.divergence_residual <= 1e-10
    assert rep.diagnostics["converged"]


def test_analytic_matches_simulation(g2):
    loop = fixtures.g2_loop()
    a = analytic_current(g2, loop, 2.0)
    s = average_current(g2, loop, 2.0, 400.0)
    assert np.max(np.abs(a.coords - s.coords)) <= 0.01


@pytest.mark.parametrize("name", ["g2", "c3", "g3-pump"])
def test_reparametrization_invariance(name):
    g, loop = fixtures.loop_fixtures()[name]
    base = analytic_current(g, loop, 3.0).coords
    shifted = analytic_current(g, loop.shifted(0.3), 3.0).coords
    warped = analytic_current(g, smooth_time_change(loop, 0.4), 3.0).coords
    assert np.allclose(shifted, base, atol=1e-8)
    assert np.allclose(warped, base, atol=1e-8)


def test_reversal_negates(c3):
    loop = fixtures.c3_loop()
    assert np.allclose(analytic_current(c3, loop.reversed(), 3.0).coords,
                       -analytic_current(c3, loop, 3.0).coords, atol=1e-9)


def test_node_validation(g2):
    with pytest.raises(ValueError):
        analytic_current(g2, fixtures.g2_loop(), 1.0, nodes=33)
