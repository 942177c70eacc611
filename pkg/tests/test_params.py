import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochpump.errors import AmbiguousGrouping, CountLimitExceeded, InvalidInput
from stochpump.graph_core import boundary, validate_graph
from stochpump.params import (
    HeightFunction,
    ParamPoint,
    barrier_resolutions,
    boltzmann,
    boltzmann_derivative,
    enumerate_essential_cells,
    extended_u,
    extended_v,
    forest_of,
    height_function,
    is_inessential,
    top_cell_count,
    top_cell_current,
)
from stochpump.trees import sigma_tree

from conftest import random_connected_graph


def test_boltzmann_examples():
    assert np.allclose(boltzmann([0, 0], 7.0), [0.5, 0.5])
    assert np.allclose(boltzmann([0, np.log(2)], 1.0), [2 / 3, 1 / 3], rtol=1e-14)
    rho = boltzmann([0, 1, 1], 50.0)
    assert np.all(np.isfinite(rho))
    assert rho[0] == pytest.approx(1.0, abs=1e-20) and rho[1] == pytest.approx(math.exp(-50), rel=1e-12)


def test_boltzmann_extreme_beta():
    rho = boltzmann([0.0, 2.0, -3.0], 1e4)
    assert rho.tolist() == [0.0, 0.0, 1.0]


def test_boltzmann_shift_invariance_exact(rng):
    for _ in range(50):
        E = rng.normal(size=4)
        beta = float(rng.uniform(0, 20))
        assert np.array_equal(boltzmann(E, beta), boltzmann(E + 0.0, beta))
        assert np.allclose(boltzmann(E + 5.25, beta), boltzmann(E, beta), rtol=1e-13, atol=1e-300)


def test_boltzmann_shift_exact_for_representable_shift():
    # shifting by a power of two keeps E - min E exact, so outputs match bit for bit
    E = np.array([0.5, -0.25, 1.0])
    assert np.array_equal(boltzmann(E + 4.0, 3.0), boltzmann(E, 3.0))


def test_derivative_constant_velocity():
    assert np.allclose(boltzmann_derivative([0.1, 0.4, -0.2], [2.0, 2.0, 2.0], 3.0), 0, atol=1e-15)


def test_derivative_matches_finite_difference(rng):
    for _ in range(50):
        E, dE = rng.normal(size=4), rng.normal(size=4)
        h = 1e-5
        fd = (boltzmann(E + h * dE, 2.0) - boltzmann(E - h * dE, 2.0)) / (2 * h)
        an = boltzmann_derivative(E, dE, 2.0)
        assert np.max(np.abs(fd - an)) < 1e-8
        assert abs(an.sum()) < 1e-15


def test_derivative_vanishes_at_low_temperature():
    E, dE = np.array([0.0, 0.7, 1.3]), np.array([1.0, -2.0, 0.5])
    norms = [np.max(np.abs(boltzmann_derivative(E, dE, b))) for b in (10, 20, 40)]
    assert norms[0] > norms[1] > norms[2]


def test_height_function_examples():
    h = height_function(ParamPoint([0, 0, 5], [1, 2, 3]), 1e-9, 1e-9)
    assert h == HeightFunction((1, 1, 2), (1, 2, 3))
    h = height_function(ParamPoint([2, 2, 2], [1, 1, 1, 1]))
    assert h == HeightFunction((1, 1, 1), (1, 1, 1, 1))
    h = height_function(ParamPoint([0, 1], [0, 0]))
    assert h == HeightFunction((1, 2), (1, 1))
    assert h.is_extended_u


def test_height_function_tolerance_grouping():
    h = height_function(ParamPoint([0, 5e-7], [0.0, 5e-7, 1.0]))
    assert h.h0 == (1, 1) and h.h1 == (1, 1, 2)


def test_height_function_ambiguous_gap():
    with pytest.raises(AmbiguousGrouping):
        height_function(ParamPoint([0, 1], [0.0, 1.5e-6]), 1e-6, 1e-6)


def test_height_function_invalid_tolerance():
    with pytest.raises(InvalidInput):
        height_function(ParamPoint([0], []), 0.0, 1.0)


def test_height_function_validation():
    with pytest.raises(InvalidInput):
        HeightFunction((1, 3), (1,))
    with pytest.raises(InvalidInput):
        HeightFunction((1, 2), (1, 3))


def test_barrier_resolutions_counts():
    assert barrier_resolutions((1, 2, 3)) == [(0, 1, 2)]
    assert sorted(barrier_resolutions((1, 1, 2))) == [(0, 1, 2), (1, 0, 2)]
    res = barrier_resolutions((1, 2, 1, 2, 2))
    assert len(res) == 12 == len(set(res))
    for r in res:
        rank = {a: k for k, a in enumerate(r)}
        h1 = (1, 2, 1, 2, 2)
        assert all(rank[a] < rank[b] for a in range(5) for b in range(5) if h1[a] < h1[b])


def test_barrier_resolutions_cap():
    with pytest.raises(CountLimitExceeded):
        barrier_resolutions((1,) * 9, cap=1000)


def test_forest_examples(g2, g3, c3):
    f = forest_of(c3, HeightFunction((1, 2, 2), (1, 2, 3)))
    assert f.edges == sigma_tree(c3, (0, 1, 2))
    f = forest_of(g3, HeightFunction((1, 1, 2), (1, 2, 2)))
    assert f.edges == (0,)
    assert f.component_of(1).vertices == frozenset({0, 1})
    f = forest_of(g2, HeightFunction((1, 1), (1, 1)))
    assert f.edges == ()
    assert len(f.components) == 2


def test_is_inessential_examples(g2, g3):
    ok, comp = is_inessential(g3, HeightFunction((1, 1, 2), (1, 2, 2)))
    assert ok and comp.edges == (0,) and comp.vertices == frozenset({0, 1})
    assert is_inessential(g2, HeightFunction((1, 1), (1, 1))) == (False, None)


def test_single_minimum_is_inessential(rng):
    for _ in range(20):
        g = random_connected_graph(rng)
        j = int(rng.integers(g.vertex_count))
        h1 = tuple(int(x) for x in rng.integers(1, 3, g.edge_count))
        if 2 in h1 and 1 not in h1:
            h1 = tuple(x - 1 for x in h1)
        h = HeightFunction(tuple(1 if v == j else 2 for v in range(g.vertex_count)), h1)
        ok, comp = is_inessential(g, h)
        assert ok and j in comp.vertices


def test_extended_forms(g3):
    ok, comp = is_inessential(g3, extended_u(g3, 2))
    assert ok and comp.vertices == frozenset({2}) and comp.edges == ()
    ok, comp = is_inessential(g3, extended_v(g3, (2, 0, 1)))
    assert ok and comp.edges == sigma_tree(g3, (2, 0, 1))


def test_top_cell_current_examples(g2, g3):
    assert top_cell_current(g2, (0, 1), (0, 1), (1, 1)).tolist() == [1, -1]
    assert top_cell_current(g3, (0, 1), (1, 2), (1, 2, 2)).tolist() == [0, 0, 0]
    assert top_cell_current(g3, (0, 2), (1, 2), (1, 2, 2)).tolist() == [0, 1, -1]


def test_top_cell_current_preconditions(g3):
    with pytest.raises(InvalidInput):
        top_cell_current(g3, (0, 0), (1, 2), (1, 2, 2))
    with pytest.raises(InvalidInput):
        top_cell_current(g3, (0, 1), (0, 1), (1, 2, 2))
    with pytest.raises(InvalidInput):
        top_cell_current(g3, (0, 1), (0, 1), (1, 1, 1))


def test_enumerate_cells_g2(g2):
    cells = enumerate_essential_cells(g2)
    assert len(cells) == 1 and cells[0].essential
    assert cells[0].dimension == 2


def test_enumerate_cells_tree_graph():
    g = validate_graph(3, [(0, 1), (1, 2)])
    cells = enumerate_essential_cells(g)
    assert len(cells) == top_cell_count(g) == 3
    assert not any(c.essential for c in cells)


def test_enumerate_cells_g3(g3):
    cells = enumerate_essential_cells(g3)
    assert len(cells) == top_cell_count(g3) == 18
    for c in cells:
        if c.pair == (0, 1) and c.tie == (1, 2):
            assert not c.essential
            assert {0, 1} <= set(c.tree.vertices)


def test_enumerate_cells_cap():
    g = validate_graph(3, [(0, 1), (1, 2), (0, 2), (0, 1), (1, 2), (0, 2), (0, 1), (1, 2)])
    with pytest.raises(CountLimitExceeded):
        enumerate_essential_cells(g, cap=1000)


def test_cells_conserved_and_criteria_agree(fixture_graph):
    g = fixture_graph
    for c in enumerate_essential_cells(g):
        q = top_cell_current(g, c.pair, c.tie, c.height.h1)
        assert q.tolist() == list(c.current)
        assert not np.any(boundary(g, q))
        ok, _ = is_inessential(g, c.height)
        assert ok == (not q.any())


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 6), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_dimension_formula(n, m, seed):
    r = np.random.default_rng(seed)
    h0 = [int(x) for x in r.integers(1, 3, n)]
    h0[int(r.integers(n))] = 1
    levels = int(r.integers(1, m + 1))
    h1 = list(range(1, levels + 1)) + [int(x) for x in r.integers(1, levels + 1, m - levels)]
    r.shuffle(h1)
    h = HeightFunction(tuple(h0), tuple(h1))
    assert h.dimension == 1 + h0.count(2) + levels
