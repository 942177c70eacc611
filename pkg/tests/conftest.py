import numpy as np
import pytest

from stochpump import fixtures
from stochpump.errors import Disconnected
from stochpump.graph_core import validate_graph


def random_connected_graph(rng, max_vertices=5, max_edges=7, min_vertices=2, loops=False):
    """Random connected multigraph: a random spanning tree plus extra edges."""
    n = int(rng.integers(min_vertices, max_vertices + 1))
    m = int(rng.integers(n - 1, max(n - 1, max_edges) + 1))
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v))
    while len(edges) < m:
        u, v = sorted(int(x) for x in rng.integers(0, n, 2))
        if u == v and not loops:
            continue
        edges.append((u, v))
    perm = rng.permutation(len(edges))
    return validate_graph(n, [edges[k] for k in perm])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def g2():
    return fixtures.g2()


@pytest.fixture
def c3():
    return fixtures.c3()


@pytest.fixture
def g3():
    return fixtures.g3()


@pytest.fixture(params=["g2", "c3", "g3"])
def fixture_graph(request):
    return getattr(fixtures, request.param)()
