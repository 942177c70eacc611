"""Parameter points, Boltzmann distributions and the combinatorics of
degenerate parameters (height functions, barrier resolutions, forests).

A height function records which vertices tie for the minimal well energy
(``h0 == 1``) and how barrier energies rank, ties sharing a level of ``h1``.
Two extended encodings stand for the good regions: a single minimum ``j``
with ``h1`` constant encodes the region where ``j`` is the unique minimum,
and ``h0`` constant 2 with an injective ``h1`` encodes the region of a fixed
strict barrier order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import AmbiguousGrouping, CountLimitExceeded, DimensionMismatch, InvalidInput
from .graph_core import Graph, UnionFind
from .trees import root_paths, sigma_tree

DEFAULT_DELTA = 1e-6
DEFAULT_RESOLUTION_CAP = 10**5
DEFAULT_CELL_CAP = 10**6


@dataclass(frozen=True, eq=False)
class ParamPoint:
    """Well energies ``E`` (per vertex) and barrier energies ``W`` (per edge)."""

    E: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "E", np.asarray(self.E, dtype=float))
        object.__setattr__(self, "W", np.asarray(self.W, dtype=float))

    def check(self, g: Graph) -> "ParamPoint":
        if self.E.shape != (g.vertex_count,) or self.W.shape != (g.edge_count,):
            raise DimensionMismatch(
                f"parameter point has {self.E.shape}/{self.W.shape}, graph needs "
                f"({g.vertex_count},)/({g.edge_count},)"
            )
        return self

    def allclose(self, other: "ParamPoint", atol: float = 0.0) -> bool:
        return np.allclose(self.E, other.E, rtol=0, atol=atol) and np.allclose(
            self.W, other.W, rtol=0, atol=atol
        )


def boltzmann(E, beta: float) -> np.ndarray:
    """Normalized ``exp(-beta E)``, shifted by ``min E`` so it never overflows."""
    E = np.asarray(E, dtype=float)
    w = np.exp(-beta * (E - E.min()))
    return w / w.sum()


def boltzmann_derivative(E, dE, beta: float) -> np.ndarray:
    """Time derivative of :func:`boltzmann` along a path with velocity ``dE``."""
    rho = boltzmann(E, beta)
    dE = np.asarray(dE, dtype=float)
    return beta * rho * (rho @ dE - dE)


# ---------------------------------------------------------------------------
# height functions


@dataclass(frozen=True)
class HeightFunction:
    h0: tuple[int, ...]
    h1: tuple[int, ...]

    def __post_init__(self):
        h0 = tuple(int(x) for x in self.h0)
        h1 = tuple(int(x) for x in self.h1)
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "h1", h1)
        if any(x not in (1, 2) for x in h0):
            raise InvalidInput(f"h0 must take values in {{1, 2}}, got {h0}")
        if h1 and sorted(set(h1)) != list(range(1, max(h1) + 1)):
            raise InvalidInput(f"h1 must be onto an initial segment 1..n, got {h1}")

    @property
    def levels(self) -> int:
        return max(self.h1) if self.h1 else 0

    @property
    def minima(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.h0) if x == 1)

    @property
    def dimension(self) -> int:
        m = 1 + sum(1 for x in self.h0 if x == 2)
        return m + self.levels

    @property
    def barrier_injective(self) -> bool:
        return len(set(self.h1)) == len(self.h1)

    @property
    def is_extended_u(self) -> bool:
        return len(self.minima) == 1 and self.levels <= 1

    @property
    def is_extended_v(self) -> bool:
        return not self.minima and self.barrier_injective

    @property
    def is_top_cell(self) -> bool:
        if len(self.minima) != 2:
            return False
        sizes = sorted(self.h1.count(k) for k in range(1, self.levels + 1))
        return sizes[-1] == 2 and sizes.count(2) == 1 and all(s <= 2 for s in sizes)

    def order(self) -> tuple[int, ...]:
        """Edge order for an injective ``h1`` (lowest first)."""
        if not self.barrier_injective:
            raise InvalidInput("h1 has ties; use barrier_resolutions")
        return tuple(sorted(range(len(self.h1)), key=lambda a: self.h1[a]))


def extended_u(g: Graph, j: int) -> HeightFunction:
    return HeightFunction(tuple(1 if i == j else 2 for i in range(g.vertex_count)), (1,) * g.edge_count)


def extended_v(g: Graph, order: Sequence[int]) -> HeightFunction:
    h1 = [0] * g.edge_count
    for rank, a in enumerate(order):
        h1[a] = rank + 1
    return HeightFunction((2,) * g.vertex_count, tuple(h1))


def _rank_barriers(W: np.ndarray, dW: float) -> tuple[int, ...]:
    if W.size == 0:
        return ()
    idx = np.argsort(W, kind="stable")
    h1 = [0] * W.size
    level = 1
    h1[idx[0]] = level
    for prev, cur in zip(idx[:-1], idx[1:]):
        gap = W[cur] - W[prev]
        if gap > dW:
            if gap < 2 * dW:
                raise AmbiguousGrouping(
                    f"barrier gap {gap:.3e} between edges {prev} and {cur} lies in ({dW:.1e}, {2 * dW:.1e})"
                )
            level += 1
        h1[cur] = level
    return tuple(h1)


def height_function(p: ParamPoint, dE: float = DEFAULT_DELTA, dW: float = DEFAULT_DELTA) -> HeightFunction:
    """Height function of a parameter point, grouping near-ties.

    Vertices within ``dE`` of the minimal well energy get ``h0 = 1``.  Sorted
    barrier values whose consecutive gap is at most ``dW`` share a level.
    """
    if dE <= 0 or dW <= 0:
        raise InvalidInput("tolerances must be positive")
    E = p.E
    h0 = tuple(1 if e <= E.min() + dE else 2 for e in E)
    return HeightFunction(h0, _rank_barriers(p.W, dW))


def barrier_resolutions(h1: Sequence[int], cap: int = DEFAULT_RESOLUTION_CAP) -> list[tuple[int, ...]]:
    """Every strict edge order refining ``h1`` (lowest first)."""
    h1 = tuple(h1)
    n = max(h1) if h1 else 0
    groups = [[a for a, x in enumerate(h1) if x == k] for k in range(1, n + 1)]
    count = math.prod(math.factorial(len(grp)) for grp in groups)
    if count > cap:
        raise CountLimitExceeded(f"{count} barrier resolutions exceed the cap {cap}")
    return [
        tuple(itertools.chain.from_iterable(parts))
        for parts in itertools.product(*(itertools.permutations(grp) for grp in groups))
    ]


@lru_cache(maxsize=200_000)
def _cached_sigma_tree(g: Graph, order: tuple[int, ...]) -> tuple[int, ...]:
    return sigma_tree(g, order)


class Component(NamedTuple):
    vertices: frozenset
    edges: tuple[int, ...]


class Forest(NamedTuple):
    edges: tuple[int, ...]
    components: tuple[Component, ...]
    trees: dict

    def component_of(self, v: int) -> Component:
        for c in self.components:
            if v in c.vertices:
                return c
        raise KeyError(v)


def _components(g: Graph, edges: Sequence[int]) -> tuple[Component, ...]:
    uf = UnionFind(g.vertex_count)
    for a in edges:
        uf.union(*g.edges[a])
    groups: dict[int, list[int]] = {}
    for v in range(g.vertex_count):
        groups.setdefault(uf.find(v), []).append(v)
    comps = []
    for verts in sorted(groups.values()):
        vs = frozenset(verts)
        comps.append(Component(vs, tuple(a for a in edges if g.edges[a][0] in vs)))
    return tuple(comps)


def forest_of(g: Graph, h: HeightFunction, cap: int = DEFAULT_RESOLUTION_CAP) -> Forest:
    """Intersection of the trees of all barrier resolutions of ``h``."""
    trees = {r: _cached_sigma_tree(g, r) for r in barrier_resolutions(h.h1, cap)}
    common = set.intersection(*(set(T) for T in trees.values()))
    edges = tuple(sorted(common))
    return Forest(edges, _components(g, edges), trees)


def is_inessential(
    g: Graph, h: HeightFunction, cap: int = DEFAULT_RESOLUTION_CAP
) -> tuple[bool, Optional[Component]]:
    """Whether all minima of ``h`` share a component of its forest.

    Returns the flag and, when inessential, the component (the tree attached
    to the cell).  Extended encodings are inessential by construction.
    """
    if len(h.h0) != g.vertex_count or len(h.h1) != g.edge_count:
        raise DimensionMismatch("height function does not match the graph")
    if h.is_extended_v:
        T = _cached_sigma_tree(g, h.order())
        return True, Component(frozenset(range(g.vertex_count)), T)
    if h.is_extended_u:
        (j,) = h.minima
        return True, Component(frozenset([j]), ())
    minima = h.minima
    if not minima:
        raise InvalidInput("height function has no minimum and is not an extended barrier form")
    forest = forest_of(g, h, cap)
    comp = forest.component_of(minima[0])
    if all(v in comp.vertices for v in minima):
        return True, comp
    return False, None


def associated_tree(g: Graph, h: HeightFunction, cap: int = DEFAULT_RESOLUTION_CAP) -> Optional[Component]:
    return is_inessential(g, h, cap)[1]


def _top_cell_orders(h1: Sequence[int], tie: tuple[int, int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    a, b = tie
    h1 = tuple(h1)
    if a == b or h1[a] != h1[b]:
        raise InvalidInput(f"edges {a} and {b} are not tied in {h1}")
    for k in range(1, max(h1) + 1):
        size = h1.count(k)
        if k != h1[a] and size != 1:
            raise InvalidInput("all levels except the tie must be singletons")
        if k == h1[a] and size != 2:
            raise InvalidInput("the tied level must hold exactly two edges")
    base = sorted(range(len(h1)), key=lambda e: (h1[e], e))
    pos = base.index(min(a, b))
    low_a = list(base)
    low_a[pos], low_a[pos + 1] = a, b
    low_b = list(base)
    low_b[pos], low_b[pos + 1] = b, a
    return tuple(low_a), tuple(low_b)


def top_cell_current(g: Graph, pair: tuple[int, int], tie: tuple[int, int], h1: Sequence[int]) -> np.ndarray:
    """Current around a small loop linking a top-dimensional cell.

    Difference of the tree paths ``i -> j`` for the two resolutions of the tie:
    first the one ranking ``tie[0]`` below ``tie[1]``, then the other.
    The result is an integer cycle; it vanishes exactly when the cell is
    inessential.
    """
    i, j = pair
    if i == j:
        raise InvalidInput("the two minima must be distinct")
    low_a, low_b = _top_cell_orders(h1, tie)
    Ta = _cached_sigma_tree(g, low_a)
    Tb = _cached_sigma_tree(g, low_b)
    Pa = root_paths(g, Ta, i)
    Pb = root_paths(g, Tb, i)
    return Pa[j] - Pb[j]


@dataclass(frozen=True)
class CellDescriptor:
    height: HeightFunction
    dimension: int
    essential: Optional[bool] = None
    pair: Optional[tuple[int, int]] = None
    tie: Optional[tuple[int, int]] = None
    current: Optional[tuple[int, ...]] = None
    forest: Optional[tuple[int, ...]] = None
    tree: Optional[Component] = None


def top_cell_count(g: Graph) -> int:
    m, n = g.edge_count, g.vertex_count
    if m < 2 or n < 2:
        return 0
    return math.comb(n, 2) * math.factorial(m) * (m - 1) // 2


def enumerate_essential_cells(g: Graph, cap: int = DEFAULT_CELL_CAP) -> list[CellDescriptor]:
    """All top-dimensional cells with their essential flag.

    A top cell is a pair of tied minima together with a barrier ranking in
    which exactly one level holds two edges.  The flag comes from the linking
    current; the forest criterion is evaluated alongside and any disagreement
    raises ``AssertionError``.
    """
    total = top_cell_count(g)
    if total > cap:
        raise CountLimitExceeded(f"{total} top cells exceed the cap {cap}")
    m, n = g.edge_count, g.vertex_count
    cells: list[CellDescriptor] = []
    if total == 0:
        return cells
    paths: dict[tuple[int, ...], np.ndarray] = {}

    def tree_paths(order):
        T = _cached_sigma_tree(g, order)
        if T not in paths:
            paths[T] = root_paths(g, T, 0)
        return T, paths[T]

    pairs = list(itertools.combinations(range(n), 2))
    for order in itertools.permutations(range(m)):
        for p in range(m - 1):
            a, b = order[p], order[p + 1]
            if a > b:
                continue
            swapped = order[:p] + (b, a) + order[p + 2 :]
            Ta, Pa = tree_paths(order)
            Tb, Pb = tree_paths(swapped)
            h1 = [0] * m
            for rank, e in enumerate(order):
                h1[e] = rank + 1 if rank <= p else rank
            h1 = tuple(h1)
            common = tuple(sorted(set(Ta) & set(Tb)))
            uf = UnionFind(n)
            for e in common:
                uf.union(*g.edges[e])
            for i, j in pairs:
                current = (Pa[j] - Pa[i]) - (Pb[j] - Pb[i])
                essential = bool(current.any())
                same_component = uf.find(i) == uf.find(j)
                if essential == same_component:
                    raise AssertionError(f"criteria disagree on cell pair={(i, j)} order={order} tie={(a, b)}")
                h0 = tuple(1 if v in (i, j) else 2 for v in range(n))
                h = HeightFunction(h0, h1)
                tree = None
                if not essential:
                    tree = next(c for c in _components(g, common) if i in c.vertices)
                cells.append(
                    CellDescriptor(
                        height=h,
                        dimension=h.dimension,
                        essential=essential,
                        pair=(i, j),
                        tie=(a, b),
                        current=tuple(int(x) for x in current),
                        forest=common,
                        tree=tree,
                    )
                )
    return cells
