"""Finite multigraphs and their cellular chain complex.

Vertices are ``0..n-1`` and edges are stored as ordered pairs ``(d0, d1)``
with ``d0 <= d1``; equality marks a loop edge.  The boundary of an edge is
``d0 - d1``, so loop edges have zero boundary: they never move probability
but each one contributes a generator to first homology.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    Disconnected,
    IndexOutOfRange,
    InvalidInput,
    NotConserved,
)


class UnionFind:
    """Disjoint sets over ``range(n)`` (path halving, union by size)."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.components = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.components -= 1
        return True


def is_connected(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    uf = UnionFind(n)
    for a, b in edges:
        uf.union(a, b)
    return uf.components == 1


@dataclass(frozen=True)
class Graph:
    """Connected finite multigraph with fixed vertex and edge orderings.

    Build instances through :func:`validate_graph`; the constructor itself does
    not check connectivity.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def betti_number(self) -> int:
        return self.edge_count - self.vertex_count + 1

    @cached_property
    def incidence(self) -> np.ndarray:
        """Integer matrix of the boundary map, shape ``(vertices, edges)``."""
        B = np.zeros((self.vertex_count, self.edge_count), dtype=np.int64)
        for a, (d0, d1) in enumerate(self.edges):
            if d0 != d1:
                B[d0, a] += 1
                B[d1, a] -= 1
        return B

    @cached_property
    def loop_edges(self) -> tuple[int, ...]:
        return tuple(a for a, (d0, d1) in enumerate(self.edges) if d0 == d1)

    def is_loop(self, a: int) -> bool:
        d0, d1 = self.edges[a]
        return d0 == d1

    def to_dict(self) -> dict:
        return {"vertices": self.vertex_count, "edges": [list(e) for e in self.edges]}


def validate_graph(vertex_count: int, edges: Sequence[Sequence[int]]) -> Graph:
    """Check a raw vertex count and edge list and return a :class:`Graph`.

    Raises
    ------
    IndexOutOfRange
        An endpoint is outside ``0..vertex_count-1``.
    Disconnected
        Some vertex cannot be reached from vertex 0.
    """
    if int(vertex_count) != vertex_count or vertex_count < 1:
        raise InvalidInput(f"vertex count must be a positive integer, got {vertex_count!r}")
    n = int(vertex_count)
    clean = []
    for k, e in enumerate(edges):
        if len(e) != 2:
            raise InvalidInput(f"edge {k} must have two endpoints, got {e!r}")
        d0, d1 = int(e[0]), int(e[1])
        if not (0 <= d0 < n and 0 <= d1 < n):
            raise IndexOutOfRange(f"edge {k} = {tuple(e)} has an endpoint outside 0..{n - 1}")
        if d0 > d1:
            raise InvalidInput(f"edge {k} = {tuple(e)} violates d0 <= d1")
        clean.append((d0, d1))
    if not is_connected(n, clean):
        raise Disconnected(f"graph on {n} vertices with {len(clean)} edges is not connected")
    return Graph(n, tuple(clean))


def _check_len(vec, expected: int, what: str) -> np.ndarray:
    arr = np.asarray(vec)
    if arr.shape != (expected,):
        raise DimensionMismatch(f"{what} has shape {arr.shape}, expected ({expected},)")
    return arr


def boundary(g: Graph, c) -> np.ndarray:
    """Boundary ``sum_a c_a (d0(a) - d1(a))``; integer chains stay integer."""
    c = _check_len(c, g.edge_count, "edge chain")
    return g.incidence @ c


def coboundary(g: Graph, v) -> np.ndarray:
    """Formal adjoint of :func:`boundary`: ``(d*v)_a = v[d0(a)] - v[d1(a)]``."""
    v = _check_len(v, g.vertex_count, "vertex vector")
    return g.incidence.T @ v


@dataclass(frozen=True)
class CycleBasis:
    """Fundamental cycles of a reference spanning tree.

    ``cycles[k]`` is the integer cycle attached to the non-tree edge
    ``non_tree[k]``; its coefficient on that edge is 1 and it vanishes on
    every other non-tree edge, so cycle coordinates of a conserved chain are
    simply its values on the non-tree edges.
    """

    graph: Graph
    tree: tuple[int, ...]
    non_tree: tuple[int, ...]
    cycles: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.non_tree)

    def coords(self, c, tol: float = 1e-9) -> np.ndarray:
        return to_cycle_coords(self, c, tol)

    def reconstruct(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs)
        if len(self) == 0:
            return np.zeros(self.graph.edge_count, dtype=coeffs.dtype if coeffs.size else np.int64)
        return coeffs @ self.cycles


def cycle_basis(g: Graph) -> CycleBasis:
    """Fundamental cycle basis of the identity-order sigma tree.

    For a non-tree edge ``a`` the cycle is ``a - Q(d0(a) -> d1(a))`` where the
    second term is the tree path chain; a loop edge is its own cycle.
    """
    from .trees import path_chain, sigma_tree

    tree = sigma_tree(g, tuple(range(g.edge_count)))
    in_tree = set(tree)
    non_tree = tuple(a for a in range(g.edge_count) if a not in in_tree)
    cycles = np.zeros((len(non_tree), g.edge_count), dtype=np.int64)
    for k, a in enumerate(non_tree):
        d0, d1 = g.edges[a]
        cycles[k] = -path_chain(g, tree, d0, d1)
        cycles[k, a] += 1
    return CycleBasis(g, tuple(tree), non_tree, cycles)


def to_cycle_coords(b: CycleBasis, c, tol: float = 1e-9) -> np.ndarray:
    """Coordinates of a conserved chain in the fundamental cycle basis.

    Integer chains must be exactly conserved; real chains within ``tol``
    (max-norm of the boundary).
    """
    c = _check_len(c, b.graph.edge_count, "edge chain")
    div = boundary(b.graph, c)
    if np.issubdtype(c.dtype, np.integer):
        if np.any(div != 0):
            raise NotConserved(f"integer chain has nonzero boundary {div.tolist()}")
    elif div.size and np.max(np.abs(div)) > tol:
        raise NotConserved(f"chain boundary {np.max(np.abs(div)):.3e} exceeds tolerance {tol:.1e}")
    return c[list(b.non_tree)].copy()
