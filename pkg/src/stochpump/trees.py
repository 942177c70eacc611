"""Spanning trees: enumeration, the greedy tree of an edge order, path chains
and the Boltzmann distribution over trees.

A spanning tree is a sorted tuple of edge indices.  An edge order is a
permutation of edge indices listed lowest first.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

import numpy as np

from .errors import CountLimitExceeded, InvalidInput
from .graph_core import Graph, UnionFind

DEFAULT_TREE_CAP = 10**6


def enumerate_spanning_trees(g: Graph, cap: int = DEFAULT_TREE_CAP) -> list[tuple[int, ...]]:
    """All spanning trees in lexicographic order of their edge tuples.

    Include/exclude recursion over the non-loop edges in index order: an edge
    is included when it joins two components and excluded only if the edges
    still available can finish the tree.
    """
    n = g.vertex_count
    candidates = [a for a in range(g.edge_count) if not g.is_loop(a)]
    out: list[tuple[int, ...]] = []
    if n == 1:
        return [()]

    def comp_of(labels, v):
        while labels[v] != v:
            v = labels[v]
        return v

    def can_finish(labels, start, missing):
        uf = UnionFind(n)
        for v in range(n):
            uf.union(v, comp_of(labels, v))
        for a in candidates[start:]:
            uf.union(*g.edges[a])
        return uf.components == 1

    def rec(start, labels, chosen):
        missing = n - 1 - len(chosen)
        if missing == 0:
            out.append(tuple(chosen))
            if len(out) > cap:
                raise CountLimitExceeded(f"more than {cap} spanning trees")
            return
        if len(candidates) - start < missing:
            return
        a = candidates[start]
        d0, d1 = g.edges[a]
        r0, r1 = comp_of(labels, d0), comp_of(labels, d1)
        if r0 != r1:
            merged = list(labels)
            merged[r1] = r0
            chosen.append(a)
            rec(start + 1, merged, chosen)
            chosen.pop()
        if can_finish(labels, start + 1, missing):
            rec(start + 1, labels, chosen)

    rec(0, list(range(n)), [])
    return out


def _check_order(g: Graph, order: Sequence[int]) -> tuple[int, ...]:
    order = tuple(int(a) for a in order)
    if sorted(order) != list(range(g.edge_count)):
        raise InvalidInput(f"{order} is not a permutation of the {g.edge_count} edges")
    return order


def sigma_tree(g: Graph, order: Sequence[int]) -> tuple[int, ...]:
    """Tree left after deleting edges from the top of ``order`` downwards.

    Each edge, highest first, is discarded when the remaining graph stays
    connected without it and retained otherwise.
    """
    order = _check_order(g, order)
    kept = set(range(g.edge_count))
    for a in reversed(order):
        uf = UnionFind(g.vertex_count)
        for b in kept:
            if b != a:
                uf.union(*g.edges[b])
        if uf.components == 1:
            kept.discard(a)
    return tuple(sorted(kept))


def order_from_barriers(W) -> tuple[int, ...]:
    """Edge order induced by barrier energies (ties broken by edge index)."""
    return tuple(int(a) for a in np.argsort(np.asarray(W, dtype=float), kind="stable"))


def tree_weight(T: Sequence[int], W) -> float:
    """Total barrier energy of the edges *not* in ``T``."""
    W = np.asarray(W, dtype=float)
    mask = np.ones(W.shape[0], dtype=bool)
    mask[list(T)] = False
    return float(W[mask].sum())


def _tree_adjacency(g: Graph, T: Sequence[int]) -> list[list[tuple[int, int]]]:
    adj: list[list[tuple[int, int]]] = [[] for _ in range(g.vertex_count)]
    for a in T:
        d0, d1 = g.edges[a]
        adj[d0].append((d1, a))
        adj[d1].append((d0, a))
    return adj


def root_paths(g: Graph, T: Sequence[int], root: int) -> np.ndarray:
    """Row ``v`` is the path chain from ``root`` to ``v`` inside ``T``.

    Rows for vertices outside the component of ``root`` are left at zero.
    """
    P = np.zeros((g.vertex_count, g.edge_count), dtype=np.int64)
    adj = _tree_adjacency(g, T)
    seen = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v, a in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            P[v] = P[u]
            # stepping u -> v agrees with the edge orientation iff u is d0
            P[v, a] += 1 if g.edges[a][0] == u else -1
            queue.append(v)
    return P


def tree_component(g: Graph, T: Sequence[int], root: int) -> set[int]:
    adj = _tree_adjacency(g, T)
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for v, _ in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def path_chain(g: Graph, T: Sequence[int], i: int, j: int) -> np.ndarray:
    """Signed edge chain of the path from ``i`` to ``j`` in ``T``.

    An edge counts +1 when walked from its ``d0`` end to its ``d1`` end, so the
    boundary of the result is ``delta_i - delta_j``.
    """
    P = root_paths(g, T, i)
    if j != i and not P[j].any():
        raise InvalidInput(f"vertices {i} and {j} are not joined inside the tree {tuple(T)}")
    return P[j]


def tree_energies(trees: Sequence[Sequence[int]], W) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    return np.array([W[list(T)].sum() for T in trees])


def tree_boltzmann(g: Graph, W, beta: float, trees=None) -> np.ndarray:
    """Boltzmann weights over spanning trees with energy ``sum_{a in T} W_a``.

    Ordered like :func:`enumerate_spanning_trees` unless ``trees`` is given.
    """
    if trees is None:
        trees = enumerate_spanning_trees(g)
    energy = tree_energies(trees, W)
    x = -beta * (energy - energy.min())
    w = np.exp(x)
    return w / w.sum()
