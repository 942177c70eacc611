"""The operator ``A`` and the analytic (adiabatic-limit) current map.

``A(x)`` is the edge chain ``y`` with ``-B y = x`` that is orthogonal to all
cycles in the inner product weighted by ``g = exp(beta W)``.  It is the
potential flow ``y = g^{-1} B^T phi`` of the weighted Laplacian problem
``B g^{-1} B^T phi = -x``.  Two evaluations are provided: a direct solve and
the spanning-tree sum, which serve as each other's oracle.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .dynamics import CurrentReport, check_zero_sum
from .graph_core import CycleBasis, Graph, cycle_basis
from .params import ParamPoint, boltzmann_derivative
from .trees import enumerate_spanning_trees, root_paths, tree_boltzmann

MIN_NODES = 64
MAX_NODES = 2**16
QUAD_TOL = 1e-8


def _conductances(g: Graph, beta: float, W) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    if W.size == 0:
        return W
    # a common factor cancels in y, so shift to keep the largest at 1
    return np.exp(-beta * (W - W.min()))


def solve_A(g: Graph, beta: float, p: ParamPoint, x) -> np.ndarray:
    """Potential flow carrying the injection ``-x``.

    Vertices are eliminated one at a time (Kron reduction), always forming the
    pivot as a sum of positive conductances rather than from the Laplacian
    diagonal, and back-substitution works with potential differences.  No
    subtraction of nearly equal quantities occurs, so the result keeps full
    relative accuracy even when conductances span many orders of magnitude.

    Raises
    ------
    NotZeroSum
        ``x`` does not sum to zero.
    """
    p.check(g)
    x = check_zero_sum(x)
    n = g.vertex_count
    c = _conductances(g, beta, p.W)
    w = np.zeros((n, n))
    for a, (u, v) in enumerate(g.edges):
        if u != v:
            w[u, v] += c[a]
            w[v, u] += c[a]
    b = -x.copy()
    pivots = np.zeros(n)
    rows: list[np.ndarray] = [np.zeros(0)] * n
    for k in range(n - 1, 0, -1):
        row = w[k, :k].copy()
        pivots[k] = row.sum()
        rows[k] = row
        upd = np.outer(row, row) / pivots[k]
        np.fill_diagonal(upd, 0.0)
        w[:k, :k] += upd
        b[:k] += row * (b[k] / pivots[k])
    # D[k, m] = phi_k - phi_m; phi_k is a weighted mean of earlier potentials
    D = np.zeros((n, n))
    for k in range(1, n):
        for m in range(k):
            D[k, m] = (b[k] + rows[k] @ D[:k, m]) / pivots[k]
            D[m, k] = -D[k, m]
    y = np.zeros(g.edge_count)
    for a, (u, v) in enumerate(g.edges):
        if u != v:
            y[a] = c[a] * D[u, v]
    return y


def tree_A(g: Graph, beta: float, p: ParamPoint, i: int, j: int, trees=None) -> np.ndarray:
    """Tree sum ``sum_T rho_T Q(i -> j in T)`` with Boltzmann tree weights."""
    p.check(g)
    if trees is None:
        trees = enumerate_spanning_trees(g)
    weights = tree_boltzmann(g, p.W, beta, trees)
    out = np.zeros(g.edge_count)
    for T, wt in zip(trees, weights):
        out += wt * root_paths(g, T, i)[j]
    return out


def tree_A_matrix(g: Graph, beta: float, p: ParamPoint, i: int = 0, trees=None) -> np.ndarray:
    """Columns ``A^e(j)`` for every vertex ``j`` (edges by vertices)."""
    p.check(g)
    if trees is None:
        trees = enumerate_spanning_trees(g)
    weights = tree_boltzmann(g, p.W, beta, trees)
    out = np.zeros((g.edge_count, g.vertex_count))
    for T, wt in zip(trees, weights):
        out += wt * root_paths(g, T, i).T
    return out


def _simpson(values: np.ndarray) -> np.ndarray:
    """Composite Simpson over ``[0, 1]`` for an odd number of equispaced samples."""
    n = len(values) - 1
    h = 1.0 / n
    return h / 3 * (values[0] + values[-1] + 4 * values[1:-1:2].sum(axis=0) + 2 * values[2:-1:2].sum(axis=0))


def analytic_current(g: Graph, protocol, beta: float, nodes: int = MIN_NODES, tol: float = QUAD_TOL,
                     basis: Optional[CycleBasis] = None, max_nodes: int = MAX_NODES) -> CurrentReport:
    """``int_0^1 A(gamma(t), d/dt rho^B(gamma(t))) dt`` by refined Simpson.

    The number of intervals starts at ``nodes`` and doubles until the cycle
    coordinates move by less than ``tol``.
    """
    if nodes < MIN_NODES or nodes % 2:
        raise ValueError(f"nodes must be even and at least {MIN_NODES}")
    basis = basis or cycle_basis(g)
    idx = list(basis.non_tree)
    cache: dict[int, np.ndarray] = {}

    def integrand(k: int, n: int) -> np.ndarray:
        # samples are keyed on the finest grid so doubling reuses them
        key = k * (max_nodes // n)
        if key not in cache:
            t = key / max_nodes
            pt, dp = protocol.evaluate(t)
            rho_dot = boltzmann_derivative(pt.E, dp.E, beta)
            cache[key] = solve_A(g, beta, pt, rho_dot - rho_dot.mean())
        return cache[key]

    n = nodes
    Q = _simpson(np.array([integrand(k, n) for k in range(n + 1)]))
    change = np.inf
    while n < max_nodes:
        n *= 2
        Q_new = _simpson(np.array([integrand(k, n) for k in range(n + 1)]))
        change = float(np.max(np.abs(Q_new[idx] - Q[idx]), initial=0.0))
        Q = Q_new
        if change < tol:
            break
    div = float(np.max(np.abs(g.incidence @ Q))) if g.vertex_count else 0.0
    return CurrentReport(
        chain=Q,
        coords=Q[idx],
        basis=basis,
        divergence_residual=div,
        diagnostics={"nodes": n, "last_change": change, "converged": change < tol, "beta": beta},
    )
