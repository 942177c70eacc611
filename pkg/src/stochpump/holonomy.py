"""Edge phases, holonomy of integer cycles, and the twisted master operator.

Edge phases ``theta`` define ``lambda_a = exp(i theta_a)``.  A vertex gauge
``phi`` acts by ``theta_a -> theta_a + phi[d0(a)] - phi[d1(a)]``; holonomies
of cycles are invariant under it.

Two twisted operators are provided.  The ``literal`` form inserts the
diagonal phase matrix between the boundary and its adjoint,
``-B g^{-1} Lambda B^T kappa``.  The ``covariant`` form twists the boundary
itself, ``d_lambda(a) = d0(a) - lambda_a d1(a)``, and uses
``-d_lambda g^{-1} d_lambda^* kappa``; a gauge transformation conjugates it
by a diagonal unitary, and after symmetrizing by ``kappa^{1/2}`` it is
Hermitian and negative semi-definite.  The ground-state probe uses the
covariant form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import Degenerate, NotConserved, RateOverflow
from .graph_core import Graph, cycle_basis
from .params import ParamPoint
from .topo import ArcDecomposition
from .trees import _tree_adjacency

DEGENERACY_GAP = 1e-9
DEFAULT_THETA_GRID = 64
DEFAULT_STEPS = 256


def holonomy_of_chain(g: Graph, c, theta) -> complex:
    """``exp(i sum_a c_a theta_a)`` for a conserved integer chain ``c``."""
    c = np.asarray(c)
    theta = np.asarray(theta, dtype=float)
    if c.shape != (g.edge_count,) or theta.shape != (g.edge_count,):
        raise ValueError("chain and phases must have one entry per edge")
    if np.any(g.incidence @ c):
        raise NotConserved("holonomy needs a conserved chain")
    return complex(np.exp(1j * float(c @ theta)))


def gauge_transform(g: Graph, theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return theta + g.incidence.T @ phi


def arc_holonomy(dec: ArcDecomposition, theta) -> complex:
    """Product of edge phases collected by walking every arc's tree path.

    Each arc contributes the walk from the previous junction vertex to the
    next one inside its tree; an edge walked against its orientation
    contributes the inverse phase.
    """
    g = dec.graph
    theta = np.asarray(theta, dtype=float)
    k = len(dec.arcs)
    if k < 2:
        return 1.0 + 0j
    phase = 1.0 + 0j
    for m, arc in enumerate(dec.arcs):
        src, dst = dec.junction_vertices[m - 1], dec.junction_vertices[m]
        adj = _tree_adjacency(g, arc.region.tree.edges)
        # depth-first walk from src recording how each vertex was reached
        parent = {src: None}
        stack = [src]
        while stack:
            u = stack.pop()
            for v, a in adj[u]:
                if v not in parent:
                    parent[v] = (u, a)
                    stack.append(v)
        v = dst
        while parent[v] is not None:
            u, a = parent[v]
            forward = g.edges[a][0] == u
            phase *= np.exp(1j * theta[a]) if forward else np.exp(-1j * theta[a])
            v = u
    return complex(phase)


def _rate_exponents(g: Graph, beta: float, p: ParamPoint):
    p.check(g)
    E = p.E - p.E.max()
    W = p.W - p.W.min()
    logk = beta * E
    logg = beta * W
    return logk, logg


def twisted_master(g: Graph, beta: float, p: ParamPoint, theta, form: str = "literal") -> np.ndarray:
    """Twisted master operator for edge phases ``theta``.

    With all phases zero both forms reduce to the ordinary master operator.

    Raises
    ------
    RateOverflow
        Rate exponents leave the double-precision range.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (g.edge_count,):
        raise ValueError("one phase per edge required")
    p.check(g)
    n = g.vertex_count
    x = []
    for a, (u, v) in enumerate(g.edges):
        x.append(beta * (p.E[[u, v]] - p.W[a]))
    if x and np.max(np.abs(x)) > 700:
        raise RateOverflow("rate exponents exceed the double-precision range")
    kappa = np.exp(beta * p.E)
    ginv = np.exp(-beta * p.W)
    lam = np.exp(1j * theta)
    if form == "literal":
        B = g.incidence.astype(complex)
        return -(B * (ginv * lam)) @ B.T * kappa[None, :]
    if form == "covariant":
        D = np.zeros((n, g.edge_count), dtype=complex)
        for a, (u, v) in enumerate(g.edges):
            D[u, a] += 1.0
            D[v, a] -= lam[a]
        return -(D * ginv) @ D.conj().T * kappa[None, :]
    raise ValueError(f"unknown form {form!r}")


def symmetrized_twisted(g: Graph, beta: float, p: ParamPoint, theta) -> tuple[np.ndarray, float]:
    """``kappa^{1/2} Hbar kappa^{-1/2}`` of the covariant form, scaled by its largest rate.

    Returns the Hermitian matrix and the log of the factor removed.
    """
    theta = np.asarray(theta, dtype=float)
    n = g.vertex_count
    S = np.zeros((n, n), dtype=complex)
    entries = []
    for a, (u, v) in enumerate(g.edges):
        # vector with sqrt(kappa) weights on both ends of the twisted boundary
        lu, lv = 0.5 * beta * p.E[u], 0.5 * beta * p.E[v]
        entries.append((a, u, v, lu - 0.5 * beta * p.W[a], lv - 0.5 * beta * p.W[a]))
    if not entries:
        return S, 0.0
    shift = 2 * max(max(e[3], e[4]) for e in entries)
    for a, u, v, xu, xv in entries:
        vec = np.zeros(n, dtype=complex)
        vec[u] += np.exp(xu - shift / 2)
        vec[v] -= np.exp(1j * theta[a]) * np.exp(xv - shift / 2)
        S -= np.outer(vec, vec.conj())
    return S, shift


@dataclass(frozen=True)
class GroundState:
    eigenvalue: complex
    vector: np.ndarray
    gap: float


def ground_state(H: np.ndarray, degeneracy_gap: float = DEGENERACY_GAP) -> GroundState:
    """Eigenvalue of maximal real part, its eigenvector and the gap.

    The gap is the distance of real parts to the next eigenvalue.  The test
    against ``degeneracy_gap`` is made relative to the largest entry of ``H``.

    Raises
    ------
    Degenerate
        The top of the spectrum is not separated.
    """
    H = np.asarray(H)
    n = H.shape[0]
    w, v = np.linalg.eig(H)
    order = np.argsort(-w.real, kind="stable")
    top = order[0]
    gap = float(w.real[top] - w.real[order[1]]) if n > 1 else np.inf
    scale = max(float(np.max(np.abs(H))), np.finfo(float).tiny) if n else 1.0
    if n > 1 and gap <= degeneracy_gap * scale:
        raise Degenerate(f"ground state gap {gap:.3e} at scale {scale:.3e}")
    vec = v[:, top]
    return GroundState(complex(w[top]), vec / np.linalg.norm(vec), gap)


def _ground_vector(g, beta, p, theta):
    S, _ = symmetrized_twisted(g, beta, p, theta)
    w, U = np.linalg.eigh(S)
    rel = (w[-1] - w[-2]) / max(np.max(np.abs(w)), np.finfo(float).tiny) if len(w) > 1 else np.inf
    return U[:, -1], rel


def berry_phase(g: Graph, protocol, beta: float, theta, steps: int = DEFAULT_STEPS,
                points: Optional[list] = None) -> tuple[complex, float]:
    """Discrete parallel transport of the covariant ground line around the loop.

    Returns the holonomy ``prod_s <u_{s+1}, u_s> / |.|`` and the smallest
    relative gap met.
    """
    if points is None:
        points = [protocol.evaluate(s / steps)[0] for s in range(steps)]
    vecs = []
    min_gap = np.inf
    for p in points:
        u, rel = _ground_vector(g, beta, p, theta)
        min_gap = min(min_gap, rel)
        vecs.append(u)
    if min_gap <= DEGENERACY_GAP:
        raise Degenerate(f"ground line degenerates along the loop (relative gap {min_gap:.3e})")
    hol = 1.0 + 0j
    for s in range(len(vecs)):
        ov = np.vdot(vecs[(s + 1) % len(vecs)], vecs[s])
        if abs(ov) < 1e-12:
            raise Degenerate("consecutive ground lines are orthogonal; increase steps")
        hol *= ov / abs(ov)
    return complex(hol), float(min_gap)


def winding_number(phases) -> int:
    """Winding of a closed sequence of unit complex numbers."""
    ang = np.angle(np.asarray(phases))
    d = np.diff(np.concatenate([ang, ang[:1]]))
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return int(round(d.sum() / (2 * np.pi)))


@dataclass(frozen=True)
class ProbeResult:
    winding: int
    min_gap: float
    beta: float
    steps: int
    stable: bool


def ground_holonomy_probe(g: Graph, protocol, beta: float, k: int = 0, steps: int = DEFAULT_STEPS,
                          theta_grid: int = DEFAULT_THETA_GRID, max_steps: int = 4096) -> ProbeResult:
    """Winding of the ground-line holonomy as the ``k``-th torus generator turns.

    The phase sits on the ``k``-th non-tree edge of the reference cycle basis.
    Steps double until two consecutive runs give the same winding.

    Raises
    ------
    Degenerate
        The ground line is not separated somewhere along the loop.
    """
    if steps < 256:
        raise ValueError("the probe needs at least 256 steps")
    basis = cycle_basis(g)
    if not 0 <= k < len(basis):
        raise ValueError(f"generator index {k} out of range for {len(basis)} cycles")
    edge = basis.non_tree[k]

    def run(nsteps):
        points = [protocol.evaluate(s / nsteps)[0] for s in range(nsteps)]
        phases, gaps = [], []
        for th in 2 * np.pi * np.arange(theta_grid) / theta_grid:
            theta = np.zeros(g.edge_count)
            theta[edge] = th
            hol, gap = berry_phase(g, protocol, beta, theta, nsteps, points)
            phases.append(hol)
            gaps.append(gap)
        return winding_number(phases), min(gaps)

    w, gap = run(steps)
    while steps < max_steps:
        w2, gap2 = run(2 * steps)
        steps *= 2
        gap = min(gap, gap2)
        if w2 == w:
            return ProbeResult(w, gap, beta, steps, True)
        w = w2
    return ProbeResult(w, gap, beta, steps, False)
