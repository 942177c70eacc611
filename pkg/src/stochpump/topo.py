"""Robustness of driving loops and the exact integer (topological) current.

Every sample of a loop is classified into one of three kinds of region:

* ``U``: a single vertex ``j`` has the strictly lowest well energy; its tree
  is the bare vertex ``j``.
* ``V``: all barrier energies are distinct; the tree is the greedy tree of
  the barrier order.
* ``Y``: anything else, described by its height function; the tree is the
  component of the forest containing the minima, which exists only when the
  cell is inessential.  An essential sample makes the loop non-robust.

Consecutive samples of equal class form arcs.  Two neighbouring arcs meet at
a junction sample lying in both regions (the sampling is refined until one
exists).  The current is the sum over arcs of the tree path, inside the arc's
tree, between its two junction minima.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AmbiguousGrouping, NotConserved, NotRobust, RefinementLimit
from .graph_core import CycleBasis, Graph, cycle_basis
from .params import (
    DEFAULT_DELTA,
    Component,
    HeightFunction,
    ParamPoint,
    _cached_sigma_tree,
    extended_u,
    extended_v,
    height_function,
    is_inessential,
)
from .trees import root_paths

DEFAULT_SAMPLES = 256
MAX_DEPTH = 60
GROUPING_RETRIES = 6


@dataclass(frozen=True)
class Region:
    """Class of a parameter point: ``kind`` is ``"U"``, ``"V"`` or ``"Y"``."""

    kind: str
    height: HeightFunction
    tree: Component
    key: tuple

    def contains(self, p: ParamPoint) -> bool:
        """Strict-order membership test for the open region."""
        E, W = p.E, p.W
        if self.kind == "U":
            (j,) = self.key
            return bool(np.all(np.delete(E, j) > E[j]))
        if self.kind == "V":
            w = W[list(self.key)]
            return bool(np.all(np.diff(w) > 0))
        h = self.height
        lo = [i for i, x in enumerate(h.h0) if x == 1]
        hi = [i for i, x in enumerate(h.h0) if x == 2]
        if hi and lo and not E[lo].max() < E[hi].min():
            return False
        for k in range(1, h.levels):
            a = [e for e, x in enumerate(h.h1) if x == k]
            b = [e for e, x in enumerate(h.h1) if x == k + 1]
            if not W[a].max() < W[b].min():
                return False
        return True


def classify(g: Graph, p: ParamPoint, dE: float = DEFAULT_DELTA, dW: float = DEFAULT_DELTA) -> Region:
    """Region of a single parameter point.

    Raises
    ------
    NotRobust
        The point lies in an essential cell.
    """
    for attempt in range(GROUPING_RETRIES):
        try:
            h = height_function(p, dE, dW * 2**attempt)
            break
        except AmbiguousGrouping:
            if attempt == GROUPING_RETRIES - 1:
                raise
    minima = h.minima
    if len(minima) == 1:
        (j,) = minima
        return Region("U", extended_u(g, j), Component(frozenset([j]), ()), (j,))
    if h.barrier_injective:
        order = h.order()
        T = _cached_sigma_tree(g, order)
        return Region("V", extended_v(g, order), Component(frozenset(range(g.vertex_count)), T), order)
    ok, comp = is_inessential(g, h)
    if not ok:
        raise NotRobust(f"point meets the essential cell h0={h.h0}, h1={h.h1}", height=h)
    return Region("Y", h, comp, (h.h0, h.h1))


@dataclass(frozen=True)
class Arc:
    start: float
    end: float
    region: Region
    base: int


@dataclass(frozen=True)
class ArcDecomposition:
    """Arcs in loop order; ``junctions[m]`` joins ``arcs[m]`` to ``arcs[m + 1]``.

    ``junction_times`` are the junction parameters (the end of arc ``m``) and
    ``junction_vertices`` the chosen minima there.
    """

    graph: Graph
    arcs: tuple[Arc, ...]
    junction_times: tuple[float, ...]
    junction_vertices: tuple[int, ...]
    sample_count: int = 0
    refinements: int = 0
    junction_candidates: tuple[tuple[int, ...], ...] = field(default=(), repr=False)


class _Sampler:
    def __init__(self, g, protocol, dE, dW):
        self.g, self.protocol, self.dE, self.dW = g, protocol, dE, dW
        self.points: dict[float, ParamPoint] = {}
        self.regions: dict[float, Region] = {}

    def add(self, t: float):
        t = float(t) % 1.0
        if t not in self.regions:
            p, _ = self.protocol.evaluate(t)
            self.points[t] = p
            try:
                self.regions[t] = classify(self.g, p, self.dE, self.dW)
            except NotRobust as exc:
                raise NotRobust(f"at t={t:.12g}: {exc}", t=t, height=exc.height) from None
        return t


def _choose(options, choice: str):
    options = sorted(options)
    return options[-1] if choice == "last" else options[0]


def arc_decompose(g: Graph, protocol, dE: float = DEFAULT_DELTA, dW: float = DEFAULT_DELTA,
                  n_samples: int = DEFAULT_SAMPLES, base_choice: str = "first",
                  junction_choice: str = "first") -> ArcDecomposition:
    """Split a loop into arcs of constant region with compatible junctions.

    ``base_choice`` and ``junction_choice`` (``"first"`` or ``"last"``) pick
    among equally valid base vertices and junction minima; the resulting
    current does not depend on them.

    Raises
    ------
    NotRobust
        Some sample lies in an essential cell.
    RefinementLimit
        No compatible junction was found after ``MAX_DEPTH`` bisections.
    """
    if n_samples < 4:
        raise ValueError("need at least 4 samples")
    s = _Sampler(g, protocol, dE, dW)
    for k in range(n_samples):
        s.add(k / n_samples)
    refinements = 0
    while True:
        times = sorted(s.regions)
        keys = [(s.regions[t].kind, s.regions[t].key) for t in times]
        N = len(times)
        if all(k == keys[0] for k in keys):
            reg = s.regions[times[0]]
            arc = Arc(0.0, 1.0, reg, _base_vertex(reg, base_choice))
            return ArcDecomposition(g, (arc,), (), (), N, refinements)
        # rotate so that index 0 starts a group
        first = next(k for k in range(N) if keys[k] != keys[k - 1])
        order = [(first + k) % N for k in range(N)]
        groups: list[list[int]] = []
        for idx in order:
            if groups and keys[groups[-1][-1]] == keys[idx]:
                groups[-1].append(idx)
            else:
                groups.append([idx])
        junctions = []
        pending = []
        for m, grp in enumerate(groups):
            nxt = groups[(m + 1) % len(groups)]
            a, b = times[grp[-1]], times[nxt[0]]
            ra, rb = s.regions[a], s.regions[b]
            if rb.contains(s.points[a]):
                junctions.append(a)
            elif ra.contains(s.points[b]):
                junctions.append(b)
            else:
                pending.append((a, b))
        if not pending:
            break
        for a, b in pending:
            width = (b - a) % 1.0
            if width < 2.0 ** (-MAX_DEPTH):
                raise RefinementLimit(
                    f"no compatible junction near t={a:.12g}; perturb the loop slightly"
                )
            s.add(a + width / 2)
        refinements += 1

    arcs = []
    jverts = []
    cands = []
    for m, grp in enumerate(groups):
        reg = s.regions[times[grp[0]]]
        start = junctions[m - 1]
        arcs.append(Arc(start, junctions[m], reg, _base_vertex(reg, base_choice)))
    for m, t in enumerate(junctions):
        p = s.points[t]
        left, right = arcs[m].region.tree.vertices, arcs[(m + 1) % len(arcs)].region.tree.vertices
        low = np.flatnonzero(p.E <= p.E.min() + dE)
        shared = [int(v) for v in low if v in left and v in right]
        if not shared:
            raise RefinementLimit(f"no shared minimum at the junction t={t:.12g}")
        argmin = int(np.argmin(p.E))
        if junction_choice == "first" and argmin in shared:
            jverts.append(argmin)
        else:
            jverts.append(_choose(shared, junction_choice))
        cands.append(tuple(shared))
    return ArcDecomposition(g, tuple(arcs), tuple(junctions), tuple(jverts), len(s.regions), refinements,
                            tuple(cands))


def _base_vertex(reg: Region, choice: str) -> int:
    if reg.kind == "U":
        return reg.key[0]
    if reg.kind == "Y":
        return _choose(reg.height.minima, choice)
    return _choose(reg.tree.vertices, choice)


def check_loop_robust(g: Graph, protocol, dE: float = DEFAULT_DELTA, dW: float = DEFAULT_DELTA,
                      n_samples: int = DEFAULT_SAMPLES) -> tuple[bool, dict]:
    """Whether the loop avoids every essential cell, with diagnostics."""
    if n_samples < 256:
        raise ValueError("robustness checks need at least 256 samples")
    try:
        dec = arc_decompose(g, protocol, dE, dW, n_samples)
    except NotRobust as exc:
        h = exc.height
        return False, {
            "reason": "essential",
            "t": exc.t,
            "h0": list(h.h0) if h else None,
            "h1": list(h.h1) if h else None,
            "message": str(exc),
        }
    except RefinementLimit as exc:
        return False, {"reason": "refinement", "message": str(exc)}
    return True, {"arcs": len(dec.arcs), "samples": dec.sample_count, "refinements": dec.refinements}


def arc_current(dec: ArcDecomposition) -> np.ndarray:
    """``sum_m (Q(i_m -> j_m in T_m) - Q(i_{m+1} -> j_m in T_{m+1}))``."""
    g = dec.graph
    Q = np.zeros(g.edge_count, dtype=np.int64)
    k = len(dec.arcs)
    if k < 2:
        return Q
    for m, j in enumerate(dec.junction_vertices):
        cur, nxt = dec.arcs[m], dec.arcs[(m + 1) % k]
        Q += root_paths(g, cur.region.tree.edges, cur.base)[j]
        Q -= root_paths(g, nxt.region.tree.edges, nxt.base)[j]
    return Q


@dataclass(frozen=True, eq=False)
class TopologicalReport:
    chain: np.ndarray
    coords: np.ndarray
    basis: CycleBasis
    decomposition: ArcDecomposition

    def to_dict(self) -> dict:
        arcs = []
        for a in self.decomposition.arcs:
            r = a.region
            arcs.append(
                {
                    "start": a.start,
                    "end": a.end,
                    "kind": r.kind,
                    "h0": list(r.height.h0),
                    "h1": list(r.height.h1),
                    "tree_vertices": sorted(r.tree.vertices),
                    "tree_edges": list(r.tree.edges),
                    "base": a.base,
                }
            )
        return {
            "robust": True,
            "chain": self.chain.tolist(),
            "cycle_coords": self.coords.tolist(),
            "reference_tree": list(self.basis.tree),
            "non_tree_edges": list(self.basis.non_tree),
            "arcs": arcs,
            "junction_times": list(self.decomposition.junction_times),
            "junction_vertices": list(self.decomposition.junction_vertices),
        }


def topological_current(g: Graph, protocol, dE: float = DEFAULT_DELTA, dW: float = DEFAULT_DELTA,
                        n_samples: int = DEFAULT_SAMPLES, base_choice: str = "first",
                        junction_choice: str = "first", basis: Optional[CycleBasis] = None) -> TopologicalReport:
    """Exact integer current of a robust loop."""
    dec = arc_decompose(g, protocol, dE, dW, n_samples, base_choice, junction_choice)
    Q = arc_current(dec)
    if np.any(g.incidence @ Q):
        raise NotConserved("arc sum is not a cycle; the decomposition is inconsistent")
    basis = basis or cycle_basis(g)
    return TopologicalReport(Q, basis.coords(Q), basis, dec)
