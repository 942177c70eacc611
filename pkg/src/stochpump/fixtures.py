"""Small graphs and driving loops used by the tests, examples and CLI demos."""

from __future__ import annotations

import math

from .graph_core import Graph, validate_graph
from .protocol import Fourier, FourierProtocol


def g2() -> Graph:
    """Two vertices joined by two parallel edges."""
    return validate_graph(2, [(0, 1), (0, 1)])


def c3() -> Graph:
    """Triangle with edges (0,1), (1,2), (0,2)."""
    return validate_graph(3, [(0, 1), (1, 2), (0, 2)])


def g3() -> Graph:
    """Bridge (0,1) followed by two parallel edges between 1 and 2."""
    return validate_graph(3, [(0, 1), (1, 2), (1, 2)])


def _rotating(phase: float, sign: float = 1.0) -> Fourier:
    """``sign * cos(2 pi (t - phase))``."""
    a = 2 * math.pi * phase
    return Fourier(0.0, (sign * math.cos(a),), (sign * math.sin(a),))


def g2_loop() -> FourierProtocol:
    """``E = (cos 2 pi t, 0)``, ``W = (sin 2 pi t, 0)``: circles the degenerate point."""
    return FourierProtocol((Fourier(0, (1.0,)), Fourier()), (Fourier(0, (), (1.0,)), Fourier()))


def g2_degenerate_loop() -> FourierProtocol:
    """``E = (cos 2 pi t, 0)``, ``W = (cos 2 pi t, 0)``: passes through the essential cell."""
    return FourierProtocol((Fourier(0, (1.0,)), Fourier()), (Fourier(0, (1.0,)), Fourier()))


C3_LAG = 1.0 / 24


def c3_loop() -> FourierProtocol:
    """The well minimum visits 0, 1, 2 in turn while the barriers rotate.

    ``E_i = -cos 2 pi (t - i/3)``.  Each barrier follows a cosine lagging so
    that, whenever two wells tie, the edge joining them is not the highest
    barrier: the minimum is handed on along that edge.
    """
    E = tuple(_rotating(i / 3, -1.0) for i in range(3))
    W = (_rotating(2 / 3 + C3_LAG), _rotating(C3_LAG), _rotating(1 / 3 + C3_LAG))
    return FourierProtocol(E, W)


def g3_inessential_loop() -> FourierProtocol:
    """Swaps the minimum between 0 and 1 across the inessential cell (zero current)."""
    return FourierProtocol(
        (Fourier(0, (1.0,)), Fourier(), Fourier(2.0)),
        (Fourier(-1.0), Fourier(0, (1.0,)), Fourier()),
    )


def g3_pump_loop() -> FourierProtocol:
    """The two-state pump embedded on the parallel edges of G3."""
    return FourierProtocol(
        (Fourier(2.0), Fourier(0, (1.0,)), Fourier()),
        (Fourier(-1.0), Fourier(0, (), (1.0,)), Fourier()),
    )


def loop_fixtures() -> dict:
    """Name -> (graph, loop) for every robust loop fixture."""
    return {
        "g2": (g2(), g2_loop()),
        "c3": (c3(), c3_loop()),
        "g3-inessential": (g3(), g3_inessential_loop()),
        "g3-pump": (g3(), g3_pump_loop()),
    }
