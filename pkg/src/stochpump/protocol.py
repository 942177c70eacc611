"""Periodic driving protocols.

A protocol is any object with ``evaluate(t) -> (ParamPoint, ParamPoint)``
returning the parameter point at time ``t`` and its time derivative, with
period 1.  :class:`FourierProtocol` is the serializable form; the wrappers
below (reversal, shift, time change, concatenation) are used to build test
loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ArityMismatch, InvalidInput
from .graph_core import Graph
from .params import ParamPoint

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Fourier:
    """``const + sum_k cos[k-1] cos(2 pi k t) + sin[k-1] sin(2 pi k t)``."""

    const: float = 0.0
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "const", float(self.const))
        object.__setattr__(self, "cos", tuple(float(v) for v in self.cos))
        object.__setattr__(self, "sin", tuple(float(v) for v in self.sin))
        for v in (self.const, *self.cos, *self.sin):
            if not math.isfinite(v):
                raise InvalidInput("Fourier coefficients must be finite")

    def value_and_derivative(self, t: float) -> tuple[float, float]:
        val, der = self.const, 0.0
        for k, c in enumerate(self.cos, start=1):
            w = TWO_PI * k
            val += c * math.cos(w * t)
            der -= c * w * math.sin(w * t)
        for k, s in enumerate(self.sin, start=1):
            w = TWO_PI * k
            val += s * math.sin(w * t)
            der += s * w * math.cos(w * t)
        return val, der

    @property
    def is_constant(self) -> bool:
        return not any(self.cos) and not any(self.sin)

    def reversed(self) -> "Fourier":
        # t -> -t keeps cosines and flips sines
        return Fourier(self.const, self.cos, tuple(-s for s in self.sin))

    def shifted(self, s: float) -> "Fourier":
        """Coefficients of ``t -> f(t + s)``."""
        cos, sin = [], []
        K = max(len(self.cos), len(self.sin))
        for k in range(1, K + 1):
            c = self.cos[k - 1] if k <= len(self.cos) else 0.0
            d = self.sin[k - 1] if k <= len(self.sin) else 0.0
            a = TWO_PI * k * s
            cos.append(c * math.cos(a) + d * math.sin(a))
            sin.append(d * math.cos(a) - c * math.sin(a))
        return Fourier(self.const, tuple(cos), tuple(sin))

    def to_dict(self) -> dict:
        return {"const": self.const, "cos": list(self.cos), "sin": list(self.sin)}


@dataclass(frozen=True)
class FourierProtocol:
    E: tuple[Fourier, ...]
    W: tuple[Fourier, ...]

    def __post_init__(self):
        object.__setattr__(self, "E", tuple(self.E))
        object.__setattr__(self, "W", tuple(self.W))

    def check(self, g: Graph) -> "FourierProtocol":
        if len(self.E) != g.vertex_count:
            raise ArityMismatch(f"protocol has {len(self.E)} well series, graph has {g.vertex_count} vertices")
        if len(self.W) != g.edge_count:
            raise ArityMismatch(f"protocol has {len(self.W)} barrier series, graph has {g.edge_count} edges")
        return self

    def evaluate(self, t: float) -> tuple[ParamPoint, ParamPoint]:
        t = float(t) % 1.0
        e = np.array([f.value_and_derivative(t) for f in self.E]).reshape(-1, 2)
        w = np.array([f.value_and_derivative(t) for f in self.W]).reshape(-1, 2)
        return ParamPoint(e[:, 0], w[:, 0]), ParamPoint(e[:, 1], w[:, 1])

    @property
    def is_constant(self) -> bool:
        return all(f.is_constant for f in (*self.E, *self.W))

    def reversed(self) -> "FourierProtocol":
        return FourierProtocol(tuple(f.reversed() for f in self.E), tuple(f.reversed() for f in self.W))

    def shifted(self, s: float) -> "FourierProtocol":
        return FourierProtocol(tuple(f.shifted(s) for f in self.E), tuple(f.shifted(s) for f in self.W))

    def to_dict(self) -> dict:
        return {"E": [f.to_dict() for f in self.E], "W": [f.to_dict() for f in self.W]}


def constant_protocol(p: ParamPoint) -> FourierProtocol:
    return FourierProtocol(tuple(Fourier(v) for v in p.E), tuple(Fourier(v) for v in p.W))


def evaluate_protocol(protocol, t: float) -> tuple[ParamPoint, ParamPoint]:
    return protocol.evaluate(t)


class Reparametrized:
    """``t -> gamma(phi(t))`` for a degree-one circle map ``phi``.

    ``phi`` must satisfy ``phi(t + 1) = phi(t) + 1`` and ``dphi > 0``.
    """

    def __init__(self, base, phi: Callable[[float], float], dphi: Callable[[float], float]):
        self.base, self.phi, self.dphi = base, phi, dphi

    def evaluate(self, t: float):
        t = float(t) % 1.0
        p, dp = self.base.evaluate(self.phi(t))
        s = self.dphi(t)
        return p, ParamPoint(s * dp.E, s * dp.W)

    def reversed(self):
        return Reparametrized(self, lambda t: -t, lambda t: -1.0)


def smooth_time_change(base, amplitude: float = 0.1) -> Reparametrized:
    """Orientation-preserving time change ``t + a sin(2 pi t) / (2 pi)``."""
    if abs(amplitude) >= 1:
        raise InvalidInput("amplitude must be below 1 to keep the map monotone")
    return Reparametrized(
        base,
        lambda t: t + amplitude * math.sin(TWO_PI * t) / TWO_PI,
        lambda t: 1.0 + amplitude * math.cos(TWO_PI * t),
    )


class Concatenated:
    """Run each loop in turn at equal speed; they must share a base point.

    The result is only piecewise smooth at the seams, which is harmless for the
    combinatorial current but not for the integrators.
    """

    def __init__(self, loops: Sequence):
        if not loops:
            raise InvalidInput("nothing to concatenate")
        self.loops = list(loops)
        p0, _ = self.loops[0].evaluate(0.0)
        for lp in self.loops[1:]:
            if not lp.evaluate(0.0)[0].allclose(p0, atol=1e-12):
                raise InvalidInput("concatenated loops must share their base point")

    def evaluate(self, t: float):
        k = len(self.loops)
        s = (float(t) % 1.0) * k
        idx = min(int(s), k - 1)
        p, dp = self.loops[idx].evaluate(s - idx)
        return p, ParamPoint(k * dp.E, k * dp.W)
