"""Adaptive integrator for linear non-autonomous systems ``y' = A(t) y + f(t)``.

Three-stage Radau IIA (order 5, L-stable).  Because the system is linear,
each step is one block linear solve, so no Newton iteration is needed.  Step
size is controlled by step doubling: a full step is compared with two half
steps and the half-step result is kept.  The state may be a matrix, in which
case every column is propagated with the same ``A`` (``f`` must then return
an array of the same shape).
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import StepFailure

_S6 = math.sqrt(6.0)
RADAU_C = np.array([(4 - _S6) / 10, (4 + _S6) / 10, 1.0])
RADAU_A = np.array(
    [
        [(88 - 7 * _S6) / 360, (296 - 169 * _S6) / 1800, (-2 + 3 * _S6) / 225],
        [(296 + 169 * _S6) / 1800, (88 + 7 * _S6) / 360, (-2 - 3 * _S6) / 225],
        [(16 - _S6) / 36, (16 + _S6) / 36, 1 / 9],
    ]
)

MAX_STEPS = 200_000


def radau_step(
    A: Callable[[float], np.ndarray],
    f: Optional[Callable[[float], np.ndarray]],
    t: float,
    y: np.ndarray,
    h: float,
) -> np.ndarray:
    """Advance ``y`` from ``t`` to ``t + h`` with one Radau IIA step."""
    n = y.shape[0]
    mats = [A(t + c * h) for c in RADAU_C]
    M = np.eye(3 * n)
    rhs = np.concatenate([y, y, y])
    forcing = [f(t + c * h) for c in RADAU_C] if f is not None else None
    for i in range(3):
        for j in range(3):
            M[i * n : (i + 1) * n, j * n : (j + 1) * n] -= h * RADAU_A[i, j] * mats[j]
            if forcing is not None:
                rhs[i * n : (i + 1) * n] += h * RADAU_A[i, j] * forcing[j]
    Y = np.linalg.solve(M, rhs)
    # stiffly accurate: the last stage is the new state
    return Y[2 * n :]


def integrate_linear(
    A: Callable[[float], np.ndarray],
    y0,
    t_eval: Sequence[float],
    tol: float = 1e-9,
    f: Optional[Callable[[float], np.ndarray]] = None,
    h0: Optional[float] = None,
) -> np.ndarray:
    """Integrate from ``t_eval[0]`` and return the state at every ``t_eval``.

    Parameters
    ----------
    A : callable
        ``A(t)`` returns the square system matrix.
    y0 : array
        Initial state, a vector or a matrix of columns.
    t_eval : sequence of float
        Non-decreasing output times; steps are shortened to land on them.
    tol : float
        Mixed absolute/relative tolerance on the step-doubling difference.

    Returns
    -------
    ndarray of shape ``(len(t_eval),) + y0.shape``.

    Raises
    ------
    StepFailure
        The step size underflows or the step budget is exhausted.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    if np.any(np.diff(t_eval) < 0):
        raise ValueError("t_eval must be non-decreasing")
    y = np.array(y0, dtype=float)
    out = np.empty((len(t_eval),) + y.shape)
    if len(t_eval) == 0:
        return out
    out[0] = y
    span = t_eval[-1] - t_eval[0]
    if span == 0:
        out[:] = y
        return out
    h = h0 if h0 is not None else span / 64
    hmin = 1e-14 * max(span, 1.0)
    steps = 0
    t = t_eval[0]
    for k in range(1, len(t_eval)):
        target = t_eval[k]
        while t < target:
            step = min(h, target - t)
            last = step == target - t
            full = radau_step(A, f, t, y, step)
            half = radau_step(A, f, t, y, step / 2)
            half = radau_step(A, f, t + step / 2, half, step / 2)
            scale = tol * (1.0 + np.max(np.abs(half)))
            err = np.max(np.abs(half - full)) / scale
            steps += 1
            if steps > MAX_STEPS:
                raise StepFailure(f"step budget of {MAX_STEPS} exhausted at t={t:.6g}")
            if not np.isfinite(err):
                err = np.inf
            if err <= 1.0:
                t = target if last else t + step
                y = half
                grow = 4.0 if err == 0 else min(4.0, max(1.0, 0.9 * err ** (-1 / 6)))
                # do not let a short landing step shrink the working step size
                h = max(h, step * grow) if last else step * grow
            else:
                h = step * max(0.1, 0.9 * err ** (-1 / 6))
                if h < hmin:
                    raise StepFailure(f"step size underflow (h={h:.3e}) at t={t:.6g}")
        out[k] = y
    return out
