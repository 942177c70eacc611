"""Master operator, time evolution, periodic solutions and currents.

Conventions: ``H = -B diag(1/g) B^T diag(kappa)`` with ``g_a = exp(beta W_a)``
and ``kappa_i = exp(beta E_i)``, so ``H_ij = sum_a kappa_j / g_a`` over the
edges joining ``i != j`` and every column sums to zero.  The probability
flux is ``J = tau diag(1/g) B^T diag(kappa) rho``, which satisfies the
continuity equation ``B J = -rho'``.

Rates are formed from exponent differences ``beta (E_i - W_a)``; the largest
one is factored out and kept as ``log_scale`` so that large ``beta`` never
overflows while the operator is assembled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import NearSingularMonodromy, NotZeroSum, RateOverflow
from .graph_core import CycleBasis, Graph, cycle_basis
from .integrate import integrate_linear
from .params import ParamPoint, boltzmann, boltzmann_derivative

EXP_BUDGET = 700.0
DEFAULT_TOL = 1e-9
DEFAULT_GRID = 256
SINGULAR_LIMIT = 1e6


def _exponents(g: Graph, beta: float, p: ParamPoint) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per non-loop edge: endpoints and the exponents ``beta (E_end - W)``."""
    p.check(g)
    live = [a for a in range(g.edge_count) if not g.is_loop(a)]
    d = np.array([g.edges[a] for a in live], dtype=int).reshape(-1, 2)
    W = p.W[live]
    x = beta * (p.E[d] - W[:, None])
    return np.array(live, dtype=int), d, x


@dataclass(frozen=True, eq=False)
class MasterOperator:
    """``H = exp(log_scale) * matrix``."""

    matrix: np.ndarray
    log_scale: float
    beta: float
    point: ParamPoint

    def dense(self) -> np.ndarray:
        if self.log_scale > EXP_BUDGET:
            raise RateOverflow(f"rate exponent {self.log_scale:.1f} exceeds the budget {EXP_BUDGET}")
        return np.exp(self.log_scale) * self.matrix


def master_operator(g: Graph, beta: float, p: ParamPoint) -> MasterOperator:
    """Assemble the master operator with its exponents shifted by their maximum.

    Raises
    ------
    RateOverflow
        The spread of rate exponents exceeds the double-precision budget, so
        the slowest rates would underflow next to the fastest.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    n = g.vertex_count
    H = np.zeros((n, n))
    _, d, x = _exponents(g, beta, p)
    if x.size == 0:
        return MasterOperator(H, 0.0, beta, p)
    shift = float(x.max())
    if shift - x.min() > EXP_BUDGET:
        raise RateOverflow(f"rate exponents span {shift - x.min():.1f}, beyond {EXP_BUDGET}")
    r = np.exp(x - shift)
    for (i, j), (ri, rj) in zip(d, r):
        # flow i -> j at rate kappa_i / g and back at kappa_j / g
        H[j, i] += ri
        H[i, i] -= ri
        H[i, j] += rj
        H[j, j] -= rj
    return MasterOperator(H, shift, beta, p)


def symmetrized_operator(g: Graph, beta: float, p: ParamPoint) -> tuple[np.ndarray, float]:
    """``kappa^{1/2} H kappa^{-1/2}`` (symmetric), scaled as in :func:`master_operator`."""
    n = g.vertex_count
    S = np.zeros((n, n))
    _, d, x = _exponents(g, beta, p)
    if x.size == 0:
        return S, 0.0
    shift = float(x.max())
    off = np.exp(x.mean(axis=1) - shift)
    r = np.exp(x - shift)
    for (i, j), o, (ri, rj) in zip(d, off, r):
        S[i, j] += o
        S[j, i] += o
        S[i, i] -= ri
        S[j, j] -= rj
    return S, shift


def spectral_gap(g: Graph, beta: float, p: ParamPoint) -> float:
    if g.vertex_count < 2:
        return np.inf
    S, shift = symmetrized_operator(g, beta, p)
    ev = np.linalg.eigvalsh(S)
    return float(-ev[-2] * np.exp(shift))


def flux_operator(g: Graph, beta: float, p: ParamPoint) -> tuple[np.ndarray, float]:
    """Matrix ``C`` with ``J = tau exp(shift) C rho`` (edges by vertices)."""
    C = np.zeros((g.edge_count, g.vertex_count))
    live, d, x = _exponents(g, beta, p)
    if x.size == 0:
        return C, 0.0
    shift = float(x.max())
    r = np.exp(x - shift)
    for a, (i, j), (ri, rj) in zip(live, d, r):
        C[a, i] += ri
        C[a, j] -= rj
    return C, shift


def instantaneous_current(g: Graph, beta: float, tau: float, p: ParamPoint, rho) -> np.ndarray:
    """Probability flux ``tau g^{-1} B^T kappa rho`` along each edge."""
    rho = np.asarray(rho, dtype=float)
    C, shift = flux_operator(g, beta, p)
    if shift > EXP_BUDGET:
        raise RateOverflow(f"rate exponent {shift:.1f} exceeds the budget {EXP_BUDGET}")
    return tau * np.exp(shift) * (C @ rho)


def zero_sum_basis(n: int) -> np.ndarray:
    """Orthonormal basis (columns) of the vectors summing to zero."""
    if n < 2:
        return np.zeros((n, 0))
    q, _ = np.linalg.qr(np.vstack([np.ones(n), np.eye(n)[:, :-1].T]).T)
    return q[:, 1:]


# ---------------------------------------------------------------------------
# time evolution


def _generator(g: Graph, protocol, beta: float, tau: float):
    def A(t):
        p, _ = protocol.evaluate(t)
        return tau * master_operator(g, beta, p).dense()

    return A


def _augmented_generator(g: Graph, protocol, beta: float, tau: float):
    """System for ``[rho; q]`` where ``q`` accumulates the flux integral."""
    n, m = g.vertex_count, g.edge_count

    def A(t):
        p, _ = protocol.evaluate(t)
        M = np.zeros((n + m, n + m))
        M[:n, :n] = tau * master_operator(g, beta, p).dense()
        C, shift = flux_operator(g, beta, p)
        M[n:, :n] = tau * np.exp(shift) * C
        return M

    return A


def evolve(g: Graph, protocol, beta: float, tau: float, p0, t0: float = 0.0, t1: float = 1.0,
           tol: float = DEFAULT_TOL) -> np.ndarray:
    """Solve ``p' = tau H(gamma(t)) p`` from ``t0`` to ``t1``."""
    if not 0.0 <= t0 <= t1 <= 1.0:
        raise ValueError("need 0 <= t0 <= t1 <= 1")
    p0 = np.asarray(p0, dtype=float)
    return integrate_linear(_generator(g, protocol, beta, tau), p0, [t0, t1], tol)[-1]


def monodromy(g: Graph, protocol, beta: float, tau: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    n = g.vertex_count
    return integrate_linear(_generator(g, protocol, beta, tau), np.eye(n), [0.0, 1.0], tol)[-1]


def restricted_norm(M: np.ndarray) -> float:
    """Spectral norm of ``M`` on the zero-sum subspace."""
    V = zero_sum_basis(M.shape[0])
    if V.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm(V.T @ M @ V, 2))


@dataclass(frozen=True, eq=False)
class PeriodicSolution:
    """Periodic state sampled on ``times`` together with the flux integral.

    ``flux_integral[k]`` is the accumulated current from ``t = 0`` to
    ``times[k]``.  Between samples the trajectory is interpolated linearly.
    """

    times: np.ndarray
    rho: np.ndarray
    flux_integral: np.ndarray
    monodromy: np.ndarray
    beta: float
    tau: float
    tol: float
    fixed_point_gap: float
    inverse_norm: float

    def at(self, t: float) -> np.ndarray:
        return np.array([np.interp(t, self.times, col) for col in self.rho.T])

    @property
    def closure_error(self) -> float:
        return float(np.max(np.abs(self.rho[-1] - self.rho[0])))


def monodromy_fixed_point(M: np.ndarray) -> np.ndarray:
    """Eigenvector of ``M`` for the eigenvalue nearest 1, normalized to sum 1."""
    w, v = np.linalg.eig(M)
    k = int(np.argmin(np.abs(w - 1.0)))
    x = np.real(v[:, k])
    return x / x.sum()


def periodic_solution(g: Graph, protocol, beta: float, tau: float, tol: float = DEFAULT_TOL,
                      grid: int = DEFAULT_GRID) -> PeriodicSolution:
    """Periodic solution of the driven master equation.

    Writes ``rho = rho^B + xi``; the deviation obeys
    ``xi' = tau H xi - d/dt rho^B``.  One sweep over the period yields the
    monodromy ``M`` and the response ``r`` to the forcing from ``xi(0) = 0``;
    periodicity then means ``(I - M) xi(0) = r`` on zero-sum vectors.

    Raises
    ------
    NearSingularMonodromy
        ``(I - M)`` restricted to zero-sum vectors has an inverse of norm
        above ``1e6`` (the period is too short for the rates).
    """
    n, m = g.vertex_count, g.edge_count
    A = _generator(g, protocol, beta, tau)

    def forcing(t):
        p, dp = protocol.evaluate(t)
        out = np.zeros((n, n + 1))
        out[:, n] = -boltzmann_derivative(p.E, dp.E, beta)
        return out

    Y0 = np.zeros((n, n + 1))
    Y0[:, :n] = np.eye(n)
    Y1 = integrate_linear(A, Y0, [0.0, 1.0], tol, f=forcing)[-1]
    M, r = Y1[:, :n], Y1[:, n]
    V = zero_sum_basis(n)
    K = np.eye(V.shape[1]) - V.T @ M @ V
    if V.shape[1]:
        try:
            Kinv = np.linalg.inv(K)
        except np.linalg.LinAlgError as exc:
            raise NearSingularMonodromy("I - M is singular on zero-sum vectors") from exc
        inv_norm = float(np.linalg.norm(Kinv, 2))
        if inv_norm > SINGULAR_LIMIT:
            raise NearSingularMonodromy(f"||(I - M)^-1|| = {inv_norm:.3e} exceeds {SINGULAR_LIMIT:.0e}")
        xi0 = V @ (Kinv @ (V.T @ r))
    else:
        inv_norm, xi0 = 0.0, np.zeros(n)
    p0, _ = protocol.evaluate(0.0)
    rho0 = boltzmann(p0.E, beta) + xi0
    fp_gap = float(np.max(np.abs(monodromy_fixed_point(M) - rho0)))

    times = np.linspace(0.0, 1.0, grid + 1)
    y0 = np.concatenate([rho0, np.zeros(m)])
    traj = integrate_linear(_augmented_generator(g, protocol, beta, tau), y0, times, tol)
    return PeriodicSolution(
        times=times,
        rho=traj[:, :n],
        flux_integral=traj[:, n:],
        monodromy=M,
        beta=beta,
        tau=tau,
        tol=tol,
        fixed_point_gap=fp_gap,
        inverse_norm=inv_norm,
    )


def continuity_residual(g: Graph, protocol, sol: PeriodicSolution) -> dict:
    """Residuals of ``B J + rho' = 0`` along a periodic solution.

    ``pointwise`` uses the master equation for ``rho'`` at every sample;
    ``integral`` compares the flux accumulated between consecutive samples
    with the change of ``rho`` there.
    """
    B = g.incidence.astype(float)
    point = 0.0
    for t, rho in zip(sol.times, sol.rho):
        p, _ = protocol.evaluate(t)
        J = instantaneous_current(g, sol.beta, sol.tau, p, rho)
        rho_dot = sol.tau * master_operator(g, sol.beta, p).dense() @ rho
        scale = 1.0 + np.max(np.abs(rho_dot))
        point = max(point, float(np.max(np.abs(B @ J + rho_dot))) / scale)
    dq = np.diff(sol.flux_integral, axis=0)
    drho = np.diff(sol.rho, axis=0)
    integral = float(np.max(np.abs(dq @ B.T + drho))) if len(dq) else 0.0
    return {"pointwise": point, "integral": integral}


def adiabatic_deviation(protocol, sol: PeriodicSolution) -> float:
    """``max_t ||rho(t) - rho^B(gamma(t))||_inf`` over the sample grid."""
    dev = 0.0
    for t, rho in zip(sol.times, sol.rho):
        p, _ = protocol.evaluate(t)
        dev = max(dev, float(np.max(np.abs(rho - boltzmann(p.E, sol.beta)))))
    return dev


@dataclass(frozen=True, eq=False)
class CurrentReport:
    chain: np.ndarray
    coords: np.ndarray
    basis: CycleBasis
    divergence_residual: float
    diagnostics: dict

    def to_dict(self) -> dict:
        def plain(v):
            return v.tolist() if isinstance(v, np.ndarray) else v

        return {
            "chain": plain(self.chain),
            "cycle_coords": plain(self.coords),
            "reference_tree": list(self.basis.tree),
            "non_tree_edges": list(self.basis.non_tree),
            "divergence_residual": self.divergence_residual,
            "diagnostics": {k: plain(v) for k, v in self.diagnostics.items()},
        }


def average_current(g: Graph, protocol, beta: float, tau: float, tol: float = DEFAULT_TOL,
                    grid: int = DEFAULT_GRID, basis: Optional[CycleBasis] = None) -> CurrentReport:
    """Flux integrated over one period of the periodic solution.

    The chain is conserved only up to ``rho(0) - rho(1)``; cycle coordinates
    are read off the non-tree edges without enforcing conservation.
    """
    sol = periodic_solution(g, protocol, beta, tau, tol, grid)
    Q = sol.flux_integral[-1].copy()
    basis = basis or cycle_basis(g)
    div = float(np.max(np.abs(g.incidence @ Q))) if g.vertex_count else 0.0
    coords = Q[list(basis.non_tree)]
    res = continuity_residual(g, protocol, sol)
    return CurrentReport(
        chain=Q,
        coords=coords,
        basis=basis,
        divergence_residual=div,
        diagnostics={
            "closure_error": sol.closure_error,
            "fixed_point_gap": sol.fixed_point_gap,
            "inverse_norm": sol.inverse_norm,
            "continuity_pointwise": res["pointwise"],
            "continuity_integral": res["integral"],
            "beta": beta,
            "tau_d": tau,
        },
    )


@dataclass(frozen=True)
class DecayEstimate:
    rate: float
    restricted_monodromy_norm: Optional[float] = None
    fitted_constant: Optional[float] = None


def decay_constants(g: Graph, protocol, beta: float, samples: int = 256, tau: Optional[float] = None,
                    tol: float = DEFAULT_TOL) -> DecayEstimate:
    """Smallest spectral gap of ``H(gamma(t))`` over ``samples`` times.

    With ``tau`` also report the monodromy norm on zero-sum vectors and the
    constant ``c = norm * exp(rate * tau)``.
    """
    lam = min(spectral_gap(g, beta, protocol.evaluate(t)[0]) for t in np.arange(samples) / samples)
    if tau is None:
        return DecayEstimate(lam)
    nrm = restricted_norm(monodromy(g, protocol, beta, tau, tol))
    with np.errstate(over="ignore"):
        c = nrm * float(np.exp(lam * tau))
    return DecayEstimate(lam, nrm, c)


def frozen_propagator(g: Graph, beta: float, p: ParamPoint, s: float) -> np.ndarray:
    """``exp(s H)`` through the symmetric eigendecomposition (oracle for frozen ``H``)."""
    S, shift = symmetrized_operator(g, beta, p)
    w, U = np.linalg.eigh(S)
    half = 0.5 * beta * (p.E - p.E.min())
    D = np.exp(half)
    Dinv = np.exp(-half)
    return (Dinv[:, None] * (U * np.exp(s * np.exp(shift) * w)) @ U.T) * D[None, :]


def expm_oracle(g: Graph, beta: float, p: ParamPoint, s: float) -> np.ndarray:
    return scipy.linalg.expm(s * master_operator(g, beta, p).dense())


def check_zero_sum(x, tol: float = 1e-9) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if abs(x.sum()) > tol * max(1.0, np.max(np.abs(x), initial=0.0)):
        raise NotZeroSum(f"vector sums to {x.sum():.3e}")
    return x
