"""Inner equilibrium solvers at a fixed smoothing level.

Two methods minimize the merit (half squared residual norm):

* a semismooth Newton iteration on the joint system, taking full steps on
  a selected generalized Jacobian and falling back to a single safeguarded
  subgradient step whenever the Jacobian is singular or the full step fails
  to decrease the merit;
* a two-level subgradient descent that drives a shrinking stationarity
  tolerance, with normalized directions and a doubling/halving step length
  search against a sufficient-decrease test.

Both are deterministic and keep the merit monotonically nonincreasing.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kkt import generalized_jacobian, kkt_residual
from .model import GameSpec, PrimalDualPoint
from .smoothing import AffineMaps

__all__ = [
    "NewtonConfig",
    "SubgradConfig",
    "InnerResult",
    "lu_solve",
    "newton_solve",
    "subgradient_solve",
    "armijo_search",
    "aggregate_direction",
]


def lu_solve(M: np.ndarray, rhs: np.ndarray, pivot_tol: float = 1e-12) -> np.ndarray | None:
    """Solve a small dense system by LU with scaled partial pivoting.

    Returns None (the singular flag) when the best available pivot falls
    below ``pivot_tol`` times the largest initial row infinity-norm; the
    Newton solver treats that as its fallback trigger rather than an error.
    """
    A = np.array(M, dtype=float)
    b = np.array(rhs, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise ValueError(f"incompatible shapes {A.shape} and {b.shape}")
    if n == 0:
        return b
    threshold = pivot_tol * np.max(np.abs(A), initial=0.0)
    for k in range(n):
        piv = k + int(np.argmax(np.abs(A[k:, k])))
        if np.abs(A[piv, k]) < threshold or A[piv, k] == 0.0:
            return None
        if piv != k:
            A[[k, piv]] = A[[piv, k]]
            b[[k, piv]] = b[[piv, k]]
        mult = A[k + 1 :, k] / A[k, k]
        A[k + 1 :, k + 1 :] -= np.outer(mult, A[k, k + 1 :])
        b[k + 1 :] -= mult * b[k]
    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - A[k, k + 1 :] @ x[k + 1 :]) / A[k, k]
    return x


@dataclass
class NewtonConfig:
    beta: float = 0.5
    sigma: float = 1e-4
    tol: float = 1e-10
    max_iter: int = 200
    pivot_tol: float = 1e-12
    max_backtracks: int = 60

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if not 0.0 < self.sigma < 0.5:
            raise ValueError("sigma must lie in (0, 0.5)")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")


@dataclass
class SubgradConfig:
    delta0: float = 1.0
    gamma: float = 0.5
    # c1 gates the aggregation loop's descent test, which is vacuous for
    # zero-length probes; it is validated but only c2 reaches the step search
    c1: float = 0.2
    c2: float = 0.05
    max_outer: int = 50
    max_inner: int = 500
    tol: float = 1e-10
    sigma_min: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0.0 < self.c2 <= self.c1 <= 1.0:
            raise ValueError("need 0 < c2 <= c1 <= 1")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")


@dataclass
class InnerResult:
    """Outcome of one fixed-smoothing solve."""

    z: PrimalDualPoint
    merit: float
    iterations: int
    converged: bool
    fallback_steps: int = 0
    merit_history: list[float] = field(default_factory=list)
    step_norms: list[float] = field(default_factory=list)


def armijo_search(
    game: GameSpec,
    z: PrimalDualPoint,
    s: np.ndarray,
    eps: float,
    p: int = 2,
    cfg: NewtonConfig | None = None,
    maps: AffineMaps | None = None,
) -> tuple[float, bool]:
    """Largest backtracked step t with merit(z + t*s) <= merit(z) - t*sigma*|s|^2.

    Returns (0.0, False) when no trial step achieves the decrease, which
    callers read as a no-descent flag.
    """
    cfg = cfg or NewtonConfig()
    z0 = z.stack()
    psi0 = kkt_residual(game, z, eps, p, maps).merit
    slope = cfg.sigma * float(s @ s)
    t = 1.0
    for _ in range(cfg.max_backtracks + 1):
        trial = PrimalDualPoint.from_stack(game, z0 + t * s)
        psi_trial = kkt_residual(game, trial, eps, p, maps).merit
        # strict decrease keeps steps below float resolution from passing
        if psi_trial <= psi0 - t * slope and psi_trial < psi0:
            return t, True
        t *= cfg.beta
    return 0.0, False


def newton_solve(
    game: GameSpec,
    z0: PrimalDualPoint | None = None,
    eps: float = 1.0,
    p: int = 2,
    cfg: NewtonConfig | None = None,
) -> InnerResult:
    """Globalized semismooth Newton iteration on the joint system.

    Full Newton steps are accepted whenever the selected Jacobian is
    nonsingular and the step decreases the merit; otherwise a single
    safeguarded subgradient step is taken before Newton is retried.
    """
    cfg = cfg or NewtonConfig()
    maps = AffineMaps.from_game(game)
    z = (z0 or PrimalDualPoint.zeros(game)).copy()
    fallback_steps = 0
    merit_history: list[float] = []
    step_norms: list[float] = []

    res = kkt_residual(game, z, eps, p, maps)
    psi = res.merit
    merit_history.append(psi)
    iterations = 0
    converged = psi <= cfg.tol
    while not converged and iterations < cfg.max_iter:
        if not np.all(np.isfinite(res.stack())):
            raise FloatingPointError("residual became non-finite during Newton solve")
        H = generalized_jacobian(game, z, eps, p, maps).matrix()
        step = lu_solve(H, -res.stack(), cfg.pivot_tol)
        applied = None
        if step is not None:
            trial = PrimalDualPoint.from_stack(game, z.stack() + step)
            trial_res = kkt_residual(game, trial, eps, p, maps)
            if trial_res.merit < psi:
                applied = (trial, trial_res, step)
        if applied is None:
            # singular Jacobian or no-descent full step: one subgradient step
            s = -(H.T @ res.stack())
            t, ok = armijo_search(game, z, s, eps, p, cfg, maps)
            if not ok:
                break
            fallback_steps += 1
            trial = PrimalDualPoint.from_stack(game, z.stack() + t * s)
            applied = (trial, kkt_residual(game, trial, eps, p, maps), t * s)
        z, res, taken = applied
        psi = res.merit
        iterations += 1
        merit_history.append(psi)
        step_norms.append(float(np.linalg.norm(taken)))
        converged = psi <= cfg.tol
    return InnerResult(
        z=z,
        merit=psi,
        iterations=iterations,
        converged=converged,
        fallback_steps=fallback_steps,
        merit_history=merit_history,
        step_norms=step_norms,
    )


def aggregate_direction(v: np.ndarray, v_tilde: np.ndarray) -> np.ndarray:
    """Minimum-norm convex combination of two descent candidates."""
    diff = v_tilde - v
    denom = float(diff @ diff)
    if denom == 0.0:
        return np.array(v, dtype=float)
    c = float(np.clip((v_tilde @ diff) / denom, 0.0, 1.0))
    return c * v + (1.0 - c) * v_tilde


def _step_search(psi_at, psi0: float, v_norm: float, c2: float, sigma_min: float) -> float:
    """Doubling/halving search for the largest step passing sufficient decrease.

    The test is psi(sigma) - psi0 <= -c2 * sigma * v_norm along a normalized
    direction; returns 0.0 when even sigma_min fails.
    """

    def passes(sigma: float) -> bool:
        return psi_at(sigma) - psi0 <= -c2 * sigma * v_norm

    sigma = 1.0
    if passes(sigma):
        while sigma < 2.0**30 and passes(2.0 * sigma):
            sigma *= 2.0
        return sigma
    while sigma > sigma_min:
        sigma *= 0.5
        if passes(sigma):
            return sigma
    return 0.0


def subgradient_solve(
    game: GameSpec,
    z0: PrimalDualPoint | None = None,
    eps: float = 1.0,
    p: int = 2,
    cfg: SubgradConfig | None = None,
) -> InnerResult:
    """Two-level subgradient descent on the merit.

    The outer level shrinks a stationarity tolerance geometrically; the
    inner level takes normalized subgradient steps until the current
    subgradient norm falls below that tolerance. Quasisecants of positive
    probe length reduce to plain subgradients here (zero-length probes), so
    the direction-aggregation loop collapses after its first candidate.
    """
    cfg = cfg or SubgradConfig()
    maps = AffineMaps.from_game(game)
    z = (z0 or PrimalDualPoint.zeros(game)).copy()
    psi = kkt_residual(game, z, eps, p, maps).merit
    merit_history = [psi]
    step_norms: list[float] = []
    iterations = 0
    delta = cfg.delta0

    def psi_of(zs: np.ndarray) -> float:
        return kkt_residual(game, PrimalDualPoint.from_stack(game, zs), eps, p, maps).merit

    for _ in range(cfg.max_outer):
        if psi <= cfg.tol:
            break
        for _ in range(cfg.max_inner):
            if psi <= cfg.tol:
                break
            H = generalized_jacobian(game, z, eps, p, maps).matrix()
            v = H.T @ kkt_residual(game, z, eps, p, maps).stack()
            # with zero-length probes the first aggregate equals the
            # subgradient itself, so no further candidates are collected
            v_bar = aggregate_direction(v, v)
            v_norm = float(np.linalg.norm(v_bar))
            if v_norm <= delta:
                break
            d = -v_bar / v_norm
            z_stacked = z.stack()
            sigma = _step_search(
                lambda s: psi_of(z_stacked + s * d), psi, v_norm, cfg.c2, cfg.sigma_min
            )
            if sigma == 0.0:
                break
            z = PrimalDualPoint.from_stack(game, z_stacked + sigma * d)
            psi = psi_of(z.stack())
            iterations += 1
            merit_history.append(psi)
            step_norms.append(sigma)
        delta *= cfg.gamma
    return InnerResult(
        z=z,
        merit=psi,
        iterations=iterations,
        converged=psi <= cfg.tol,
        fallback_steps=0,
        merit_history=merit_history,
        step_norms=step_norms,
    )
