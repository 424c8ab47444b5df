"""Outer continuation: drive the smoothing parameter to zero geometrically.

Each stage solves the smoothed equilibrium system at the current level and
warm-starts the next one. A first-order predictor improves the primal warm
start: differentiating the stacked stationarity conditions along the
smoothing parameter yields a small SPD linear system for dx/deps whose
coefficient matrix is the Hessian stack plus the smoothing curvature term.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .kkt import merit
from .model import GameSpec, PrimalDualPoint
from .smoothing import AffineMaps, phi_tilde_d2, phi_tilde_deps, phi_tilde_dt_deps
from .solvers import (
    InnerResult,
    NewtonConfig,
    SubgradConfig,
    lu_solve,
    newton_solve,
    subgradient_solve,
)

__all__ = [
    "HomotopyConfig",
    "StageRecord",
    "HomotopyTrace",
    "taylor_direction",
    "homotopy_solve",
]


@dataclass
class HomotopyConfig:
    eps0: float = 1.6
    gamma: float = 0.5
    eps_min: float = 1e-6
    taylor: bool = True
    inner: str = "newton"
    inner_cfg: NewtonConfig | SubgradConfig | None = None
    p: int = 2
    # 'mixed' uses the mixed second derivative in the predictor right-hand
    # side (consistent with implicit differentiation); 'eps' uses the plain
    # parameter derivative for comparison.
    taylor_rhs: str = "mixed"

    def __post_init__(self):
        if not 1.0 < self.eps0 < 2.0:
            raise ValueError("eps0 must lie in (1, 2)")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0.0 < self.eps_min < self.eps0:
            raise ValueError("eps_min must lie in (0, eps0)")
        if self.inner not in ("newton", "subgradient"):
            raise ValueError("inner must be 'newton' or 'subgradient'")
        if self.taylor_rhs not in ("mixed", "eps"):
            raise ValueError("taylor_rhs must be 'mixed' or 'eps'")


@dataclass
class StageRecord:
    """Diagnostics of one continuation stage."""

    index: int
    eps: float
    z_star: PrimalDualPoint
    inner_iterations: int
    merit_final: float
    warm_start_merit: float
    predictor_norm: float
    converged: bool
    wall_ms: float
    fallback_steps: int = 0
    merit_history: list[float] = field(default_factory=list)
    step_norms: list[float] = field(default_factory=list)


@dataclass
class HomotopyTrace:
    """Full continuation record; the last stage holds the candidate equilibrium."""

    stages: list[StageRecord]
    converged: bool

    @property
    def final(self) -> PrimalDualPoint:
        return self.stages[-1].z_star

    @property
    def final_eps(self) -> float:
        return self.stages[-1].eps

    def eps_values(self) -> np.ndarray:
        return np.array([s.eps for s in self.stages])

    def errors_to_final(self) -> np.ndarray:
        x_ref = self.final.x
        return np.array([float(np.linalg.norm(s.z_star.x - x_ref)) for s in self.stages])


def taylor_direction(
    game: GameSpec,
    x: np.ndarray,
    eps: float,
    p: int = 2,
    rhs: str = "mixed",
    maps: AffineMaps | None = None,
) -> np.ndarray:
    """Sensitivity dx/deps of the stacked stationarity conditions.

    The coefficient matrix is SPD (Hessian stack plus a nonnegative
    rank-one sum), so the system is always solvable.
    """
    mp = maps if maps is not None else AffineMaps.from_game(game)
    a = game.follower.a
    t = mp.A_diff @ np.asarray(x, dtype=float)
    E = game.Q_block + 0.5 * (mp.A_diff.T * (a * phi_tilde_d2(t, eps, p))) @ mp.A_diff
    if rhs == "mixed":
        h = -0.5 * mp.A_diff.T @ (a * phi_tilde_dt_deps(t, eps, p))
    elif rhs == "eps":
        h = 0.5 * mp.A_diff.T @ (a * phi_tilde_deps(t, eps, p))
    else:
        raise ValueError("rhs must be 'mixed' or 'eps'")
    d = lu_solve(E, h)
    if d is None:  # cannot happen for valid game data; defensive
        raise np.linalg.LinAlgError("predictor system unexpectedly singular")
    return d


def _solve_inner(game, z, eps, cfg: HomotopyConfig) -> InnerResult:
    if cfg.inner == "newton":
        inner_cfg = cfg.inner_cfg if isinstance(cfg.inner_cfg, NewtonConfig) else NewtonConfig()
        return newton_solve(game, z, eps, cfg.p, inner_cfg)
    inner_cfg = cfg.inner_cfg if isinstance(cfg.inner_cfg, SubgradConfig) else SubgradConfig()
    return subgradient_solve(game, z, eps, cfg.p, inner_cfg)


def homotopy_solve(
    game: GameSpec,
    z0: PrimalDualPoint | None = None,
    cfg: HomotopyConfig | None = None,
) -> HomotopyTrace:
    """Run the full continuation down to the target smoothing level.

    Stage levels follow eps0 * gamma**i exactly; the run stops after the
    first stage at or below ``eps_min``, or immediately when a stage fails
    to converge (the trace marks the failing stage).
    """
    cfg = cfg or HomotopyConfig()
    maps = AffineMaps.from_game(game)
    z_warm = (z0 or PrimalDualPoint.zeros(game)).copy()
    stages: list[StageRecord] = []
    predictor_norm = 0.0
    i = 0
    while True:
        eps = cfg.eps0 * cfg.gamma**i
        warm_merit = merit(game, z_warm, eps, cfg.p, maps)
        start = time.perf_counter()
        res = _solve_inner(game, z_warm, eps, cfg)
        wall_ms = (time.perf_counter() - start) * 1e3

        eps_next = cfg.eps0 * cfg.gamma ** (i + 1)
        d = np.zeros(game.n)
        if res.converged and cfg.taylor and eps > cfg.eps_min:
            d = taylor_direction(game, res.z.x, eps_next, cfg.p, cfg.taylor_rhs, maps)
        predictor_norm = float(np.linalg.norm(d))

        stages.append(
            StageRecord(
                index=i,
                eps=eps,
                z_star=res.z,
                inner_iterations=res.iterations,
                merit_final=res.merit,
                warm_start_merit=warm_merit,
                predictor_norm=predictor_norm,
                converged=res.converged,
                wall_ms=wall_ms,
                fallback_steps=res.fallback_steps,
                merit_history=res.merit_history,
                step_norms=res.step_norms,
            )
        )
        if not res.converged or eps <= cfg.eps_min:
            break
        x_warm = res.z.x - (eps - eps_next) * d
        z_warm = PrimalDualPoint(x_warm, res.z.lam.copy())
        i += 1
    return HomotopyTrace(stages=stages, converged=all(s.converged for s in stages))
