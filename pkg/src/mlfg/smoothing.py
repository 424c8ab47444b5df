"""Smoothed absolute value family, follower best responses, and objectives.

The kernel is ``phi_tilde(t) = (t**p + (2*eps)**p)**(1/p)`` for an even
exponent ``p``, a convex upper approximation of ``|t|`` that tightens as
``eps -> 0``. Substituting it for the absolute value in the follower's
closed-form best response makes every leader objective smooth while keeping
it convex, which is what the equilibrium solvers rely on.

All evaluators broadcast over ``t`` and are stabilized by factoring out
``max(|t|, 2*eps)`` so that large arguments neither overflow nor lose the
even-power sign structure.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GameSpec

__all__ = [
    "SmoothingFamily",
    "AffineMaps",
    "phi_tilde",
    "phi_tilde_d1",
    "phi_tilde_d2",
    "phi_tilde_deps",
    "phi_tilde_dt_deps",
    "best_response_exact",
    "best_response_smoothed",
    "leader_objective",
    "leader_objective_smoothed",
    "leader_gradient_smoothed",
    "smoothed_gradient_stack",
    "potential_value",
    "phi_value",
]


def _check(eps: float, p: int) -> None:
    if not eps > 0.0:
        raise ValueError(f"smoothing parameter must be positive, got {eps}")
    if p < 2 or p % 2 != 0:
        raise ValueError(f"exponent must be an even integer >= 2, got {p}")


def _scaled(t, eps: float):
    """Return (t/M, 2*eps/M, M) with M = max(|t|, 2*eps) > 0."""
    t = np.asarray(t, dtype=float)
    M = np.maximum(np.abs(t), 2.0 * eps)
    return t / M, 2.0 * eps / M, M


def phi_tilde(t, eps: float, p: int = 2):
    """Smoothed absolute value, >= |t|, even in t, -> |t| as eps -> 0."""
    _check(eps, p)
    u, v, M = _scaled(t, eps)
    return M * (u**p + v**p) ** (1.0 / p)


def phi_tilde_d1(t, eps: float, p: int = 2):
    """First t-derivative; odd, strictly increasing, range (-1, 1)."""
    _check(eps, p)
    u, v, M = _scaled(t, eps)
    return u ** (p - 1) * (u**p + v**p) ** (1.0 / p - 1.0)


def phi_tilde_d2(t, eps: float, p: int = 2):
    """Second t-derivative; strictly positive (the kernel is convex)."""
    _check(eps, p)
    u, v, M = _scaled(t, eps)
    return (p - 1) * u ** (p - 2) * v**p * (u**p + v**p) ** (1.0 / p - 2.0) / M


def phi_tilde_deps(t, eps: float, p: int = 2):
    """Derivative in the smoothing parameter; positive."""
    _check(eps, p)
    u, v, M = _scaled(t, eps)
    return 2.0 * v ** (p - 1) * (u**p + v**p) ** (1.0 / p - 1.0)


def phi_tilde_dt_deps(t, eps: float, p: int = 2):
    """Mixed second derivative d2/(dt deps); odd in t, zero at t = 0."""
    _check(eps, p)
    u, v, M = _scaled(t, eps)
    return 2.0 * (1 - p) * v ** (p - 1) * u ** (p - 1) * (u**p + v**p) ** (1.0 / p - 2.0) / M


@dataclass(frozen=True)
class SmoothingFamily:
    """Kernel exponent bundled with the derivative stack, for callers that
    prefer an object over free functions."""

    p: int = 2

    def __post_init__(self):
        _check(1.0, self.p)

    def value(self, t, eps: float):
        return phi_tilde(t, eps, self.p)

    def d1(self, t, eps: float):
        return phi_tilde_d1(t, eps, self.p)

    def d2(self, t, eps: float):
        return phi_tilde_d2(t, eps, self.p)

    def deps(self, t, eps: float):
        return phi_tilde_deps(t, eps, self.p)

    def dt_deps(self, t, eps: float):
        return phi_tilde_dt_deps(t, eps, self.p)


@dataclass(frozen=True)
class AffineMaps:
    """The two (m, n) maps driving the follower response.

    ``S`` is the sum map (bound plus scaled drive) and ``A_diff`` the
    difference map whose componentwise sign selects the active branch of
    the exact response. ``S + A_diff`` and ``S - A_diff`` reconstruct twice
    the bound map and twice the scaled drive map.
    """

    S: np.ndarray
    A_diff: np.ndarray

    @classmethod
    def from_game(cls, game: GameSpec) -> "AffineMaps":
        fol = game.follower
        scaled_drive = fol.B.T / fol.Qy_diag[:, None]
        bound = fol.L.T
        S = bound + scaled_drive
        A_diff = bound - scaled_drive
        S.setflags(write=False)
        A_diff.setflags(write=False)
        return cls(S=S, A_diff=A_diff)


def _maps(game: GameSpec, maps: AffineMaps | None) -> AffineMaps:
    return maps if maps is not None else AffineMaps.from_game(game)


def best_response_exact(game: GameSpec, x: np.ndarray) -> np.ndarray:
    """Componentwise max of the scaled drive and the lower bound.

    Satisfies y >= L.T x, Qy y - B.T x >= 0, and exact componentwise
    complementarity of the two residuals.
    """
    fol = game.follower
    x = np.asarray(x, dtype=float)
    return np.maximum((fol.B.T @ x) / fol.Qy_diag, fol.L.T @ x)


def best_response_smoothed(
    game: GameSpec, x: np.ndarray, eps: float, p: int = 2, maps: AffineMaps | None = None
) -> np.ndarray:
    """Smooth response 0.5*(S x + phi_tilde(A_diff x)); within eps of exact."""
    mp = _maps(game, maps)
    x = np.asarray(x, dtype=float)
    return 0.5 * (mp.S @ x + phi_tilde(mp.A_diff @ x, eps, p))


def leader_objective(game: GameSpec, nu: int, x: np.ndarray) -> float:
    """Nonsmooth objective of leader ``nu`` at the joint strategy ``x``."""
    ld = game.leaders[nu - 1]
    x_nu = np.asarray(x, dtype=float)[game.x_slice(nu)]
    quad = 0.5 * x_nu @ ld.Q @ x_nu + ld.c @ x_nu
    return float(quad + game.follower.a @ best_response_exact(game, x))


def leader_objective_smoothed(
    game: GameSpec, nu: int, x: np.ndarray, eps: float, p: int = 2,
    maps: AffineMaps | None = None,
) -> float:
    ld = game.leaders[nu - 1]
    x_nu = np.asarray(x, dtype=float)[game.x_slice(nu)]
    quad = 0.5 * x_nu @ ld.Q @ x_nu + ld.c @ x_nu
    return float(quad + game.follower.a @ best_response_smoothed(game, x, eps, p, maps))


def smoothed_gradient_stack(
    game: GameSpec, x: np.ndarray, eps: float, p: int = 2, maps: AffineMaps | None = None
) -> np.ndarray:
    """Stack of every leader's own-block gradient of its smoothed objective.

    Block nu equals ``grad_{x_nu} leader_objective_smoothed(nu)``; the stack
    is the map whose uniform monotonicity gives uniqueness of the smoothed
    equilibrium.
    """
    mp = _maps(game, maps)
    x = np.asarray(x, dtype=float)
    a = game.follower.a
    w = a * phi_tilde_d1(mp.A_diff @ x, eps, p)
    return game.Q_block @ x + game.c_stack + 0.5 * (mp.S.T @ a) + 0.5 * (mp.A_diff.T @ w)


def leader_gradient_smoothed(
    game: GameSpec, nu: int, x: np.ndarray, eps: float, p: int = 2,
    maps: AffineMaps | None = None,
) -> np.ndarray:
    return smoothed_gradient_stack(game, x, eps, p, maps)[game.x_slice(nu)]


def phi_value(game: GameSpec, x: np.ndarray) -> float:
    """Weighted follower response sum, the nonsmooth part of the potential."""
    return float(game.follower.a @ best_response_exact(game, x))


def potential_value(game: GameSpec, x: np.ndarray) -> float:
    """Exact potential: unilateral objective differences equal its differences."""
    x = np.asarray(x, dtype=float)
    quad = 0.0
    for nu, ld in enumerate(game.leaders, start=1):
        x_nu = x[game.x_slice(nu)]
        quad += 0.5 * x_nu @ ld.Q @ x_nu + ld.c @ x_nu
    return float(quad + phi_value(game, x))
