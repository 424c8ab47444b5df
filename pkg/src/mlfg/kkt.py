"""Joint first-order system of the smoothed game and its piecewise Jacobian.

The residual stacks every leader's stationarity block with the
complementarity block ``min(lambda, -g)``; its roots are exactly the
equilibria of the smoothed game at the given smoothing level. The merit is
half the squared residual norm. The Jacobian is a selected element of the
Clarke generalized derivative: the min rows are differentiated branchwise,
with ties resolved to the multiplier branch (keeps the lower-right block
closer to the identity and thus the selection closer to nonsingular).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GameSpec, PrimalDualPoint
from .smoothing import AffineMaps, phi_tilde_d2, smoothed_gradient_stack

__all__ = [
    "KktResidual",
    "GeneralizedJacobian",
    "kkt_residual",
    "merit",
    "generalized_jacobian",
    "merit_subgradient",
]


@dataclass
class KktResidual:
    """Stationarity block F1 (length n) and complementarity block F2 (m_bar)."""

    F1: np.ndarray
    F2: np.ndarray

    def stack(self) -> np.ndarray:
        return np.concatenate([self.F1, self.F2])

    @property
    def merit(self) -> float:
        return 0.5 * (float(self.F1 @ self.F1) + float(self.F2 @ self.F2))


@dataclass
class GeneralizedJacobian:
    """Jacobian blocks by variable pair: (x, lambda) against (F1, F2).

    ``xx`` is symmetric positive definite (Hessian stack plus smoothing
    curvature), ``xl`` the block-diagonal constraint gradients, and each
    (lx, ll) row carries exactly one active branch of the min rows.
    """

    xx: np.ndarray
    xl: np.ndarray
    lx: np.ndarray
    ll: np.ndarray

    def matrix(self) -> np.ndarray:
        top = np.hstack([self.xx, self.xl])
        bottom = np.hstack([self.lx, self.ll])
        return np.vstack([top, bottom])


def kkt_residual(
    game: GameSpec,
    z: PrimalDualPoint,
    eps: float,
    p: int = 2,
    maps: AffineMaps | None = None,
) -> KktResidual:
    F1 = smoothed_gradient_stack(game, z.x, eps, p, maps) + game.constraint_gradient_block @ z.lam
    F2 = np.minimum(z.lam, -game.constraint_values(z.x))
    return KktResidual(F1=F1, F2=F2)


def merit(
    game: GameSpec,
    z: PrimalDualPoint,
    eps: float,
    p: int = 2,
    maps: AffineMaps | None = None,
) -> float:
    return kkt_residual(game, z, eps, p, maps).merit


def generalized_jacobian(
    game: GameSpec,
    z: PrimalDualPoint,
    eps: float,
    p: int = 2,
    maps: AffineMaps | None = None,
) -> GeneralizedJacobian:
    mp = maps if maps is not None else AffineMaps.from_game(game)
    n, m_bar = game.n, game.m_bar
    a = game.follower.a

    curv = a * phi_tilde_d2(mp.A_diff @ z.x, eps, p)
    xx = game.Q_block + 0.5 * (mp.A_diff.T * curv) @ mp.A_diff
    xl = np.array(game.constraint_gradient_block)

    # Branch selection per min row: the strict multiplier branch when
    # lam < -g, the strict constraint branch when lam > -g, and the
    # multiplier branch on ties.
    g = game.constraint_values(z.x)
    lx = np.zeros((m_bar, n))
    ll = np.zeros((m_bar, m_bar))
    constraint_branch = z.lam > -g
    for i in np.flatnonzero(constraint_branch):
        lx[i, :] = -game.constraint_gradient_block[:, i]
    ll[~constraint_branch, ~constraint_branch] = 1.0
    return GeneralizedJacobian(xx=xx, xl=xl, lx=lx, ll=ll)


def merit_subgradient(
    game: GameSpec,
    z: PrimalDualPoint,
    eps: float,
    p: int = 2,
    maps: AffineMaps | None = None,
) -> np.ndarray:
    """Element H^T F of the merit subdifferential for the selected branch."""
    H = generalized_jacobian(game, z, eps, p, maps).matrix()
    return H.T @ kkt_residual(game, z, eps, p, maps).stack()
