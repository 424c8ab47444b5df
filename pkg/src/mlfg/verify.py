"""Independent certification of candidate equilibria.

Certification never reuses the solver path: each leader's nonsmooth
problem is re-solved globally through an epigraph reformulation (exact
because the response weights are nonnegative) by exhaustive active-set
enumeration, and the limit point is checked against the strong stationarity
system of the complementarity-constrained form with explicitly constructed
multipliers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GameSpec, compose_strategy, split_strategy
from .smoothing import (
    best_response_exact,
    leader_objective,
    phi_tilde_d1,
    potential_value,
    smoothed_gradient_stack,
)
from .solvers import lu_solve

__all__ = [
    "OracleError",
    "Certificate",
    "EpigraphQP",
    "best_response_qp_oracle",
    "verify_nash",
    "s_stationarity_certificate",
    "certify",
    "smoothing_drift",
    "monotonicity_probe",
    "potential_identity_probe",
]

FEAS_TOL = 1e-9
MULT_TOL = 1e-9


class OracleError(RuntimeError):
    """The epigraph program has no feasible stationary candidate."""


@dataclass
class Certificate:
    """Nash-gap and strong-stationarity evidence for a candidate point."""

    nash_gaps: np.ndarray | None = None
    nash_tol: float = 1e-5
    xi_bar: np.ndarray | None = None
    Gamma1: np.ndarray | None = None
    Gamma2: np.ndarray | None = None
    s_stat_residuals: dict[str, float] | None = None
    s_tol: float = 1e-6

    @property
    def nash_certified(self) -> bool:
        return self.nash_gaps is not None and float(np.max(self.nash_gaps)) <= self.nash_tol

    @property
    def s_certified(self) -> bool:
        if self.s_stat_residuals is None:
            return False
        return max(self.s_stat_residuals.values()) <= self.s_tol

    @property
    def certified(self) -> bool:
        return self.nash_certified and self.s_certified

    def merged_with(self, other: "Certificate") -> "Certificate":
        return Certificate(
            nash_gaps=self.nash_gaps if self.nash_gaps is not None else other.nash_gaps,
            nash_tol=self.nash_tol if self.nash_gaps is not None else other.nash_tol,
            xi_bar=self.xi_bar if self.xi_bar is not None else other.xi_bar,
            Gamma1=self.Gamma1 if self.Gamma1 is not None else other.Gamma1,
            Gamma2=self.Gamma2 if self.Gamma2 is not None else other.Gamma2,
            s_stat_residuals=(
                self.s_stat_residuals if self.s_stat_residuals is not None
                else other.s_stat_residuals
            ),
            s_tol=self.s_tol if self.s_stat_residuals is not None else other.s_tol,
        )

    def to_dict(self) -> dict:
        def arr(v):
            return None if v is None else np.asarray(v).tolist()

        return {
            "nash_gaps": arr(self.nash_gaps),
            "nash_tol": self.nash_tol,
            "nash_certified": self.nash_certified,
            "xi_bar": arr(self.xi_bar),
            "Gamma1": arr(self.Gamma1),
            "Gamma2": arr(self.Gamma2),
            "s_stat_residuals": self.s_stat_residuals,
            "s_tol": self.s_tol,
            "s_certified": self.s_certified,
            "certified": self.certified,
        }


@dataclass(frozen=True)
class EpigraphQP:
    """One leader's problem against fixed rivals, lifted to an exact QP.

    The decision is the own block stacked with one epigraph variable per
    follower component; because the response weights are nonnegative the
    lift is tight at the optimum. Constraint rows are ``G w + d <= 0``:
    both response branches lower-bound the epigraph variables, then the
    leader's own polyhedron.
    """

    H: np.ndarray
    q: np.ndarray
    G: np.ndarray
    d: np.ndarray

    @classmethod
    def build(cls, game: GameSpec, nu: int, x_minus_nu: np.ndarray) -> "EpigraphQP":
        ld = game.leaders[nu - 1]
        fol = game.follower
        n_nu, m = ld.n_vars, game.m

        drive = fol.B.T / fol.Qy_diag[:, None]  # (m, n)
        bound = fol.L.T
        s_own = game.x_slice(nu)
        x_full = compose_strategy(game, nu, np.zeros(n_nu), np.asarray(x_minus_nu, dtype=float))

        H = np.zeros((n_nu + m, n_nu + m))
        H[:n_nu, :n_nu] = ld.Q
        q = np.concatenate([ld.c, fol.a])

        rows = []
        offsets = []
        for M in (drive, bound):
            Gx = np.zeros((m, n_nu + m))
            Gx[:, :n_nu] = M[:, s_own]
            Gx[:, n_nu:] = -np.eye(m)
            rows.append(Gx)
            offsets.append(M @ x_full)
        G_lead = np.zeros((ld.n_constraints, n_nu + m))
        G_lead[:, :n_nu] = ld.A.T
        rows.append(G_lead)
        offsets.append(ld.b)
        return cls(H=H, q=q, G=np.vstack(rows), d=np.concatenate(offsets))

    def objective(self, w: np.ndarray) -> float:
        return float(0.5 * w @ self.H @ w + self.q @ w)


def best_response_qp_oracle(
    game: GameSpec, nu: int, x_minus_nu: np.ndarray
) -> tuple[np.ndarray, float]:
    """Global optimum of leader ``nu``'s problem against fixed rivals.

    Solves the epigraph form by enumerating every active set: each subset
    yields an equality-constrained stationary system; candidates that are
    primal feasible with nonnegative multipliers are exact KKT points of
    the convex program, so the best of them is the global minimizer. Sizes
    here are tiny (at most a few hundred subsets).
    """
    qp = EpigraphQP.build(game, nu, x_minus_nu)
    n_w = qp.H.shape[0]
    n_cons = qp.G.shape[0]
    best: tuple[float, np.ndarray] | None = None
    for mask in range(2**n_cons):
        active = [i for i in range(n_cons) if mask >> i & 1]
        k = len(active)
        KKT = np.zeros((n_w + k, n_w + k))
        KKT[:n_w, :n_w] = qp.H
        if k:
            Ga = qp.G[active, :]
            KKT[:n_w, n_w:] = Ga.T
            KKT[n_w:, :n_w] = Ga
        rhs = np.concatenate([-qp.q, -qp.d[active]])
        sol = lu_solve(KKT, rhs)
        if sol is None:
            continue
        w, mu = sol[:n_w], sol[n_w:]
        if np.any(mu < -MULT_TOL):
            continue
        if np.any(qp.G @ w + qp.d > FEAS_TOL):
            continue
        value = qp.objective(w)
        if best is None or value < best[0]:
            best = (value, w)
    if best is None:
        raise OracleError(f"leader {nu}: no feasible stationary active set found")
    value, w = best
    n_nu = game.leaders[nu - 1].n_vars
    return w[:n_nu].copy(), float(value)


def verify_nash(game: GameSpec, x: np.ndarray, tol: float = 1e-5) -> Certificate:
    """Per-leader optimality gaps against the epigraph oracle.

    A gap is the candidate objective minus the oracle optimum with rivals
    frozen; all gaps at or below ``tol`` certify the candidate as an
    equilibrium of the nonsmooth game at that tolerance.
    """
    x = np.asarray(x, dtype=float)
    gaps = np.empty(game.num_leaders)
    for nu in range(1, game.num_leaders + 1):
        _, rivals = split_strategy(game, nu, x)
        _, opt = best_response_qp_oracle(game, nu, rivals)
        gaps[nu - 1] = leader_objective(game, nu, x) - opt
    return Certificate(nash_gaps=gaps, nash_tol=tol)


def s_stationarity_certificate(
    game: GameSpec,
    x: np.ndarray,
    lam: np.ndarray,
    eps_final: float,
    p: int = 2,
    tol: float = 1e-6,
    branch_consistent: bool = True,
) -> Certificate:
    """Strong stationarity residuals with constructed multipliers.

    The limit derivative values of the smoothing kernel are read off at the
    final smoothing level and snapped to +/-1 outside ``1 - 10*eps_final``;
    the complementarity multipliers split the response weights between the
    two branches accordingly. ``branch_consistent=False`` selects the
    swapped (drive/bound interchanged) split for comparison.
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    fol = game.follower
    a = fol.a

    t = (fol.L.T - fol.B.T / fol.Qy_diag[:, None]) @ x
    xi = np.asarray(phi_tilde_d1(t, eps_final, p), dtype=float)
    # snap near-saturated derivative values to the strict-branch limits;
    # the floor keeps the threshold meaningful at coarse smoothing levels
    thr = max(1.0 - 10.0 * eps_final, 0.5)
    xi_bar = np.where(xi >= thr, 1.0, np.where(xi <= -thr, -1.0, xi))

    if branch_consistent:
        Gamma1 = 0.5 * a * (1.0 - xi_bar)
    else:
        Gamma1 = 0.5 * a * (1.0 + xi_bar)
    Gamma2 = a - Gamma1

    y = best_response_exact(game, x)
    G1 = y - (fol.B.T @ x) / fol.Qy_diag
    G2 = y - fol.L.T @ x
    g = game.constraint_values(x)

    drive_transpose = fol.B / fol.Qy_diag[None, :]  # (n, m), adjoint of the scaled drive
    stat_x = (
        game.Q_block @ x
        + game.c_stack
        + game.constraint_gradient_block @ lam
        + drive_transpose @ Gamma1
        + fol.L @ Gamma2
    )

    residuals = {
        "stationarity_x": float(np.max(np.abs(stat_x))),
        "stationarity_y": float(np.max(np.abs(a - Gamma1 - Gamma2))),
        "primal_feasibility": float(max(0.0, np.max(g, initial=0.0))),
        "multiplier_sign": float(max(0.0, -np.min(lam, initial=0.0))),
        "constraint_complementarity": float(np.max(np.abs(g * lam), initial=0.0)),
        "response_complementarity": float(np.max(np.abs(np.minimum(G1, G2)))),
        "branch1_complementarity": float(np.max(np.abs(G1 * Gamma1))),
        "branch2_complementarity": float(np.max(np.abs(G2 * Gamma2))),
        "gamma_sign": float(max(0.0, -min(np.min(Gamma1), np.min(Gamma2)))),
    }
    return Certificate(
        xi_bar=xi_bar, Gamma1=Gamma1, Gamma2=Gamma2, s_stat_residuals=residuals, s_tol=tol
    )


def certify(
    game: GameSpec,
    x: np.ndarray,
    lam: np.ndarray,
    eps_final: float,
    p: int = 2,
    nash_tol: float = 1e-5,
    s_tol: float = 1e-6,
) -> Certificate:
    """Combined Nash-gap and strong-stationarity certificate."""
    nash = verify_nash(game, x, nash_tol)
    stat = s_stationarity_certificate(game, x, lam, eps_final, p, s_tol)
    return nash.merged_with(stat)


def smoothing_drift(game: GameSpec, eps_final: float) -> float:
    """Worst-case payoff drift of the smoothed game at a smoothing level.

    The smoothed response exceeds the exact one by at most ``eps_final``
    componentwise, so every smoothed objective is within
    ``eps_final * sum(a)`` of the exact one. Candidates taken from a run
    stopped at that level can only be certified up to this drift.
    """
    return float(eps_final * np.sum(game.follower.a))


def monotonicity_probe(
    game: GameSpec, eps: float, p: int = 2, trials: int = 100, seed: int = 0, scale: float = 3.0
) -> float:
    """Smallest observed monotonicity ratio of the stacked gradient map.

    The ratio (x - x')'(grad(x) - grad(x')) / |x - x'|^2 is bounded below
    by the smallest eigenvalue of the Hessian stack; this samples random
    distinct pairs and returns the minimum.
    """
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(trials):
        x = scale * rng.standard_normal(game.n)
        x_hat = scale * rng.standard_normal(game.n)
        diff = x - x_hat
        nrm2 = float(diff @ diff)
        if nrm2 == 0.0:
            continue
        gap = smoothed_gradient_stack(game, x, eps, p) - smoothed_gradient_stack(
            game, x_hat, eps, p
        )
        worst = min(worst, float(diff @ gap) / nrm2)
    return worst


def potential_identity_probe(
    game: GameSpec, trials: int = 100, seed: int = 0, scale: float = 3.0
) -> float:
    """Largest observed mismatch between unilateral objective and potential
    differences over random strategy pairs; zero up to rounding."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        nu = int(rng.integers(1, game.num_leaders + 1))
        x = scale * rng.standard_normal(game.n)
        x_alt = x.copy()
        x_alt[game.x_slice(nu)] = scale * rng.standard_normal(game.leaders[nu - 1].n_vars)
        d_obj = leader_objective(game, nu, x_alt) - leader_objective(game, nu, x)
        d_pot = potential_value(game, x_alt) - potential_value(game, x)
        worst = max(worst, abs(d_obj - d_pot))
    return worst
