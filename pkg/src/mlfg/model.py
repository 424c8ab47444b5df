"""Game data model: leader/follower problem data, validation, and file I/O.

A game consists of N leaders, each minimizing a strictly convex quadratic
objective over a polyhedron ``A.T @ x_nu + b <= 0``, coupled through a
single follower whose quadratic program has a diagonal positive definite
Hessian and lower bounds driven linearly by the joint leader strategy.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "GameFormatError",
    "GameValidationError",
    "LeaderSpec",
    "FollowerSpec",
    "GameSpec",
    "PrimalDualPoint",
    "load_game",
    "save_game",
    "validate_game",
    "slice_rows",
    "split_strategy",
    "compose_strategy",
]

# Relative pivot threshold for the positive definiteness check.
SPD_PIVOT_RTOL = 1e-12
SYMMETRY_RTOL = 1e-12


class GameFormatError(ValueError):
    """Malformed game document: parse failure or inconsistent dimensions."""


class GameValidationError(ValueError):
    """Structurally well-formed game that violates a model assumption."""


def _array(x, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != ndim:
        raise GameFormatError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GameFormatError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def _spd_min_pivot(Q: np.ndarray) -> float:
    """Smallest pivot of a diagonally pivoted Cholesky factorization.

    Returns a negative or tiny value when ``Q`` is not positive definite;
    pivots are compared against ``SPD_PIVOT_RTOL * max|Q|`` by callers.
    """
    A = np.array(Q, dtype=float)
    n = A.shape[0]
    min_pivot = np.inf
    for _ in range(n):
        d = np.diag(A)
        j = int(np.argmax(d))
        piv = d[j]
        min_pivot = min(min_pivot, piv)
        if piv <= 0.0:
            return min_pivot
        v = A[:, j] / piv
        A = A - piv * np.outer(v, v)
        A[j, :] = 0.0
        A[:, j] = 0.0
    return min_pivot


@dataclass(frozen=True)
class LeaderSpec:
    """One leader's quadratic program data.

    The constraint convention is ``A.T @ x + b <= 0`` with ``A`` of shape
    (n_vars, n_constraints).
    """

    Q: np.ndarray
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Q", _array(self.Q, "Q", 2))
        object.__setattr__(self, "c", _array(self.c, "c", 1))
        object.__setattr__(self, "A", _array(self.A, "A", 2))
        object.__setattr__(self, "b", _array(self.b, "b", 1))

    @property
    def n_vars(self) -> int:
        return self.Q.shape[0]

    @property
    def n_constraints(self) -> int:
        return self.A.shape[1]

    def constraints(self, x_nu: np.ndarray) -> np.ndarray:
        """Constraint values g(x_nu) = A.T x_nu + b (feasible iff <= 0)."""
        return self.A.T @ x_nu + self.b


@dataclass(frozen=True)
class FollowerSpec:
    """Follower QP data: diagonal Hessian, linear drive and bound maps."""

    Qy_diag: np.ndarray
    B: np.ndarray
    L: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Qy_diag", _array(self.Qy_diag, "Qy_diag", 1))
        object.__setattr__(self, "B", _array(self.B, "B", 2))
        object.__setattr__(self, "L", _array(self.L, "L", 2))
        object.__setattr__(self, "a", _array(self.a, "a", 1))

    @property
    def m(self) -> int:
        """Number of follower variables."""
        return self.Qy_diag.shape[0]


@dataclass(frozen=True)
class GameSpec:
    """Validated multi-leader-follower game. Immutable after construction."""

    leaders: tuple[LeaderSpec, ...]
    follower: FollowerSpec

    def __post_init__(self):
        object.__setattr__(self, "leaders", tuple(self.leaders))
        problems = validate_game(self, dimensions_only=True)
        if problems:
            raise GameFormatError("; ".join(problems))

    @property
    def num_leaders(self) -> int:
        return len(self.leaders)

    @property
    def n(self) -> int:
        """Total leader variables."""
        return sum(ld.n_vars for ld in self.leaders)

    @property
    def m(self) -> int:
        """Follower variables."""
        return self.follower.m

    @property
    def m_bar(self) -> int:
        """Total leader constraints."""
        return sum(ld.n_constraints for ld in self.leaders)

    @cached_property
    def x_offsets(self) -> tuple[int, ...]:
        off = [0]
        for ld in self.leaders:
            off.append(off[-1] + ld.n_vars)
        return tuple(off)

    @cached_property
    def lambda_offsets(self) -> tuple[int, ...]:
        off = [0]
        for ld in self.leaders:
            off.append(off[-1] + ld.n_constraints)
        return tuple(off)

    def x_slice(self, nu: int) -> slice:
        """Index slice of leader ``nu`` (1-based) in the stacked strategy."""
        self._check_leader(nu)
        return slice(self.x_offsets[nu - 1], self.x_offsets[nu])

    def lambda_slice(self, nu: int) -> slice:
        self._check_leader(nu)
        return slice(self.lambda_offsets[nu - 1], self.lambda_offsets[nu])

    def _check_leader(self, nu: int) -> None:
        if not 1 <= nu <= self.num_leaders:
            raise IndexError(f"leader index {nu} out of range 1..{self.num_leaders}")

    @cached_property
    def Q_block(self) -> np.ndarray:
        """Block-diagonal stack of the leader Hessians, shape (n, n)."""
        Q = np.zeros((self.n, self.n))
        for nu, ld in enumerate(self.leaders, start=1):
            s = self.x_slice(nu)
            Q[s, s] = ld.Q
        Q.setflags(write=False)
        return Q

    @cached_property
    def c_stack(self) -> np.ndarray:
        c = np.concatenate([ld.c for ld in self.leaders])
        c.setflags(write=False)
        return c

    @cached_property
    def constraint_gradient_block(self) -> np.ndarray:
        """Block-diagonal stack of the constraint gradients, shape (n, m_bar)."""
        G = np.zeros((self.n, self.m_bar))
        for nu, ld in enumerate(self.leaders, start=1):
            G[self.x_slice(nu), self.lambda_slice(nu)] = ld.A
        G.setflags(write=False)
        return G

    def constraint_values(self, x: np.ndarray) -> np.ndarray:
        """Stacked constraint values over all leaders, shape (m_bar,)."""
        return np.concatenate(
            [ld.constraints(x[self.x_slice(nu)]) for nu, ld in enumerate(self.leaders, start=1)]
        )

    def min_curvature(self) -> float:
        """Smallest eigenvalue of the block-diagonal Hessian stack."""
        return min(float(np.linalg.eigvalsh(ld.Q)[0]) for ld in self.leaders)


@dataclass
class PrimalDualPoint:
    """Joint strategy and leader multipliers.

    Iterates may carry negative multipliers; nonnegativity is only a
    property of converged solves.
    """

    x: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.lam = np.asarray(self.lam, dtype=float)

    @classmethod
    def zeros(cls, game: GameSpec) -> "PrimalDualPoint":
        return cls(np.zeros(game.n), np.zeros(game.m_bar))

    @classmethod
    def from_stack(cls, game: GameSpec, z: np.ndarray) -> "PrimalDualPoint":
        z = np.asarray(z, dtype=float)
        if z.shape != (game.n + game.m_bar,):
            raise ValueError(f"expected stacked point of length {game.n + game.m_bar}")
        return cls(z[: game.n].copy(), z[game.n :].copy())

    def stack(self) -> np.ndarray:
        return np.concatenate([self.x, self.lam])

    def copy(self) -> "PrimalDualPoint":
        return PrimalDualPoint(self.x.copy(), self.lam.copy())


def validate_game(game: GameSpec, dimensions_only: bool = False) -> list[str]:
    """Check every model assumption that is decidable from the data.

    Returns a list of human-readable findings; an empty list means the game
    is valid. With ``dimensions_only`` the (cheaper) shape bookkeeping is
    checked and assumption-level findings are skipped.
    """
    findings: list[str] = []
    if game.num_leaders < 1:
        findings.append("game must have at least one leader")
        return findings

    n = 0
    for nu, ld in enumerate(game.leaders, start=1):
        k = ld.Q.shape[0]
        if ld.Q.shape != (k, k):
            findings.append(f"leader {nu}: Q must be square, got {ld.Q.shape}")
            continue
        if ld.c.shape != (k,):
            findings.append(f"leader {nu}: c has length {ld.c.shape[0]}, expected {k}")
        if ld.A.shape[0] != k:
            findings.append(
                f"leader {nu}: A has {ld.A.shape[0]} rows, expected {k} (one per variable)"
            )
        if ld.b.shape != (ld.A.shape[1],):
            findings.append(
                f"leader {nu}: b has length {ld.b.shape[0]}, expected {ld.A.shape[1]}"
            )
        n += k

    fol = game.follower
    m = fol.m
    if fol.B.shape != (n, m):
        findings.append(f"follower: B has shape {fol.B.shape}, expected {(n, m)}")
    if fol.L.shape != (n, m):
        findings.append(f"follower: L has shape {fol.L.shape}, expected {(n, m)}")
    if fol.a.shape != (m,):
        findings.append(f"follower: a has length {fol.a.shape[0]}, expected {m}")

    if findings or dimensions_only:
        return findings

    for nu, ld in enumerate(game.leaders, start=1):
        scale = np.max(np.abs(ld.Q)) or 1.0
        if np.max(np.abs(ld.Q - ld.Q.T)) > SYMMETRY_RTOL * scale:
            findings.append(f"leader {nu}: Q not symmetric")
        elif _spd_min_pivot(ld.Q) <= SPD_PIVOT_RTOL * scale:
            findings.append(f"leader {nu}: Q not positive definite")
    if np.any(fol.Qy_diag <= 0.0):
        findings.append("follower: Qy_diag must be strictly positive")
    if np.any(fol.a < 0.0):
        findings.append("follower: a must be nonnegative")
    return findings


def slice_rows(game: GameSpec, M: np.ndarray, nu: int) -> np.ndarray:
    """Row block of an (n, m) coupling matrix belonging to leader ``nu``."""
    M = np.asarray(M)
    if M.shape[0] != game.n:
        raise ValueError(f"matrix has {M.shape[0]} rows, expected {game.n}")
    return M[game.x_slice(nu), :]


def split_strategy(game: GameSpec, nu: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a joint strategy into (own block, rival blocks) for leader ``nu``."""
    x = np.asarray(x, dtype=float)
    s = game.x_slice(nu)
    rivals = np.concatenate([x[: s.start], x[s.stop :]])
    return x[s].copy(), rivals


def compose_strategy(
    game: GameSpec, nu: int, x_nu: np.ndarray, x_minus_nu: np.ndarray
) -> np.ndarray:
    """Inverse of :func:`split_strategy`."""
    s = game.x_slice(nu)
    x = np.empty(game.n)
    x[: s.start] = x_minus_nu[: s.start]
    x[s] = x_nu
    x[s.stop :] = x_minus_nu[s.start :]
    return x


def _game_from_dict(doc: dict) -> GameSpec:
    try:
        leaders = tuple(
            LeaderSpec(Q=ld["Q"], c=ld["c"], A=ld["A"], b=ld["b"]) for ld in doc["leaders"]
        )
        follower = FollowerSpec(
            Qy_diag=doc["follower"]["Qy_diag"],
            B=doc["follower"]["B"],
            L=doc["follower"]["L"],
            a=doc["follower"]["a"],
        )
    except KeyError as exc:
        raise GameFormatError(f"missing field {exc} in game document") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, GameFormatError):
            raise
        raise GameFormatError(f"malformed game document: {exc}") from exc
    return GameSpec(leaders=leaders, follower=follower)


def _game_to_dict(game: GameSpec) -> dict:
    return {
        "leaders": [
            {"Q": ld.Q.tolist(), "c": ld.c.tolist(), "A": ld.A.tolist(), "b": ld.b.tolist()}
            for ld in game.leaders
        ],
        "follower": {
            "Qy_diag": game.follower.Qy_diag.tolist(),
            "B": game.follower.B.tolist(),
            "L": game.follower.L.tolist(),
            "a": game.follower.a.tolist(),
        },
    }


def load_game(path: str | Path) -> GameSpec:
    """Load and validate a game from its JSON file format.

    Raises :class:`GameFormatError` for parse and dimension problems and
    :class:`GameValidationError` when the data violates a model assumption.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise GameFormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"{path} is not valid JSON: {exc}") from exc
    game = _game_from_dict(doc)
    findings = validate_game(game)
    if findings:
        raise GameValidationError("; ".join(findings))
    return game


def save_game(game: GameSpec, path: str | Path) -> None:
    """Write a game back to the JSON file format (round-trips bit-exactly)."""
    Path(path).write_text(json.dumps(_game_to_dict(game), indent=1) + "\n")


def bundled_dataset_path(number: int) -> Path:
    """Path of a packaged example dataset (1 or 2)."""
    p = Path(__file__).parent / "data" / f"dataset{number}.json"
    if not p.exists():
        raise GameFormatError(f"no bundled dataset {number}")
    return p


def load_bundled(number: int) -> GameSpec:
    return load_game(bundled_dataset_path(number))
