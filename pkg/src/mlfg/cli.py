"""Command-line surface: solve, verify, and benchmark.

Exit codes: 0 success, 1 solver non-convergence, 2 certification failure,
3 input error. Reports are JSON, iteration logs are CSV with a fixed
column schema so downstream plotting can rely on it.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .homotopy import HomotopyConfig, HomotopyTrace, homotopy_solve
from .model import (
    GameFormatError,
    GameSpec,
    GameValidationError,
    PrimalDualPoint,
    _game_to_dict,
    bundled_dataset_path,
    load_game,
)
from .smoothing import best_response_exact
from .solvers import NewtonConfig, SubgradConfig, newton_solve
from .verify import Certificate, OracleError, certify, smoothing_drift

NASH_TOL_BASE = 1e-5
STAT_TOL_BASE = 1e-6

ITER_LOG_COLUMNS = [
    "stage",
    "eps",
    "method",
    "taylor",
    "inner_iter",
    "merit",
    "step_norm",
    "predictor_norm",
    "wall_ms",
]
BENCH_COLUMNS = ["method", "taylor", "eps", "inner_iters", "final_merit", "wall_ms"]
MULTISTART_COLUMNS = ["repeat", "start_id", "eps", "method", "inner_iter", "merit"]

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CERT = 2
EXIT_INPUT = 3


class InputError(ValueError):
    pass


def _resolve_game_path(args) -> Path:
    if getattr(args, "dataset", None) is not None:
        return bundled_dataset_path(args.dataset)
    if getattr(args, "data", None):
        return Path(args.data)
    raise InputError("one of --data or --dataset is required")


def _load(args) -> tuple[GameSpec, Path]:
    path = _resolve_game_path(args)
    return load_game(path), path


def _fingerprint(game: GameSpec) -> dict:
    canonical = json.dumps(_game_to_dict(game), sort_keys=True, separators=(",", ":"))
    return {
        "num_leaders": game.num_leaders,
        "n": game.n,
        "m": game.m,
        "m_bar": game.m_bar,
        "sha256": hashlib.sha256(canonical.encode()).hexdigest(),
    }


def _initial_point(game: GameSpec, seed: int | None) -> PrimalDualPoint:
    if seed is None:
        return PrimalDualPoint.zeros(game)
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1.0, 1.0, game.n + game.m_bar)
    z[game.n :] = np.maximum(z[game.n :], 0.0)
    return PrimalDualPoint.from_stack(game, z)


def _homotopy_config(args) -> HomotopyConfig:
    if args.method == "newton":
        inner_cfg = NewtonConfig(tol=args.tol)
    else:
        inner_cfg = SubgradConfig(tol=args.tol)
    return HomotopyConfig(
        eps0=args.eps0,
        gamma=args.gamma,
        eps_min=args.eps_min,
        taylor=args.taylor == "on",
        inner=args.method,
        inner_cfg=inner_cfg,
        p=args.p,
    )


def _write_iter_log(path: Path, trace: HomotopyTrace, method: str, taylor: bool) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ITER_LOG_COLUMNS)
        for stage in trace.stages:
            history = stage.merit_history or [stage.merit_final]
            for k, psi in enumerate(history):
                step = 0.0 if k == 0 else stage.step_norms[k - 1]
                writer.writerow(
                    [
                        stage.index,
                        repr(stage.eps),
                        method,
                        "on" if taylor else "off",
                        k,
                        repr(float(psi)),
                        repr(float(step)),
                        repr(stage.predictor_norm),
                        repr(stage.wall_ms),
                    ]
                )


def _build_report(
    game: GameSpec, path: Path, args, trace: HomotopyTrace, cert: Certificate
) -> dict:
    final = trace.final
    return {
        "tool": {"name": "mlfg", "version": __version__},
        "game": {"path": str(path), **_fingerprint(game)},
        "config": {
            "method": args.method,
            "eps0": args.eps0,
            "gamma": args.gamma,
            "eps_min": args.eps_min,
            "tol": args.tol,
            "taylor": args.taylor,
            "p": args.p,
            "seed": args.seed,
        },
        "stages": [
            {
                "index": s.index,
                "eps": s.eps,
                "inner_iterations": s.inner_iterations,
                "merit_final": s.merit_final,
                "warm_start_merit": s.warm_start_merit,
                "predictor_norm": s.predictor_norm,
                "converged": s.converged,
                "wall_ms": s.wall_ms,
                "error_to_final": float(np.linalg.norm(s.z_star.x - final.x)),
            }
            for s in trace.stages
        ],
        "solution": {
            "eps_final": trace.final_eps,
            "x": final.x.tolist(),
            "lambda": final.lam.tolist(),
            "y": best_response_exact(game, final.x).tolist(),
        },
        "certificate": cert.to_dict(),
    }


def cmd_solve(args) -> int:
    try:
        game, path = _load(args)
    except (InputError, GameFormatError, GameValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        cfg = _homotopy_config(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    z0 = _initial_point(game, args.seed)
    trace = homotopy_solve(game, z0, cfg)
    for s in trace.stages:
        print(
            f"stage {s.index:2d}  eps={s.eps:.3e}  iters={s.inner_iterations:4d}  "
            f"merit={s.merit_final:.3e}  warm={s.warm_start_merit:.3e}  "
            f"converged={s.converged}"
        )
    if args.log:
        _write_iter_log(Path(args.log), trace, args.method, cfg.taylor)
    if not trace.converged:
        print("solver failed to converge at some stage", file=sys.stderr)
        return EXIT_SOLVER

    final = trace.final
    # a run stopped at a coarse smoothing level is only certifiable up to
    # the payoff drift of that level
    drift = smoothing_drift(game, trace.final_eps)
    try:
        cert = certify(
            game, final.x, final.lam, trace.final_eps, p=args.p,
            nash_tol=max(NASH_TOL_BASE, drift), s_tol=max(STAT_TOL_BASE, drift),
        )
    except OracleError as exc:
        print(f"certification oracle failed: {exc}", file=sys.stderr)
        return EXIT_CERT
    print(f"nash gaps: {np.array2string(cert.nash_gaps, precision=3)}")
    print(f"max stationarity residual: {max(cert.s_stat_residuals.values()):.3e}")
    print(f"certified: {cert.certified}")
    if args.out:
        report = _build_report(game, path, args, trace, cert)
        Path(args.out).write_text(json.dumps(report, indent=1) + "\n")
    return EXIT_OK if cert.certified else EXIT_CERT


def _read_vector(path: Path) -> np.ndarray:
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = text.split()
    return np.asarray([float(v) for v in data], dtype=float)


def cmd_verify(args) -> int:
    try:
        game, _ = _load(args)
        if args.report:
            doc = json.loads(Path(args.report).read_text())
            x = np.asarray(doc["solution"]["x"], dtype=float)
            lam = np.asarray(doc["solution"]["lambda"], dtype=float)
            eps_final = float(doc["solution"]["eps_final"])
        elif args.x:
            vec = _read_vector(Path(args.x))
            if vec.shape[0] == game.n:
                x, lam = vec, np.zeros(game.m_bar)
            elif vec.shape[0] == game.n + game.m_bar:
                x, lam = vec[: game.n], vec[game.n :]
            else:
                raise InputError(
                    f"candidate has length {vec.shape[0]}, expected {game.n} "
                    f"or {game.n + game.m_bar}"
                )
            eps_final = args.eps_final
        else:
            raise InputError("one of --x or --report is required")
    except (InputError, GameFormatError, GameValidationError, OSError,
            json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    drift = smoothing_drift(game, eps_final)
    try:
        cert = certify(
            game, x, lam, eps_final,
            nash_tol=max(args.tol, drift), s_tol=max(STAT_TOL_BASE, drift),
        )
    except OracleError as exc:
        print(f"certification oracle failed: {exc}", file=sys.stderr)
        return EXIT_CERT
    for nu, gap in enumerate(cert.nash_gaps, start=1):
        print(f"leader {nu}: nash gap = {gap:.6e}")
    for name, value in cert.s_stat_residuals.items():
        print(f"{name}: {value:.6e}")
    print(f"certified: {cert.certified}")
    return EXIT_OK if cert.certified else EXIT_CERT


def _bench_schedule_rows(game: GameSpec, args) -> tuple[list[list], list[dict], bool]:
    rows: list[list] = []
    iter_rows: list[dict] = []
    ok = True
    for method in ("newton", "subgradient"):
        for taylor in (True, False):
            cfg = HomotopyConfig(
                eps0=args.eps0,
                gamma=args.gamma,
                eps_min=args.bench_eps_min,
                taylor=taylor,
                inner=method,
                inner_cfg=NewtonConfig(tol=args.tol)
                if method == "newton"
                else SubgradConfig(tol=args.tol),
            )
            trace = homotopy_solve(game, PrimalDualPoint.zeros(game), cfg)
            ok = ok and trace.converged
            for s in trace.stages:
                rows.append(
                    [
                        method,
                        "on" if taylor else "off",
                        repr(s.eps),
                        s.inner_iterations,
                        repr(s.merit_final),
                        repr(s.wall_ms),
                    ]
                )
                history = s.merit_history or [s.merit_final]
                for k, psi in enumerate(history):
                    iter_rows.append(
                        {
                            "stage": s.index,
                            "eps": s.eps,
                            "method": method,
                            "taylor": taylor,
                            "inner_iter": k,
                            "merit": float(psi),
                            "step_norm": 0.0 if k == 0 else s.step_norms[k - 1],
                            "predictor_norm": s.predictor_norm,
                            "wall_ms": s.wall_ms,
                        }
                    )
    return rows, iter_rows, ok


def cmd_bench(args) -> int:
    try:
        game, _ = _load(args)
    except (InputError, GameFormatError, GameValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    out = Path(args.out)
    rows, iter_rows, ok = _bench_schedule_rows(game, args)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BENCH_COLUMNS)
        writer.writerows(rows)

    iters_path = out.with_name(out.stem + "_iters.csv")
    with open(iters_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ITER_LOG_COLUMNS)
        for r in iter_rows:
            writer.writerow(
                [
                    r["stage"],
                    repr(r["eps"]),
                    r["method"],
                    "on" if r["taylor"] else "off",
                    r["inner_iter"],
                    repr(r["merit"]),
                    repr(float(r["step_norm"])),
                    repr(r["predictor_norm"]),
                    repr(r["wall_ms"]),
                ]
            )

    # multistart cells: random initials at a fixed smoothing level
    multistart_path = out.with_name(out.stem + "_multistart.csv")
    finals = []
    with open(multistart_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MULTISTART_COLUMNS)
        for rep in range(args.repeats):
            for sid in range(args.starts):
                z0 = _initial_point(game, args.seed + 1000 * rep + sid)
                res = newton_solve(game, z0, args.multistart_eps, cfg=NewtonConfig(tol=args.tol))
                ok = ok and res.converged
                finals.append(res.z.x)
                for k, psi in enumerate(res.merit_history):
                    writer.writerow(
                        [rep, sid, repr(args.multistart_eps), "newton", k, repr(float(psi))]
                    )
    spread = 0.0
    for i in range(len(finals)):
        for j in range(i + 1, len(finals)):
            spread = max(spread, float(np.linalg.norm(finals[i] - finals[j])))
    print(f"wrote {out}, {iters_path}, {multistart_path}")
    print(f"multistart max pairwise distance: {spread:.3e}")
    if not ok:
        print("at least one bench cell failed to converge", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlfg",
        description="Equilibrium solver for quadratic multi-leader-follower games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_game_args(p):
        p.add_argument("--data", help="path to a game JSON file")
        p.add_argument("--dataset", type=int, choices=(1, 2), help="bundled dataset number")

    solve = sub.add_parser("solve", help="run the continuation and certify the result")
    add_game_args(solve)
    solve.add_argument("--method", choices=("newton", "subgradient"), default="newton")
    solve.add_argument("--eps0", type=float, default=1.6)
    solve.add_argument("--gamma", type=float, default=0.5)
    solve.add_argument("--eps-min", dest="eps_min", type=float, default=1e-6)
    solve.add_argument("--tol", type=float, default=1e-10)
    solve.add_argument("--taylor", choices=("on", "off"), default="on")
    solve.add_argument("--p", type=int, default=2)
    solve.add_argument("--seed", type=int, default=None, help="randomize the initial point")
    solve.add_argument("--out", help="write the solve report JSON here")
    solve.add_argument("--log", help="write the per-iteration CSV log here")
    solve.set_defaults(func=cmd_solve)

    verify = sub.add_parser("verify", help="certify a candidate strategy")
    add_game_args(verify)
    verify.add_argument("--x", help="file with the candidate (JSON array or whitespace list)")
    verify.add_argument("--report", help="verify the solution embedded in a solve report")
    verify.add_argument("--tol", type=float, default=1e-5, help="nash gap tolerance")
    verify.add_argument(
        "--eps-final", dest="eps_final", type=float, default=1e-6,
        help="smoothing level used to read off limit derivative values",
    )
    verify.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="method comparison and multistart tables")
    add_game_args(bench)
    bench.add_argument("--repeats", type=int, default=1)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--starts", type=int, default=20)
    bench.add_argument("--eps0", type=float, default=1.6)
    bench.add_argument("--gamma", type=float, default=0.5)
    bench.add_argument(
        "--bench-eps-min", dest="bench_eps_min", type=float, default=0.05,
        help="smallest scheduled smoothing level in the comparison table",
    )
    bench.add_argument("--multistart-eps", dest="multistart_eps", type=float, default=0.5)
    bench.add_argument("--tol", type=float, default=1e-10)
    bench.add_argument("--out", default="bench.csv")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
