import csv
import json

import numpy as np

from mlfg.cli import BENCH_COLUMNS, ITER_LOG_COLUMNS, MULTISTART_COLUMNS, main


def run(*argv):
    return main(list(argv))


def test_solve_dataset1(tmp_path, capsys):
    report = tmp_path / "report.json"
    log = tmp_path / "iters.csv"
    code = run("solve", "--dataset", "1", "--out", str(report), "--log", str(log))
    assert code == 0
    out = capsys.readouterr().out
    assert "certified: True" in out

    doc = json.loads(report.read_text())
    errors = [s["error_to_final"] for s in doc["stages"]]
    assert all(a > b for a, b in zip(errors[:-1], errors[1:]))
    assert doc["stages"][-1]["eps"] <= 1e-6
    assert all(s["converged"] for s in doc["stages"])
    assert doc["certificate"]["certified"] is True
    assert len(doc["solution"]["x"]) == 4
    assert len(doc["solution"]["y"]) == 3

    with open(log) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ITER_LOG_COLUMNS
    assert len(rows) > len(doc["stages"])  # at least one row per stage


def test_solve_report_rerun_closure(tmp_path):
    r1, r2 = tmp_path / "a.json", tmp_path / "b.json"
    assert run("solve", "--dataset", "1", "--out", str(r1)) == 0
    cfg = json.loads(r1.read_text())["config"]
    assert run(
        "solve", "--dataset", "1",
        "--method", cfg["method"],
        "--eps0", str(cfg["eps0"]),
        "--gamma", str(cfg["gamma"]),
        "--eps-min", str(cfg["eps_min"]),
        "--tol", str(cfg["tol"]),
        "--taylor", cfg["taylor"],
        "--p", str(cfg["p"]),
        "--out", str(r2),
    ) == 0
    x1 = np.array(json.loads(r1.read_text())["solution"]["x"])
    x2 = np.array(json.loads(r2.read_text())["solution"]["x"])
    assert np.max(np.abs(x1 - x2)) <= 1e-12


def test_solve_missing_data_file():
    assert run("solve", "--data", "does-not-exist.json") == 3


def test_solve_requires_game():
    assert run("solve") == 3


def test_solve_invalid_eps0():
    assert run("solve", "--dataset", "1", "--eps0", "5.0") == 3


def test_solve_nonconvergence_exit_code():
    # an impossible merit target stalls at float resolution
    assert run("solve", "--dataset", "1", "--tol", "1e-300") == 1


def test_solve_subgradient_short_schedule(tmp_path):
    rn = tmp_path / "newton.json"
    rs = tmp_path / "subgrad.json"
    assert run(
        "solve", "--dataset", "1", "--eps-min", "0.1", "--tol", "1e-8", "--out", str(rn)
    ) == 0
    assert run(
        "solve", "--dataset", "1", "--method", "subgradient",
        "--eps-min", "0.1", "--tol", "1e-8", "--out", str(rs),
    ) == 0
    it_n = sum(s["inner_iterations"] for s in json.loads(rn.read_text())["stages"])
    it_s = sum(s["inner_iterations"] for s in json.loads(rs.read_text())["stages"])
    assert it_s > it_n


def test_verify_roundtrip(tmp_path):
    report = tmp_path / "report.json"
    assert run("solve", "--dataset", "1", "--out", str(report)) == 0
    assert run("verify", "--dataset", "1", "--report", str(report)) == 0


def test_verify_x_file(tmp_path):
    report = tmp_path / "report.json"
    assert run("solve", "--dataset", "1", "--out", str(report)) == 0
    x = json.loads(report.read_text())["solution"]["x"]
    xfile = tmp_path / "x.json"
    xfile.write_text(json.dumps(x))
    assert run("verify", "--dataset", "1", "--x", str(xfile)) == 0


def test_verify_perturbed_candidate(tmp_path, capsys):
    report = tmp_path / "report.json"
    assert run("solve", "--dataset", "1", "--out", str(report)) == 0
    x = json.loads(report.read_text())["solution"]["x"]
    x[0] += 0.1
    xfile = tmp_path / "x.txt"
    xfile.write_text(" ".join(repr(v) for v in x))
    assert run("verify", "--dataset", "1", "--x", str(xfile)) == 2
    out = capsys.readouterr().out
    assert "leader 1" in out


def test_verify_stacked_candidate_with_multipliers(tmp_path):
    report = tmp_path / "report.json"
    assert run("solve", "--dataset", "1", "--out", str(report)) == 0
    doc = json.loads(report.read_text())
    zfile = tmp_path / "z.json"
    zfile.write_text(json.dumps(doc["solution"]["x"] + doc["solution"]["lambda"]))
    assert run("verify", "--dataset", "1", "--x", str(zfile)) == 0


def test_verify_wrong_length_vector(tmp_path):
    xfile = tmp_path / "x.json"
    xfile.write_text("[1.0, 2.0, 3.0]")
    assert run("verify", "--dataset", "1", "--x", str(xfile)) == 3


def test_solve_random_start_seed(tmp_path):
    r = tmp_path / "seeded.json"
    assert run("solve", "--dataset", "1", "--seed", "7", "--out", str(r)) == 0
    doc = json.loads(r.read_text())
    assert doc["config"]["seed"] == 7
    assert doc["certificate"]["certified"] is True


def test_verify_requires_candidate():
    assert run("verify", "--dataset", "1") == 3


def test_bench_outputs(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    code = run(
        "bench", "--dataset", "1", "--out", str(out),
        "--tol", "1e-8", "--bench-eps-min", "0.2", "--starts", "5",
    )
    assert code == 0
    msg = capsys.readouterr().out
    assert "multistart max pairwise distance" in msg

    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == BENCH_COLUMNS
    methods = {r[0] for r in rows[1:]}
    taylors = {r[1] for r in rows[1:]}
    assert methods == {"newton", "subgradient"}
    assert taylors == {"on", "off"}

    with open(out.with_name("bench_iters.csv")) as fh:
        assert next(csv.reader(fh)) == ITER_LOG_COLUMNS
    with open(out.with_name("bench_multistart.csv")) as fh:
        assert next(csv.reader(fh)) == MULTISTART_COLUMNS


def test_bench_deterministic_per_seed(tmp_path):
    out1, out2 = tmp_path / "b1.csv", tmp_path / "b2.csv"
    for out in (out1, out2):
        assert run(
            "bench", "--dataset", "1", "--out", str(out),
            "--tol", "1e-8", "--bench-eps-min", "0.4", "--starts", "3", "--seed", "5",
        ) == 0
    multi1 = out1.with_name("b1_multistart.csv").read_text()
    multi2 = out2.with_name("b2_multistart.csv").read_text()
    assert multi1 == multi2


def test_bench_repeats(tmp_path):
    out = tmp_path / "rep.csv"
    assert run(
        "bench", "--dataset", "1", "--out", str(out),
        "--tol", "1e-8", "--bench-eps-min", "0.4", "--starts", "2", "--repeats", "2",
    ) == 0
    with open(out.with_name("rep_multistart.csv")) as fh:
        repeats = {row["repeat"] for row in csv.DictReader(fh)}
    assert repeats == {"0", "1"}
