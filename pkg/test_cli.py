"""
End-to-end tests for the blockminres command line.

Run with: pytest test_cli.py
"""

from dataclasses import replace
import os

import numpy as np
import pytest

from blockminres.io import read_convergence_csv, read_manifest, read_vector, write_convergence_csv, write_matrix_market
from blockminres.solver import ConvergenceHistory, HistoryRow, TerminationReason
from blockminres.ui import cli_main
from blockminres.ui.cli import (
    EXIT_BREAKDOWN,
    EXIT_INPUT,
    EXIT_MAX_ITER,
    EXIT_OK,
    EXIT_VERIFY_FAILED,
    build_parser,
    exit_code_for,
)


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("BLOCKMINRES_CONFIG", raising=False)
    monkeypatch.delenv("BLOCKMINRES_LOG_LEVEL", raising=False)
    return tmp_path


@pytest.fixture
def problem_dir(workdir):
    code = cli_main(["gen", "least-norm", "--n", "100", "--m", "30", "--seed", "42", "--out", "prob"])
    assert code == EXIT_OK
    return workdir / "prob"


def _solve_args(problem_dir, out, *extra, precond=True):
    args = [
        "solve",
        "--matrix", str(problem_dir / "K.mtx"),
        "--rhs", str(problem_dir / "f.mtx"),
        "--partition", str(problem_dir / "partition.txt"),
        "--out", str(out),
    ]
    if precond:
        args += ["--precond", f"{problem_dir / 'P2_u.mtx'},{problem_dir / 'P2_p.mtx'}"]
    return args + list(extra)


def test_gen_writes_problem(problem_dir):
    for name in ("K.mtx", "f.mtx", "partition.txt", "P1_u.mtx", "P1_p.mtx", "P2_u.mtx", "P2_p.mtx", "problem.yaml"):
        assert (problem_dir / name).is_file(), name
    manifest = read_manifest(problem_dir / "problem.yaml")
    assert manifest["generator"] == "least-norm"
    assert manifest["seed"] == 42
    assert manifest["blocks"] == {"u": 100, "p": 30}


def test_gen_list(workdir, capsys):
    assert cli_main(["gen", "--list"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in ("least-norm", "least-squares", "stokes-mac"):
        assert name in out


def test_gen_stokes(workdir):
    assert cli_main(["gen", "stokes-mac", "--nx", "8", "--ny", "4", "--out", "stokes"]) == EXIT_OK
    assert read_manifest(workdir / "stokes" / "problem.yaml")["n"] == 88


def test_gen_stokes_accepts_seed(workdir):
    assert cli_main(["gen", "stokes-mac", "--nx", "8", "--ny", "4", "--seed", "1", "--out", "stokes"]) == EXIT_OK
    manifest = read_manifest(workdir / "stokes" / "problem.yaml")
    assert manifest["seed"] == 1
    assert manifest["generator"] == "stokes-mac"


@pytest.mark.parametrize("argv", [
    ["gen", "poisson", "--out", "x"],
    ["gen", "least-norm"],
    ["gen"],
    ["gen", "stokes-mac", "--n", "10", "--out", "x"],
    ["gen", "least-norm", "--n", "10", "--m", "20", "--out", "x"],
    [],
    ["solve", "--matrix", "K.mtx"],
])
def test_usage_errors(workdir, argv):
    assert cli_main(argv) == EXIT_INPUT


def test_solve_verify_end_to_end(problem_dir, workdir, capsys):
    run = workdir / "run"
    assert cli_main(_solve_args(problem_dir, run, "--verify")) == EXIT_OK
    for name in ("convergence.csv", "run.yaml", "solution.mtx", "iterates.npz", "oracle.csv"):
        assert (run / name).is_file(), name

    manifest = read_manifest(run / "run.yaml")
    assert manifest["reason"] == "converged"
    assert manifest["labels"] == ["u", "p"]
    assert manifest["verification"]["passed"] is True
    assert manifest["options"]["rel_tol"] == 1e-6

    history = read_convergence_csv(run / "convergence.csv")
    assert history.iterations == manifest["iterations"]
    assert history.rows[-1].eta_rel <= 1e-6
    assert read_vector(run / "solution.mtx").shape == (130,)
    assert "oracle pass" in capsys.readouterr().out


def test_verify_run_dir(problem_dir, workdir):
    run = workdir / "run"
    assert cli_main(_solve_args(problem_dir, run, "--verify")) == EXIT_OK
    os.remove(run / "oracle.csv")
    assert cli_main(["verify", "--run-dir", str(run)]) == EXIT_OK
    assert (run / "oracle.csv").is_file()


def test_verify_detects_tampered_history(problem_dir, workdir):
    run = workdir / "run"
    assert cli_main(_solve_args(problem_dir, run, "--verify")) == EXIT_OK
    history = read_convergence_csv(run / "convergence.csv")
    rows = list(history.rows)
    bumped = tuple(v * 1.01 for v in rows[1].eta_blocks)
    rows[1] = replace(rows[1], eta_blocks=bumped)
    write_convergence_csv(replace(history, rows=rows), run / "convergence.csv")
    assert cli_main(["verify", "--run-dir", str(run)]) == EXIT_VERIFY_FAILED


def test_verify_needs_iterates(problem_dir, workdir):
    run = workdir / "run"
    assert cli_main(_solve_args(problem_dir, run)) == EXIT_OK
    assert cli_main(["verify", "--run-dir", str(run)]) == EXIT_INPUT


def test_verify_missing_run_dir(workdir):
    assert cli_main(["verify", "--run-dir", "nowhere"]) == EXIT_INPUT


def test_missing_matrix(problem_dir, workdir):
    args = _solve_args(problem_dir, workdir / "run")
    args[args.index("--matrix") + 1] = str(workdir / "missing.mtx")
    assert cli_main(args) == EXIT_INPUT


def test_wrong_number_of_preconditioner_blocks(problem_dir, workdir):
    args = _solve_args(problem_dir, workdir / "run", "--precond", str(problem_dir / "P2_u.mtx"), precond=False)
    assert cli_main(args) == EXIT_INPUT


def test_max_iter_writes_csv(problem_dir, workdir):
    run = workdir / "run"
    assert cli_main(_solve_args(problem_dir, run, "--maxit", "1", precond=False)) == EXIT_MAX_ITER
    lines = (run / "convergence.csv").read_text().splitlines()
    assert len(lines) == 3
    assert read_manifest(run / "run.yaml")["reason"] == "max-iter"


def test_per_block_tolerance(problem_dir, workdir):
    run = workdir / "run"
    assert cli_main(_solve_args(problem_dir, run, "--tol", "1e-14", "--block-tol", "1e-3,1e-3")) == EXIT_OK
    manifest = read_manifest(run / "run.yaml")
    assert manifest["reason"] in ("per-block-converged", "converged")
    history = read_convergence_csv(run / "convergence.csv")
    assert all(v <= 1e-3 for v in history.rows[-1].eta_blocks)


def test_block_tolerance_count_mismatch(problem_dir, workdir):
    assert cli_main(_solve_args(problem_dir, workdir / "run", "--block-tol", "1e-3")) == EXIT_INPUT


def test_no_monitor(problem_dir, workdir):
    run = workdir / "run"
    assert cli_main(_solve_args(problem_dir, run, "--no-monitor")) == EXIT_OK
    assert (run / "convergence.csv").read_text().splitlines()[0] == "iter,eta,eta_rel"


def test_indefinite_preconditioner(problem_dir, workdir):
    write_matrix_market(workdir / "neg.mtx", -np.eye(100), symmetric=True)
    args = _solve_args(problem_dir, workdir / "run", "--precond",
                       f"{workdir / 'neg.mtx'},{problem_dir / 'P2_p.mtx'}", precond=False)
    assert cli_main(args) == EXIT_BREAKDOWN


def test_nonsymmetric_matrix(problem_dir, workdir):
    matrix = np.eye(130)
    matrix[0, 1] = 1.0
    write_matrix_market(workdir / "K.mtx", matrix)
    args = _solve_args(problem_dir, workdir / "run")
    args[args.index("--matrix") + 1] = str(workdir / "K.mtx")
    assert cli_main(args) == EXIT_INPUT


def test_csv_is_deterministic(problem_dir, workdir):
    assert cli_main(_solve_args(problem_dir, workdir / "a")) == EXIT_OK
    assert cli_main(_solve_args(problem_dir, workdir / "b")) == EXIT_OK
    assert (workdir / "a" / "convergence.csv").read_bytes() == (workdir / "b" / "convergence.csv").read_bytes()


def test_config_file_sets_defaults(problem_dir, workdir):
    (workdir / "custom.yaml").write_text("solver:\n  max_iter: 2\n", encoding="utf-8")
    run = workdir / "run"
    code = cli_main(["--config", "custom.yaml"] + _solve_args(problem_dir, run))
    assert code == EXIT_MAX_ITER
    assert read_manifest(run / "run.yaml")["options"]["max_iter"] == 2


def test_exit_code_precedence():
    rows = [HistoryRow(j=0, eta=1.0, eta_rel=1.0)]
    history = ConvergenceHistory(labels=["u"], rows=rows, reason=TerminationReason.MAX_ITER, monitored=False)
    assert exit_code_for(history) == EXIT_MAX_ITER
    assert exit_code_for(replace(history, reason=TerminationReason.BREAKDOWN)) == EXIT_BREAKDOWN
    assert exit_code_for(replace(history, reason=TerminationReason.PER_BLOCK_CONVERGED)) == EXIT_OK

    class _Failed:
        passed = False

    assert exit_code_for(history, _Failed()) == EXIT_VERIFY_FAILED


def test_parser_subcommands():
    args = build_parser().parse_args(["verify", "--run-dir", "d", "--tol", "1e-6"])
    assert args.command == "verify"
    assert args.tol == 1e-6


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
