"""
Command-line interface for blockminres.

Subcommands:

    solve   --matrix K.mtx --rhs f.mtx --partition part.txt [--precond P_u.mtx,P_p.mtx]
            [--tol 1e-6] [--maxit 1000] [--block-tol e_u,e_p] [--verify] --out DIR
    gen     <least-norm|least-squares|stokes-mac> [--n] [--m] [--nx] [--ny] [--seed] --out DIR
    gen     --list
    verify  --run-dir DIR

Exit codes: 0 converged / verification passed, 2 iteration cap reached,
3 breakdown or indefinite preconditioner, 4 input error, 5 verification
failed.
"""

import argparse
from dataclasses import dataclass, field
import os
from typing import Any, Dict, List, Optional

import numpy as np

from blockminres import __version__
from blockminres.config import LOG_LEVEL_ENV_VAR, load_config
from blockminres.core.exceptions import BreakdownError, InputError, VerificationError
from blockminres.core.operator import SaddleOperator, check_symmetry
from blockminres.core.partition import BlockPartition
from blockminres.core.preconditioner import BlockDiagPreconditioner
from blockminres.io.convergence_csv import read_convergence_csv, write_convergence_csv, write_oracle_csv
from blockminres.io.matrix_market import read_matrix_market, read_vector, write_vector
from blockminres.io.partition_file import read_partition
from blockminres.io.run_dir import (
    CONVERGENCE_CSV,
    ITERATES_FILE,
    ORACLE_CSV,
    RUN_MANIFEST,
    SOLUTION_FILE,
    ensure_dir,
    load_iterates,
    read_manifest,
    save_iterates,
    write_manifest,
    write_problem,
)
from blockminres.problems.base import ProblemCollection, default_collection
from blockminres.solver.history import ConvergenceHistory, TerminationReason
from blockminres.solver.minres import solve
from blockminres.solver.options import SolverOptions
from blockminres.utils.logging_config import get_logger, setup_logging
from blockminres.verify.oracle import OracleReport, compare_histories, replay_oracle

logger = get_logger("cli")

EXIT_OK = 0
EXIT_MAX_ITER = 2
EXIT_BREAKDOWN = 3
EXIT_INPUT = 4
EXIT_VERIFY_FAILED = 5

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]
SYMMETRY_TOL = 1e-12


class _ArgumentParser(argparse.ArgumentParser):
    """Parser whose usage errors become InputError (exit code 4)."""

    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from None


def _path_list(text: str) -> List[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="blockminres",
        description="Preconditioned MINRES with per-block residual monitoring",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=str, default=None, help="Path to configuration file")
    parser.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default=None, help="Console log level")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p_solve = sub.add_parser("solve", help="Solve K x = f with monitoring")
    p_solve.add_argument("--matrix", required=True, help="Matrix Market file with K")
    p_solve.add_argument("--rhs", required=True, help="Matrix Market file with f")
    p_solve.add_argument("--partition", required=True, help="Partition file")
    p_solve.add_argument("--precond", type=_path_list, default=None,
                         help="Comma-separated preconditioner block files, in partition order (identity if omitted)")
    p_solve.add_argument("--x0", default=None, help="Matrix Market file with the initial guess")
    p_solve.add_argument("--tol", type=float, default=None, help="Relative tolerance on |eta_j| / |eta_0|")
    p_solve.add_argument("--maxit", type=int, default=None, help="Iteration cap")
    p_solve.add_argument("--block-tol", type=_float_list, default=None,
                         help="Comma-separated absolute per-block tolerances")
    p_solve.add_argument("--no-monitor", action="store_true", help="Track the total residual only")
    p_solve.add_argument("--verify", action="store_true", help="Store all iterates and run the oracle")
    p_solve.add_argument("--out", required=True, help="Output run directory")

    p_gen = sub.add_parser("gen", help="Generate a test problem")
    p_gen.add_argument("generator", nargs="?", help="Generator name (see --list)")
    p_gen.add_argument("--list", action="store_true", help="List available generators")
    p_gen.add_argument("--n", type=int, default=None)
    p_gen.add_argument("--m", type=int, default=None)
    p_gen.add_argument("--nx", type=int, default=None)
    p_gen.add_argument("--ny", type=int, default=None)
    p_gen.add_argument("--viscosity", type=float, default=None)
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--out", default=None, help="Output problem directory")

    p_verify = sub.add_parser("verify", help="Replay the oracle over a stored run")
    p_verify.add_argument("--run-dir", required=True, help="Run directory written by 'solve --verify'")
    p_verify.add_argument("--tol", type=float, default=None, help="Tolerance relative to eta_0")

    return parser


@dataclass
class RunConfig:
    """
    Resolved inputs of one CLI invocation.
    """

    command: str
    matrix: Optional[str] = None
    rhs: Optional[str] = None
    partition: Optional[str] = None
    precond: List[str] = field(default_factory=list)
    x0: Optional[str] = None
    out: Optional[str] = None
    run_dir: Optional[str] = None
    options: Optional[SolverOptions] = None
    verify: bool = False
    verify_tol: float = 1e-8
    dense_limit: int = 4000

    @classmethod
    def from_args(cls, args: argparse.Namespace, config: Dict[str, Any]) -> "RunConfig":
        run = cls(
            command=args.command,
            verify_tol=float(config["verify"]["tolerance"]),
            dense_limit=int(config["preconditioner"]["dense_limit"]),
        )
        if args.command == "solve":
            run.matrix = args.matrix
            run.rhs = args.rhs
            run.partition = args.partition
            run.precond = list(args.precond or [])
            run.x0 = args.x0
            run.out = args.out
            run.verify = args.verify
            run.options = SolverOptions.from_config(
                config,
                rel_tol=args.tol,
                max_iter=args.maxit,
                per_block_tol=args.block_tol,
                monitor=False if args.no_monitor else None,
                store_residual_history=args.verify,
            )
        elif args.command == "verify":
            run.run_dir = args.run_dir
            if args.tol is not None:
                run.verify_tol = args.tol
        return run

    def validate(self) -> None:
        """
        Check that every referenced input file exists.

        Raises:
            InputError: Naming the first missing file.
        """
        for name in ("matrix", "rhs", "partition", "x0"):
            path = getattr(self, name)
            if path is not None and not os.path.isfile(path):
                raise InputError(f"{name} file not found: {path}")
        for path in self.precond:
            if not os.path.isfile(path):
                raise InputError(f"preconditioner file not found: {path}")
        if self.run_dir is not None and not os.path.isdir(self.run_dir):
            raise InputError(f"run directory not found: {self.run_dir}")


@dataclass
class LoadedSystem:
    operator: SaddleOperator
    rhs: np.ndarray
    partition: BlockPartition
    preconditioner: BlockDiagPreconditioner
    x0: Optional[np.ndarray] = None


def load_system(matrix: str, rhs: str, partition: str, precond: List[str],
                x0: Optional[str] = None, dense_limit: int = 4000) -> LoadedSystem:
    """
    Read and cross-check all inputs of a solve.

    Raises:
        InputError: On unreadable, inconsistent or nonsymmetric input.
    """
    K = read_matrix_market(matrix)
    if K.shape[0] != K.shape[1]:
        raise InputError(f"{matrix}: K must be square, got {K.shape[0]}x{K.shape[1]}")
    op = SaddleOperator.from_matrix(K)
    defect = check_symmetry(op, samples=10)
    if defect > SYMMETRY_TOL:
        raise InputError(f"{matrix}: K is not symmetric (sampled defect {defect:.2e})")

    n = op.n
    f = read_vector(rhs, n)
    part = read_partition(partition, n)
    if precond:
        if len(precond) != len(part):
            raise InputError(f"{len(precond)} preconditioner files for {len(part)} partition blocks")
        matrices = [read_matrix_market(p) for p in precond]
        pre = BlockDiagPreconditioner.from_matrices(part, matrices, dense_limit)
    else:
        pre = BlockDiagPreconditioner.identity(part)
    x_init = read_vector(x0, n) if x0 is not None else None
    return LoadedSystem(operator=op, rhs=f, partition=part, preconditioner=pre, x0=x_init)


def exit_code_for(history: ConvergenceHistory, report: Optional[OracleReport] = None) -> int:
    if report is not None and not report.passed:
        return EXIT_VERIFY_FAILED
    if history.reason == TerminationReason.MAX_ITER:
        return EXIT_MAX_ITER
    if history.reason == TerminationReason.BREAKDOWN:
        return EXIT_BREAKDOWN
    return EXIT_OK


class CLI:
    """
    Runs the blockminres subcommands.

    Results are printed to stdout; diagnostics go to the logger (stderr and,
    when an output directory is known, a log file inside it).
    """

    def __init__(self, config: Dict[str, Any], log_level: str = "INFO"):
        self.config = config
        self.log_level = log_level

    def _setup_logging(self, log_dir: Optional[str], session: str) -> None:
        log_config = self.config.get("logging", {})
        setup_logging(
            log_level=self.log_level,
            log_dir=log_dir if log_config.get("log_to_file", True) else None,
            session_name=session,
            log_format=log_config.get("log_format", "%(asctime)s [%(levelname)s] %(name)s: %(message)s"),
        )

    def run(self, args: argparse.Namespace) -> int:
        if args.command == "gen":
            return self.cmd_gen(args)
        run = RunConfig.from_args(args, self.config)
        run.validate()
        if run.command == "solve":
            return self.cmd_solve(run)
        return self.cmd_verify(run)

    def cmd_solve(self, run: RunConfig) -> int:
        out_dir = ensure_dir(run.out)
        self._setup_logging(out_dir, "solve")

        system = load_system(run.matrix, run.rhs, run.partition, run.precond, run.x0, run.dense_limit)
        x, history = solve(system.operator, system.preconditioner, system.partition, system.rhs,
                           system.x0, run.options)

        write_convergence_csv(history, os.path.join(out_dir, CONVERGENCE_CSV))
        write_vector(os.path.join(out_dir, SOLUTION_FILE), x, comment="solution")

        report = None
        if run.verify:
            save_iterates(os.path.join(out_dir, ITERATES_FILE), history.iterates)
            oracle_rows = replay_oracle(system.operator, system.preconditioner, system.partition,
                                        system.rhs, history.iterates)
            report = compare_histories(history, oracle_rows, run.verify_tol)
            write_oracle_csv(report, os.path.join(out_dir, ORACLE_CSV))

        manifest = {
            "inputs": {
                "matrix": os.path.abspath(run.matrix),
                "rhs": os.path.abspath(run.rhs),
                "partition": os.path.abspath(run.partition),
                "precond": [os.path.abspath(p) for p in run.precond],
                "x0": os.path.abspath(run.x0) if run.x0 else None,
            },
            "options": run.options.to_dict(),
            "labels": list(system.partition.labels),
            "n": system.partition.n,
            "reason": history.reason.value,
            "iterations": history.iterations,
            "eta0": history.eta0,
            "final_eta_rel": history.rows[-1].eta_rel,
        }
        if report is not None:
            manifest["verification"] = {
                "tolerance": report.tol,
                "passed": report.passed,
                "max_relative_deviation": report.max_relative_deviation,
            }
        write_manifest(os.path.join(out_dir, RUN_MANIFEST), manifest)

        print(history.summary())
        if report is not None:
            print(report.summary())
        return exit_code_for(history, report)

    def cmd_gen(self, args: argparse.Namespace) -> int:
        collection = self._collection()
        if args.list:
            for info in collection.list_generators():
                params = ", ".join(f"{k}={v}" for k, v in info["parameters"].items())
                print(f"{info['name']:15s} {info['description']} [{params}]")
            return EXIT_OK

        if not args.generator:
            raise InputError("gen: a generator name or --list is required")
        if not args.out:
            raise InputError("gen: --out is required")
        out_dir = ensure_dir(args.out)
        self._setup_logging(out_dir, "gen")

        params = {k: getattr(args, k) for k in ("n", "m", "nx", "ny", "viscosity", "seed")}
        problem = collection.generate(args.generator, **{k: v for k, v in params.items() if v is not None})
        manifest = write_problem(out_dir, problem)
        blocks = ", ".join(f"{l}[{s}]" for l, s in manifest["blocks"].items())
        print(f"{manifest['generator']}: n={manifest['n']} ({blocks}) -> {out_dir}")
        return EXIT_OK

    def cmd_verify(self, run: RunConfig) -> int:
        self._setup_logging(run.run_dir, "verify")
        manifest = read_manifest(os.path.join(run.run_dir, RUN_MANIFEST))
        iterates_path = os.path.join(run.run_dir, ITERATES_FILE)
        if not os.path.isfile(iterates_path):
            raise InputError(f"{run.run_dir} has no {ITERATES_FILE}; rerun solve with --verify")

        try:
            inputs = manifest["inputs"]
            reason = TerminationReason(manifest["reason"])
        except (KeyError, ValueError) as e:
            raise InputError(f"{RUN_MANIFEST} is incomplete: {e}") from e
        system = load_system(inputs["matrix"], inputs["rhs"], inputs["partition"], inputs.get("precond") or [],
                             inputs.get("x0"), int(self.config["preconditioner"]["dense_limit"]))

        history = read_convergence_csv(os.path.join(run.run_dir, CONVERGENCE_CSV), reason)
        iterates = load_iterates(iterates_path)
        oracle_rows = replay_oracle(system.operator, system.preconditioner, system.partition, system.rhs, iterates)
        report = compare_histories(history, oracle_rows, run.verify_tol)
        write_oracle_csv(report, os.path.join(run.run_dir, ORACLE_CSV))

        print(report.summary())
        return EXIT_OK if report.passed else EXIT_VERIFY_FAILED

    def _collection(self) -> ProblemCollection:
        """Registry whose generators take their defaults from the configuration."""
        problems = self.config.get("problems", {})
        defaults = {"seed": problems.get("seed", 42), "dense_limit": self.config["preconditioner"]["dense_limit"]}
        defaults.update(problems.get("stokes", {}))
        collection = default_collection()
        for name, generator_class in list(collection.generator_classes.items()):
            collection.register_generator(generator_class(**defaults))
        return collection


def cli_main(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI.

    Args:
        argv: Arguments without the program name; sys.argv[1:] when None.

    Returns:
        The process exit code.
    """
    try:
        args = build_parser().parse_args(argv)
        config = load_config(args.config)
        log_level = args.log_level or os.environ.get(LOG_LEVEL_ENV_VAR) or config["logging"].get("level", "INFO")
        if log_level.upper() not in LOG_LEVELS:
            raise InputError(f"unknown log level '{log_level}'")
        cli = CLI(config, log_level.upper())
        return cli.run(args)
    except BreakdownError as e:
        logger.error(f"Breakdown: {e}")
        return EXIT_BREAKDOWN
    except VerificationError as e:
        logger.error(f"Verification failed: {e}")
        return EXIT_VERIFY_FAILED
    except (InputError, OSError) as e:
        logger.error(f"Input error: {e}")
        return EXIT_INPUT
