"""
Run and problem directories.

A solve run directory holds:

    convergence.csv   history (always)
    run.yaml          inputs, options, termination (always)
    solution.mtx      final iterate (always)
    iterates.npz      every iterate x^(j) (verify mode)
    oracle.csv        oracle comparison (verify mode)

A generated problem directory holds K.mtx, f.mtx, partition.txt,
<P>_<label>.mtx per named preconditioner block and problem.yaml.
"""

import os
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import yaml

from blockminres.core.exceptions import InputError, ParseError
from blockminres.io.matrix_market import write_matrix_market, write_vector
from blockminres.io.partition_file import write_partition
from blockminres.problems.base import GeneratedProblem
from blockminres.utils.logging_config import get_logger

logger = get_logger("io.run_dir")

PathLike = Union[str, os.PathLike]

CONVERGENCE_CSV = "convergence.csv"
RUN_MANIFEST = "run.yaml"
SOLUTION_FILE = "solution.mtx"
ITERATES_FILE = "iterates.npz"
ORACLE_CSV = "oracle.csv"
PROBLEM_MANIFEST = "problem.yaml"


def ensure_dir(path: PathLike) -> str:
    path = os.fspath(path)
    os.makedirs(path, exist_ok=True)
    return path


def write_manifest(path: PathLike, data: Dict[str, Any]) -> None:
    with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as f:
        yaml.safe_dump(data, f, sort_keys=False, default_flow_style=False)


def read_manifest(path: PathLike) -> Dict[str, Any]:
    path = os.fspath(path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ParseError(f"invalid YAML: {e}", path) from e
    if not isinstance(data, dict):
        raise ParseError("manifest must be a mapping", path)
    return data


def save_iterates(path: PathLike, iterates: Sequence[np.ndarray]) -> None:
    """Store the iterates as one (iterations + 1, n) array."""
    np.savez_compressed(os.fspath(path), iterates=np.stack(list(iterates)))
    logger.debug(f"Saved {len(iterates)} iterates to {path}")


def load_iterates(path: PathLike) -> List[np.ndarray]:
    path = os.fspath(path)
    with np.load(path) as data:
        if "iterates" not in data:
            raise ParseError("no 'iterates' array", path)
        stacked = data["iterates"]
    if stacked.ndim != 2:
        raise ParseError(f"iterates must be two-dimensional, got shape {stacked.shape}", path)
    return [row.copy() for row in stacked]


def write_problem(out_dir: PathLike, problem: GeneratedProblem) -> Dict[str, Any]:
    """
    Export a generated problem.

    Returns:
        The problem.yaml contents, including the written file names.
    """
    out_dir = ensure_dir(out_dir)
    K = problem.operator.matrix
    if K is None:
        raise InputError("only assembled operators can be exported")

    name = problem.metadata.get("generator", "problem")
    write_matrix_market(os.path.join(out_dir, "K.mtx"), K, symmetric=True, comment=f"{name} K")
    write_vector(os.path.join(out_dir, "f.mtx"), problem.rhs, comment=f"{name} f")
    write_partition(os.path.join(out_dir, "partition.txt"), problem.partition)

    precond_files: Dict[str, List[str]] = {}
    for pname, pre in problem.preconditioners.items():
        files = []
        for label, block in zip(problem.partition.labels, pre.block_matrices()):
            filename = f"{pname}_{label}.mtx"
            write_matrix_market(os.path.join(out_dir, filename), block, symmetric=True, comment=f"{name} {pname} block {label}")
            files.append(filename)
        precond_files[pname] = files

    manifest = {
        "generator": name,
        "parameters": dict(problem.metadata.get("parameters", {})),
        "seed": problem.metadata.get("seed"),
        "n": problem.n,
        "blocks": dict(zip(problem.partition.labels, problem.partition.sizes)),
        "files": {
            "matrix": "K.mtx",
            "rhs": "f.mtx",
            "partition": "partition.txt",
            "preconditioners": precond_files,
        },
    }
    for key in ("rng", "unknowns"):
        if key in problem.metadata:
            manifest[key] = problem.metadata[key]
    write_manifest(os.path.join(out_dir, PROBLEM_MANIFEST), manifest)
    logger.info(f"Wrote {name} problem (n={problem.n}) to {out_dir}")
    return manifest
