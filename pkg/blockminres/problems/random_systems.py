"""
Random least-norm and least-squares saddle-point systems.

Both use K = [[H, B^T], [B, 0]] with H = diag(uniform(0, 1)) and B an m x n
standard normal matrix, m < n:

    least-norm:     minimize ||u||_H subject to B u = b,   f = (0, b)
    least-squares:  minimize ||B^T p - b||_{H^-1},         f = (b, 0)

Random numbers come from numpy's PCG64 bit generator through
np.random.default_rng(seed); normals use numpy's ziggurat method. The draw
order is B, then b, then the diagonal of H.
"""

from typing import Tuple

import numpy as np
import scipy.sparse as sp

from blockminres.core.exceptions import InputError
from blockminres.core.operator import SaddleOperator
from blockminres.core.preconditioner import BlockDiagPreconditioner
from blockminres.problems.base import GeneratedProblem, ProblemGenerator
from blockminres.utils.logging_config import get_logger

logger = get_logger("problems.random")

RNG_DESCRIPTION = "numpy PCG64 (default_rng), ziggurat normals"


def _check_sizes(n: int, m: int) -> Tuple[int, int]:
    if int(n) != n or int(m) != m:
        raise InputError(f"n and m must be integers, got n={n}, m={m}")
    n, m = int(n), int(m)
    if n < 1 or m < 1:
        raise InputError(f"n and m must be positive, got n={n}, m={m}")
    if m >= n:
        raise InputError(f"B must have full row rank with m < n, got m={m}, n={n}")
    return n, m


def _random_system(n: int, m: int, seed: int, rhs_length: int):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((m, n))
    b = rng.standard_normal(rhs_length)
    h = rng.random(n)
    return B, b, h


def _assemble(name: str, n: int, m: int, seed: int, B, h, f) -> GeneratedProblem:
    H = sp.diags(h, format="csr")
    K = SaddleOperator.from_blocks(H, B)
    part = K.block_partition()
    preconditioners = {
        "P1": BlockDiagPreconditioner.identity(part),
        "P2": BlockDiagPreconditioner.from_matrices(part, [H, None]),
    }
    return GeneratedProblem(
        operator=K,
        rhs=f,
        partition=part,
        preconditioners=preconditioners,
        metadata={
            "generator": name,
            "parameters": {"n": n, "m": m},
            "seed": int(seed),
            "rng": RNG_DESCRIPTION,
        },
    )


def gen_least_norm(n: int = 100, m: int = 30, seed: int = 42) -> GeneratedProblem:
    """
    Least-norm problem: f = (0, b) with b of length m.

    Args:
        n: Number of primal unknowns u.
        m: Number of constraints, m < n.
        seed: Seed for the random generator.

    Raises:
        InputError: If m >= n or a size is not positive.
    """
    n, m = _check_sizes(n, m)
    B, b, h = _random_system(n, m, seed, rhs_length=m)
    f = np.concatenate([np.zeros(n), b])
    return _assemble("least-norm", n, m, seed, B, h, f)


def gen_least_squares(n: int = 100, m: int = 30, seed: int = 42) -> GeneratedProblem:
    """
    Least-squares problem: f = (b, 0) with b of length n.

    The solution satisfies u = H^{-1}(b - B^T p), the weighted residual of
    the least-squares fit with its sign fixed by f = (b, 0).
    """
    n, m = _check_sizes(n, m)
    B, b, h = _random_system(n, m, seed, rhs_length=n)
    f = np.concatenate([b, np.zeros(m)])
    return _assemble("least-squares", n, m, seed, B, h, f)


class LeastNormGenerator(ProblemGenerator):
    name = "least-norm"
    description = "Random least-norm system, f = (0, b); P2 = blkdiag(H, I)"
    parameters = {"n": 100, "m": 30, "seed": 42}

    def generate(self, **kwargs) -> GeneratedProblem:
        params = self.resolve_parameters(**kwargs)
        return gen_least_norm(params["n"], params["m"], params["seed"])


class LeastSquaresGenerator(ProblemGenerator):
    name = "least-squares"
    description = "Random least-squares system, f = (b, 0); P2 = blkdiag(H, I)"
    parameters = {"n": 100, "m": 30, "seed": 42}

    def generate(self, **kwargs) -> GeneratedProblem:
        params = self.resolve_parameters(**kwargs)
        return gen_least_squares(params["n"], params["m"], params["seed"])
