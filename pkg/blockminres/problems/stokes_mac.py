"""
Stationary Stokes channel flow on a staggered (MAC) grid.

Channel (0, length) x (0, height), viscosity mu. Parabolic inflow
u = y (height - y) on x = 0, no-slip on y = 0 and y = height, do-nothing
outflow on x = length. Finite-volume scaling keeps K symmetric:

    A = mu * (vector Laplacian, flux form)       velocity block
    B = -(face-length weighted divergence)       one row per cell

Inflow and wall values are eliminated into the right-hand side. The
preconditioner pairs A with mu^{-1} times the cell-volume pressure mass
matrix.
"""

from typing import List, Optional

import numpy as np
import scipy.sparse as sp

from blockminres.core.exceptions import InputError
from blockminres.core.operator import SaddleOperator
from blockminres.core.preconditioner import DEFAULT_DENSE_LIMIT, BlockDiagPreconditioner
from blockminres.problems.base import GeneratedProblem, ProblemGenerator
from blockminres.utils.logging_config import get_logger

logger = get_logger("problems.stokes")


class _Assembler:
    """Collects symmetric graph-Laplacian style couplings as COO triplets."""

    def __init__(self, size: int):
        self.size = size
        self.rows: List[int] = []
        self.cols: List[int] = []
        self.vals: List[float] = []

    def edge(self, a: int, b: int, weight: float) -> None:
        self.rows += [a, b, a, b]
        self.cols += [a, b, b, a]
        self.vals += [weight, weight, -weight, -weight]

    def diagonal(self, a: int, weight: float) -> None:
        self.rows.append(a)
        self.cols.append(a)
        self.vals.append(weight)

    def matrix(self) -> sp.csr_matrix:
        return sp.coo_matrix((self.vals, (self.rows, self.cols)), shape=(self.size, self.size)).tocsr()


def gen_stokes_mac(
    nx: int,
    ny: int,
    viscosity: float = 1e-3,
    length: float = 10.0,
    height: float = 1.0,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
    seed: Optional[int] = None,
) -> GeneratedProblem:
    """
    Assemble the MAC Stokes system.

    Args:
        nx: Cells along the channel.
        ny: Cells across the channel.
        viscosity: Dynamic viscosity mu.
        length: Channel length.
        height: Channel height.
        dense_limit: Largest preconditioner block factored densely.
        seed: Only recorded in the metadata; the grid has no random parts.

    Returns:
        Problem with blocks "u" (both velocity components) and "p".
        Preconditioners: "P1" identity, "P2" = blkdiag(A, mu^{-1} M_p).

    Raises:
        InputError: If nx or ny is below 3 or a physical parameter is not positive.
    """
    if int(nx) != nx or int(ny) != ny or nx < 3 or ny < 3:
        raise InputError(f"grid needs nx, ny >= 3, got nx={nx}, ny={ny}")
    if not (viscosity > 0 and length > 0 and height > 0):
        raise InputError(
            f"viscosity, length and height must be positive, got {viscosity}, {length}, {height}"
        )
    nx, ny = int(nx), int(ny)
    mu = float(viscosity)
    hx, hy = length / nx, height / ny

    n_u = nx * ny  # x-velocity on faces i = 1..nx; i = 0 is the inflow
    n_v = nx * (ny - 1)  # y-velocity on interior horizontal faces
    n_p = nx * ny
    n_vel = n_u + n_v

    def u_index(i: int, j: int) -> int:
        return j * nx + (i - 1)

    def v_index(i: int, j: int) -> int:
        return n_u + (j - 1) * nx + i

    y_centers = (np.arange(ny) + 0.5) * hy
    inflow = y_centers * (height - y_centers)

    A = _Assembler(n_vel)
    f_u = np.zeros(n_vel)

    for j in range(ny):
        for i in range(1, nx + 1):
            k = u_index(i, j)
            width = hx if i < nx else 0.5 * hx  # half control volume on the outflow face
            if i < nx:
                A.edge(k, u_index(i + 1, j), mu * hy / hx)
            if i == 1:
                A.diagonal(k, mu * hy / hx)
                f_u[k] += mu * hy / hx * inflow[j]
            if j < ny - 1:
                A.edge(k, u_index(i, j + 1), mu * width / hy)
            if j == 0 or j == ny - 1:
                A.diagonal(k, 2.0 * mu * width / hy)

    for j in range(1, ny):
        for i in range(nx):
            k = v_index(i, j)
            if i < nx - 1:
                A.edge(k, v_index(i + 1, j), mu * hy / hx)
            if i == 0:
                A.diagonal(k, 2.0 * mu * hy / hx)
            if j < ny - 1:
                A.edge(k, v_index(i, j + 1), mu * hx / hy)
            if j == 1 or j == ny - 1:
                A.diagonal(k, mu * hx / hy)

    rows, cols, vals = [], [], []
    f_p = np.zeros(n_p)
    for j in range(ny):
        for i in range(nx):
            cell = j * nx + i
            rows.append(cell)
            cols.append(u_index(i + 1, j))
            vals.append(-hy)
            if i >= 1:
                rows.append(cell)
                cols.append(u_index(i, j))
                vals.append(hy)
            else:
                f_p[cell] = -hy * inflow[j]
            if j + 1 <= ny - 1:
                rows.append(cell)
                cols.append(v_index(i, j + 1))
                vals.append(-hx)
            if j >= 1:
                rows.append(cell)
                cols.append(v_index(i, j))
                vals.append(hx)
    B = sp.coo_matrix((vals, (rows, cols)), shape=(n_p, n_vel)).tocsr()

    A_matrix = A.matrix()
    K = SaddleOperator.from_blocks(A_matrix, B)
    part = K.block_partition()
    pressure_mass = sp.diags(np.full(n_p, hx * hy / mu), format="csr")
    preconditioners = {
        "P1": BlockDiagPreconditioner.identity(part),
        "P2": BlockDiagPreconditioner.from_matrices(part, [A_matrix, pressure_mass], dense_limit),
    }

    logger.debug(f"MAC grid {nx}x{ny}: {n_u} + {n_v} velocity, {n_p} pressure unknowns")
    return GeneratedProblem(
        operator=K,
        rhs=np.concatenate([f_u, f_p]),
        partition=part,
        preconditioners=preconditioners,
        metadata={
            "generator": "stokes-mac",
            "parameters": {
                "nx": nx,
                "ny": ny,
                "viscosity": mu,
                "length": float(length),
                "height": float(height),
            },
            "unknowns": {"u": n_u, "v": n_v, "p": n_p},
            "seed": None if seed is None else int(seed),
        },
    )


class StokesMacGenerator(ProblemGenerator):
    name = "stokes-mac"
    description = "2D MAC Stokes channel flow; P2 = blkdiag(A, mu^-1 M_p)"
    parameters = {"nx": 16, "ny": 8, "viscosity": 1e-3, "length": 10.0, "height": 1.0, "seed": None}

    def generate(self, **kwargs) -> GeneratedProblem:
        params = self.resolve_parameters(**kwargs)
        return gen_stokes_mac(
            params["nx"],
            params["ny"],
            viscosity=params["viscosity"],
            length=params["length"],
            height=params["height"],
            dense_limit=self.config.get("dense_limit", DEFAULT_DENSE_LIMIT),
            seed=params["seed"],
        )
