"""
Preconditioned MINRES with progressive monitoring of the residual
subvector norms.

The iteration is the usual short-recurrence preconditioned MINRES
(Lanczos in the P^{-1} inner product, QR of the tridiagonal by Givens
rotations). Monitoring adds one full-length vector m_j, whose blocks give
the direction of the current residual, and three scalars per block:

    psi_b   = <z_{j+1,b}, v_{j+1,b}>     share of the new Lanczos vector
    theta_b = <m_{j,b}, z_{j+1,b}>       coupling with the previous direction
    mu_b    = (eta_{j,b} / eta_j)^2      share of the current residual

so that |eta_{j,b}| = ||r_b^(j)||_{P_b^{-1}} = |eta_j| sqrt(mu_b) costs no
extra operator or preconditioner applications. Monitoring only reads the
recurrence; iterates and eta_j are the same with it switched off.
"""

from dataclasses import dataclass, field
import logging
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from blockminres.core.exceptions import (
    DegenerateRotationError,
    IndefinitePreconditionerError,
    InputError,
)
from blockminres.core.operator import SaddleOperator
from blockminres.core.partition import BlockPartition
from blockminres.core.preconditioner import BlockDiagPreconditioner
from blockminres.core.vectors import as_vector
from blockminres.solver.givens import givens, update_block_fractions
from blockminres.solver.history import ConvergenceHistory, HistoryRow, TerminationReason
from blockminres.solver.options import SolverOptions
from blockminres.utils.logging_config import get_logger

logger = get_logger("solver")

BLOCK_DEFINITENESS_TOL = 1e-12


@dataclass(eq=False)
class SolverState:
    """
    Work vectors and recurrence scalars of one solve.

    Index convention after j completed steps: v = v_{j+1}, v_prev = v_j,
    z = z_{j+1}, w = w_{j+1}, w_prev = w_j, m = m_{j+1}, gamma = gamma_{j+1},
    c = c_{j+1}, c_prev = c_j (same for s), eta = eta_j (signed).
    """

    operator: SaddleOperator
    preconditioner: BlockDiagPreconditioner
    partition: BlockPartition
    rhs: np.ndarray = field(repr=False)
    options: SolverOptions

    v_prev: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    w_prev: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    m: Optional[np.ndarray] = field(default=None, repr=False)

    j: int = 0
    gamma1: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    c_prev: float = 1.0
    c: float = 1.0
    s_prev: float = 0.0
    s: float = 0.0
    eta: float = 0.0
    alphas: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    psi: Optional[np.ndarray] = None
    theta: Optional[np.ndarray] = None
    mu: Optional[np.ndarray] = None
    eta_blocks: Optional[np.ndarray] = None

    rows: List[HistoryRow] = field(default_factory=list, repr=False)
    iterates: Optional[List[np.ndarray]] = field(default=None, repr=False)
    terminated: bool = False
    reason: Optional[TerminationReason] = None

    @property
    def monitored(self) -> bool:
        return self.m is not None

    @property
    def eta_rel(self) -> float:
        return abs(self.eta) / self.gamma1 if self.gamma1 > 0 else 0.0

    def persistent_vectors(self) -> Dict[str, np.ndarray]:
        """Full-length vectors kept alive between steps."""
        vectors = {
            "v_prev": self.v_prev,
            "v": self.v,
            "z": self.z,
            "w_prev": self.w_prev,
            "w": self.w,
            "x": self.x,
        }
        if self.m is not None:
            vectors["m"] = self.m
        return vectors

    def terminate(self, reason: TerminationReason) -> None:
        self.terminated = True
        self.reason = reason


def _record_row(state: SolverState, delta=None, gamma=None, c=None, s=None) -> HistoryRow:
    if state.monitored:
        eta_blocks = tuple(float(e) for e in state.eta_blocks)
        mu = tuple(float(v) for v in state.mu)
        psi = tuple(float(v) for v in state.psi)
    else:
        eta_blocks = mu = psi = ()
    row = HistoryRow(
        j=state.j,
        eta=abs(state.eta),
        eta_rel=state.eta_rel,
        eta_blocks=eta_blocks,
        mu=mu,
        psi=psi,
        delta=delta,
        gamma=gamma,
        c=c,
        s=s,
    )
    state.rows.append(row)
    return row


def _indefinite_block(part: BlockPartition, z: np.ndarray, v: np.ndarray) -> Optional[str]:
    block_products = part.inner(z, v)
    for label, value in zip(part.labels, block_products):
        if not value > 0:
            return label
    return None


def _checked_block_products(part: BlockPartition, z: np.ndarray, v: np.ndarray, j: int) -> np.ndarray:
    """
    Return <z_b, v_b> for every block, raising if one of them is negative.

    An indefinite block can hide behind a positive total when the other
    blocks dominate, so each block is checked on its own. Values down to
    -BLOCK_DEFINITENESS_TOL * <|z|, |v|> count as rounding.
    """
    products = part.inner(z, v)
    floor = -BLOCK_DEFINITENESS_TOL * float(np.dot(np.abs(z), np.abs(v)))
    for label, value in zip(part.labels, products):
        if value < floor or math.isnan(value):
            raise IndefinitePreconditionerError(
                f"<z_b, v_b> = {value:.3e} < 0 for block '{label}' at iteration {j}",
                block=label,
            )
    return products


def init_state(
    K: SaddleOperator,
    P: Optional[BlockDiagPreconditioner],
    part: BlockPartition,
    f: np.ndarray,
    x0: Optional[np.ndarray] = None,
    options: Optional[SolverOptions] = None,
) -> SolverState:
    """
    Set up the first Lanczos vector and the monitoring scalars.

    Args:
        K: Symmetric operator.
        P: Block-diagonal SPD preconditioner (identity when None).
        part: Partition of the unknowns, matching P.
        f: Right-hand side.
        x0: Initial guess (zero when None).
        options: Solver options.

    Returns:
        A fresh state with j = 0. If r^(0) = 0 the state is already
        terminated as converged.

    Raises:
        InputError: On inconsistent dimensions or options.
        IndefinitePreconditionerError: If <P^{-1} r0, r0> <= 0 for r0 != 0, or
            if any single block of it is negative.
    """
    options = options or SolverOptions()
    if K.n != part.n:
        raise InputError(f"operator has dimension {K.n}, partition covers {part.n}")
    if P is None:
        P = BlockDiagPreconditioner.identity(part)
    P.check_compatible(part)
    options.validate_for(part)

    n = part.n
    f = as_vector(f, n, "rhs")
    x = np.zeros(n) if x0 is None else as_vector(x0, n, "x0")

    r0 = f - K.apply(x)
    z = P.apply_inverse(part, r0)
    k = len(part)

    state = SolverState(
        operator=K,
        preconditioner=P,
        partition=part,
        rhs=f,
        options=options,
        v_prev=np.zeros(n),
        v=r0,
        z=z,
        w_prev=np.zeros(n),
        w=np.zeros(n),
        x=x,
        iterates=[x.copy()] if options.store_residual_history else None,
    )

    if not np.any(r0):
        logger.info("Initial residual is zero; x0 is the solution")
        if options.monitor:
            state.m = r0.copy()
            state.psi = np.zeros(k)
            state.mu = np.zeros(k)
            state.eta_blocks = np.zeros(k)
        _record_row(state)
        state.terminate(TerminationReason.CONVERGED)
        return state

    block_products = _checked_block_products(part, z, r0, 0)
    product = float(np.dot(z, r0))
    if not product > 0:
        block = _indefinite_block(part, z, r0)
        raise IndefinitePreconditionerError(
            f"<P^-1 r0, r0> = {product:.3e} is not positive"
            + (f" (block '{block}')" if block is not None else ""),
            block=block,
        )

    gamma1 = math.sqrt(product)
    state.v = r0 / gamma1
    state.z = z / gamma1
    state.gamma1 = gamma1
    state.gamma = gamma1
    state.eta = gamma1

    if options.monitor:
        state.psi = block_products / product
        state.mu = np.clip(state.psi, 0.0, 1.0)
        state.m = state.v.copy()
        state.eta_blocks = gamma1 * np.sqrt(state.mu)

    _record_row(state)
    logger.debug(f"j=0 eta={gamma1:.6e}")
    return state


def step(state: SolverState) -> SolverState:
    """
    Run one MINRES iteration in place.

    Lanczos expansion, preconditioning and normalization, QR update with a
    new Givens rotation, monitoring update, iterate update. On a lucky
    breakdown (gamma_{j+1} <= breakdown_tol * gamma_1) the rotation is
    completed with gamma_{j+1} = 0 and the state is terminated.

    Returns:
        The same state object, advanced by one iteration.

    Raises:
        InputError: If the state is already terminated.
        IndefinitePreconditionerError: If <z_{j+1}, v_{j+1}> < 0 in total or
            in any block.
    """
    if state.terminated:
        raise InputError("cannot step a terminated solver state")

    K = state.operator
    P = state.preconditioner
    part = state.partition
    options = state.options

    # Lanczos
    Kz = K.apply(state.z)
    delta = float(np.dot(Kz, state.z))
    v_new = Kz - delta * state.v - state.gamma * state.v_prev
    z_new = P.apply_inverse(part, v_new)

    block_products = _checked_block_products(part, z_new, v_new, state.j + 1)
    product = float(np.dot(z_new, v_new))
    if product < 0 or math.isnan(product):
        block = _indefinite_block(part, z_new, v_new)
        raise IndefinitePreconditionerError(
            f"<z, v> = {product:.3e} < 0 at iteration {state.j + 1}"
            + (f" (block '{block}')" if block is not None else ""),
            block=block,
        )
    gamma_new = math.sqrt(product)
    lucky = gamma_new <= options.breakdown_tol * state.gamma1
    if lucky:
        logger.info(f"Lucky breakdown at iteration {state.j + 1}: gamma = {gamma_new:.3e}")
        gamma_new = 0.0

    # QR update
    alpha0 = state.c * delta - state.c_prev * state.s * state.gamma
    alpha2 = state.s * delta + state.c_prev * state.c * state.gamma
    alpha3 = state.s_prev * state.gamma
    try:
        c_new, s_new, alpha1 = givens(alpha0, gamma_new)
    except DegenerateRotationError:
        logger.warning(f"Singular tridiagonal at iteration {state.j + 1}; stopping")
        state.terminate(TerminationReason.BREAKDOWN)
        return state
    state.alphas = (alpha0, alpha1, alpha2, alpha3)
    state.delta = delta

    if not lucky:
        v_new /= gamma_new
        z_new /= gamma_new
        if state.monitored:
            state.theta = part.inner(state.m, z_new)
            state.psi = block_products / product
            state.m *= -s_new
            state.m += c_new * v_new

    w_new = (state.z - alpha3 * state.w_prev - alpha2 * state.w) / alpha1
    state.x += (c_new * state.eta) * w_new

    if state.monitored and not lucky:
        state.mu = update_block_fractions(state.mu, state.theta, state.psi, c_new, s_new)

    eta_new = -s_new * state.eta
    if state.monitored:
        state.eta_blocks = abs(eta_new) * np.sqrt(state.mu)

    state.v_prev, state.v = state.v, v_new
    state.z = z_new
    state.w_prev, state.w = state.w, w_new
    state.c_prev, state.c = state.c, c_new
    state.s_prev, state.s = state.s, s_new
    state.gamma = gamma_new
    state.eta = eta_new
    state.j += 1

    if state.iterates is not None:
        state.iterates.append(state.x.copy())

    _record_row(state, delta=delta, gamma=gamma_new, c=c_new, s=s_new)
    if logger.isEnabledFor(logging.DEBUG):
        blocks = ""
        if state.monitored:
            blocks = " " + " ".join(f"{l}={e:.3e}" for l, e in zip(part.labels, state.eta_blocks))
        logger.debug(f"j={state.j} eta={abs(eta_new):.6e} rel={state.eta_rel:.3e}{blocks}")

    if lucky:
        if state.eta_rel <= options.rel_tol:
            state.terminate(TerminationReason.CONVERGED)
        else:
            state.terminate(TerminationReason.BREAKDOWN)
    return state


def check_convergence(state: SolverState) -> bool:
    """
    Apply the stopping rules to the current state.

    Total criterion first, then the per-block criterion, then the
    iteration cap. Marks the state terminated when one applies.

    Returns:
        True if the state is (now) terminated.
    """
    if state.terminated:
        return True
    options = state.options
    if state.eta_rel <= options.rel_tol:
        state.terminate(TerminationReason.CONVERGED)
    elif options.per_block_tol is not None and np.all(state.eta_blocks <= np.asarray(options.per_block_tol)):
        state.terminate(TerminationReason.PER_BLOCK_CONVERGED)
    elif state.j >= options.max_iter:
        state.terminate(TerminationReason.MAX_ITER)
    return state.terminated


def finalize_history(state: SolverState) -> ConvergenceHistory:
    """
    Package the rows of a terminated state.

    Raises:
        InputError: If the state has not terminated.
    """
    if not state.terminated:
        raise InputError("history requested before the solve terminated")
    return ConvergenceHistory(
        labels=state.partition.labels,
        rows=list(state.rows),
        reason=state.reason,
        monitored=state.monitored,
        iterates=list(state.iterates) if state.iterates is not None else None,
    )


def solve(
    K: SaddleOperator,
    P: Optional[BlockDiagPreconditioner],
    part: BlockPartition,
    f: np.ndarray,
    x0: Optional[np.ndarray] = None,
    options: Optional[SolverOptions] = None,
    callback: Optional[Callable[[HistoryRow], None]] = None,
) -> Tuple[np.ndarray, ConvergenceHistory]:
    """
    Solve K x = f with monitored preconditioned MINRES.

    Args:
        K: Symmetric operator.
        P: Block-diagonal SPD preconditioner, identity when None.
        part: Partition defining the residual subvectors.
        f: Right-hand side.
        x0: Initial guess, zero when None.
        options: Solver options.
        callback: Called with every history row as it is produced.

    Returns:
        (x, history). A run stopped by max_iter or breakdown is returned,
        not raised; check history.reason.

    Raises:
        InputError: On inconsistent input.
        IndefinitePreconditionerError: If P turns out not to be SPD.
    """
    options = options or SolverOptions()
    logger.info(
        f"MINRES: n={part.n}, blocks={part.labels}, rel_tol={options.rel_tol:g}, "
        f"max_iter={options.max_iter}, monitor={'on' if options.monitor else 'off'}"
    )

    state = init_state(K, P, part, f, x0, options)
    if callback is not None:
        callback(state.rows[0])
    check_convergence(state)

    while not state.terminated:
        emitted = len(state.rows)
        step(state)
        if callback is not None and len(state.rows) > emitted:
            callback(state.rows[-1])
        check_convergence(state)

    history = finalize_history(state)
    if history.converged:
        logger.info(f"MINRES {history.summary()}")
    else:
        logger.warning(f"MINRES {history.summary()}")
    return state.x, history
