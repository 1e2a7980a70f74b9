"""
A-posteriori oracle for the progressive block norms.

The oracle recomputes ||r_b^(j)||_{P_b^{-1}} from stored iterates through
r = f - K x and z = P^{-1} r. It only reads (K, P, f, x^(j)); none of the
solver's recurrence scalars are used.
"""

from dataclasses import dataclass, field, replace
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from blockminres.core.exceptions import IndefinitePreconditionerError, InputError, VerificationError
from blockminres.core.operator import SaddleOperator
from blockminres.core.partition import BlockPartition
from blockminres.core.preconditioner import BlockDiagPreconditioner, apply_preconditioner_inverse
from blockminres.core.vectors import as_vector
from blockminres.solver.history import ConvergenceHistory
from blockminres.solver.minres import solve
from blockminres.solver.options import SolverOptions
from blockminres.utils.logging_config import get_logger

logger = get_logger("verify")

DENSE_ORACLE_LIMIT = 50

ExplicitNorms = Tuple[float, np.ndarray]


def _norms_from_products(part: BlockPartition, z: np.ndarray, r: np.ndarray) -> ExplicitNorms:
    products = part.inner(z, r)
    scale = float(np.dot(np.abs(z), np.abs(r)))
    for label, value in zip(part.labels, products):
        if value < -1e-12 * scale:
            raise IndefinitePreconditionerError(
                f"<P_b^-1 r_b, r_b> = {value:.3e} < 0 for block '{label}'", block=label
            )
    products = np.maximum(products, 0.0)
    return math.sqrt(float(products.sum())), np.sqrt(products)


def explicit_block_norms(
    K: SaddleOperator,
    P: BlockDiagPreconditioner,
    part: BlockPartition,
    f: np.ndarray,
    x: np.ndarray,
) -> ExplicitNorms:
    """
    Preconditioned norms of the explicit residual r = f - K x.

    Args:
        K: Operator.
        P: Block-diagonal preconditioner.
        part: Partition matching P.
        f: Right-hand side.
        x: Iterate.

    Returns:
        (sqrt(<z, r>), array of sqrt(<z_b, r_b>)) with z = P^{-1} r.

    Raises:
        InputError: On dimension mismatch.
        IndefinitePreconditionerError: If a block gives <z_b, r_b> < 0.
    """
    if K.n != part.n:
        raise InputError(f"operator has dimension {K.n}, partition covers {part.n}")
    f = as_vector(f, part.n, "rhs")
    x = as_vector(x, part.n, "x")
    r = f - K.apply(x)
    z = apply_preconditioner_inverse(P, part, r)
    return _norms_from_products(part, z, r)


def explicit_block_norms_dense(
    K: SaddleOperator,
    P: BlockDiagPreconditioner,
    part: BlockPartition,
    f: np.ndarray,
    x: np.ndarray,
) -> ExplicitNorms:
    """
    Same quantities as explicit_block_norms, through a dense inverse of the
    assembled P. Only for small systems; used to cross-check the oracle.
    """
    if part.n > DENSE_ORACLE_LIMIT:
        raise InputError(f"dense oracle is limited to {DENSE_ORACLE_LIMIT} unknowns, got {part.n}")
    f = as_vector(f, part.n, "rhs")
    x = as_vector(x, part.n, "x")
    if K.matrix is not None:
        K_dense = K.matrix.toarray()
    else:
        K_dense = np.column_stack([K.apply(e) for e in np.eye(part.n)])
    P_inv = np.linalg.inv(P.assembled(part).toarray())
    r = f - K_dense @ x
    return _norms_from_products(part, P_inv @ r, r)


def replay_oracle(
    K: SaddleOperator,
    P: BlockDiagPreconditioner,
    part: BlockPartition,
    f: np.ndarray,
    iterates: Sequence[np.ndarray],
) -> List[ExplicitNorms]:
    """Explicit norms for every stored iterate x^(0), x^(1), ..."""
    logger.info(f"Replaying oracle over {len(iterates)} iterates")
    return [explicit_block_norms(K, P, part, f, x) for x in iterates]


@dataclass(frozen=True)
class OracleRow:
    """Progressive against explicit norms for one iteration."""

    j: int
    progressive_eta: float
    explicit_eta: float
    progressive_blocks: Tuple[float, ...]
    explicit_blocks: Tuple[float, ...]
    deviation_blocks: Tuple[float, ...]
    relative_blocks: Tuple[float, ...]

    @property
    def deviation(self) -> float:
        """Largest absolute deviation over the total and the blocks."""
        return max((abs(self.progressive_eta - self.explicit_eta),) + self.deviation_blocks)


@dataclass
class OracleReport:
    """
    Row-by-row comparison of a progressive history with the oracle.

    tol is relative to eta_0: the report passes when every deviation is at
    most tol * eta_0 (tol itself when eta_0 = 0).
    """

    labels: List[str]
    rows: List[OracleRow]
    eta0: float
    tol: float
    offending: List[int] = field(default_factory=list)

    @property
    def scale(self) -> float:
        return self.eta0 if self.eta0 > 0 else 1.0

    @property
    def max_deviation(self) -> float:
        return max((row.deviation for row in self.rows), default=0.0)

    @property
    def max_relative_deviation(self) -> float:
        return self.max_deviation / self.scale

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol * self.scale

    def summary(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        text = (
            f"oracle {verdict}: max deviation {self.max_relative_deviation:.3e} * eta_0 "
            f"over {len(self.rows)} rows (tol {self.tol:.1e})"
        )
        if self.offending:
            shown = ", ".join(str(j) for j in self.offending[:10])
            text += f"; offending rows: {shown}"
        return text


def compare_histories(
    progressive: ConvergenceHistory,
    oracle_rows: Sequence[ExplicitNorms],
    tol: float = 1e-8,
) -> OracleReport:
    """
    Compare a progressive history with oracle rows.

    Args:
        progressive: History produced by the solver (or reloaded from CSV).
        oracle_rows: (total, per_block) pairs, one per history row.
        tol: Tolerance relative to eta_0.

    Returns:
        The report; report.passed gives the verdict.

    Raises:
        VerificationError: If the row counts differ.
    """
    if len(progressive.rows) != len(oracle_rows):
        raise VerificationError(
            f"history has {len(progressive.rows)} rows, oracle has {len(oracle_rows)}"
        )

    eta0 = progressive.eta0
    scale = eta0 if eta0 > 0 else 1.0
    rows: List[OracleRow] = []
    offending: List[int] = []
    for hist_row, (total, blocks) in zip(progressive.rows, oracle_rows):
        explicit = tuple(float(b) for b in blocks)
        if hist_row.eta_blocks:
            if len(hist_row.eta_blocks) != len(explicit):
                raise VerificationError(
                    f"row {hist_row.j}: {len(hist_row.eta_blocks)} progressive blocks, {len(explicit)} oracle blocks"
                )
            deviations = tuple(abs(p - e) for p, e in zip(hist_row.eta_blocks, explicit))
        else:
            deviations = ()
        row = OracleRow(
            j=hist_row.j,
            progressive_eta=hist_row.eta,
            explicit_eta=float(total),
            progressive_blocks=tuple(hist_row.eta_blocks),
            explicit_blocks=explicit,
            deviation_blocks=deviations,
            relative_blocks=tuple(d / scale for d in deviations),
        )
        if row.deviation > tol * scale:
            offending.append(row.j)
        rows.append(row)

    report = OracleReport(labels=list(progressive.labels), rows=rows, eta0=eta0, tol=tol, offending=offending)
    if report.passed:
        logger.info(report.summary())
    else:
        logger.warning(report.summary())
    return report


def verify_solve(
    K: SaddleOperator,
    P: Optional[BlockDiagPreconditioner],
    part: BlockPartition,
    f: np.ndarray,
    x0: Optional[np.ndarray] = None,
    options: Optional[SolverOptions] = None,
    tol: float = 1e-8,
) -> Tuple[np.ndarray, ConvergenceHistory, OracleReport]:
    """
    Solve with every iterate stored, then check the history with the oracle.

    Returns:
        (x, history, report).
    """
    if P is None:
        P = BlockDiagPreconditioner.identity(part)
    options = replace(options or SolverOptions(), store_residual_history=True)
    x, history = solve(K, P, part, f, x0, options)
    report = compare_histories(history, replay_oracle(K, P, part, f, history.iterates), tol)
    return x, history, report
