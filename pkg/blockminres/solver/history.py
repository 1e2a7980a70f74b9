"""
Convergence history of a monitored solve.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np


class TerminationReason(str, Enum):
    CONVERGED = "converged"
    PER_BLOCK_CONVERGED = "per-block-converged"
    MAX_ITER = "max-iter"
    BREAKDOWN = "breakdown"

    @property
    def is_success(self) -> bool:
        return self in (TerminationReason.CONVERGED, TerminationReason.PER_BLOCK_CONVERGED)


@dataclass(frozen=True)
class HistoryRow:
    """
    One iteration of the history.

    eta and eta_blocks are magnitudes. delta, gamma, c and s are the
    recurrence scalars of the step that produced the row (None for j = 0);
    gamma is gamma_{j+1}, c and s are c_{j+1}, s_{j+1}.
    """

    j: int
    eta: float
    eta_rel: float
    eta_blocks: Tuple[float, ...] = ()
    mu: Tuple[float, ...] = ()
    psi: Tuple[float, ...] = ()
    delta: Optional[float] = None
    gamma: Optional[float] = None
    c: Optional[float] = None
    s: Optional[float] = None


@dataclass
class ConvergenceHistory:
    """
    Per-iteration record of total and per-block preconditioned residual norms.

    Holds one row per iteration plus the row for j = 0. iterates is filled
    only when the solve stored the residual history.
    """

    labels: List[str]
    rows: List[HistoryRow]
    reason: TerminationReason
    monitored: bool = True
    iterates: Optional[List[np.ndarray]] = field(default=None, repr=False)

    @property
    def iterations(self) -> int:
        return len(self.rows) - 1

    @property
    def converged(self) -> bool:
        return self.reason.is_success

    @property
    def eta0(self) -> float:
        return self.rows[0].eta

    @property
    def final_eta(self) -> float:
        return self.rows[-1].eta

    def etas(self) -> np.ndarray:
        return np.array([row.eta for row in self.rows])

    def eta_blocks(self) -> np.ndarray:
        """Array of shape (rows, blocks) with |eta_{j,b}|."""
        return np.array([row.eta_blocks for row in self.rows], dtype=np.float64).reshape(len(self.rows), -1)

    def fractions(self) -> np.ndarray:
        """Array of shape (rows, blocks) with mu_b."""
        return np.array([row.mu for row in self.rows], dtype=np.float64).reshape(len(self.rows), -1)

    def average_fractions(self) -> np.ndarray:
        """Mean of mu_b over all emitted rows, one entry per block."""
        return self.fractions().mean(axis=0)

    def average_fraction(self, label: str) -> float:
        return float(self.average_fractions()[self.labels.index(label)])

    def summary(self) -> str:
        text = f"{self.reason.value} after {self.iterations} iterations, |eta|/|eta_0| = {self.rows[-1].eta_rel:.3e}"
        if self.monitored and self.rows[-1].eta_blocks:
            blocks = ", ".join(f"{l}={v:.3e}" for l, v in zip(self.labels, self.rows[-1].eta_blocks))
            text += f" ({blocks})"
        return text
