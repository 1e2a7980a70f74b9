"""
Preconditioned MINRES with progressive per-block residual monitoring.
"""

from blockminres.solver.givens import givens, update_block_fractions
from blockminres.solver.history import ConvergenceHistory, HistoryRow, TerminationReason
from blockminres.solver.minres import (
    SolverState,
    check_convergence,
    finalize_history,
    init_state,
    solve,
    step,
)
from blockminres.solver.options import SolverOptions

__all__ = [
    "givens",
    "update_block_fractions",
    "ConvergenceHistory",
    "HistoryRow",
    "TerminationReason",
    "SolverState",
    "check_convergence",
    "finalize_history",
    "init_state",
    "solve",
    "step",
    "SolverOptions",
]
