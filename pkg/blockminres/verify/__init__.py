"""
Independent oracle for the progressive residual block norms.
"""

from blockminres.verify.oracle import (
    OracleReport,
    OracleRow,
    compare_histories,
    explicit_block_norms,
    explicit_block_norms_dense,
    replay_oracle,
    verify_solve,
)

__all__ = [
    "OracleReport",
    "OracleRow",
    "compare_histories",
    "explicit_block_norms",
    "explicit_block_norms_dense",
    "replay_oracle",
    "verify_solve",
]
