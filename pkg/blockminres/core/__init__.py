"""
Core data model: vectors, symmetric operators, block partitions and
block-diagonal SPD preconditioners.
"""

from blockminres.core.exceptions import (
    BlockMinresError,
    BreakdownError,
    DegenerateRotationError,
    IndefinitePreconditionerError,
    InputError,
    ParseError,
    PartitionError,
    UnsupportedFormatError,
    VerificationError,
)
from blockminres.core.operator import SaddleOperator, apply_operator, check_symmetry
from blockminres.core.partition import Block, BlockPartition, partitioned_inner
from blockminres.core.preconditioner import (
    BlockDiagPreconditioner,
    BlockSolve,
    CholeskyBlockSolve,
    DiagonalBlockSolve,
    IdentityBlockSolve,
    SparseLUBlockSolve,
    apply_preconditioner_inverse,
    check_spd,
    make_block_solve,
)
from blockminres.core.vectors import as_vector

__all__ = [
    "BlockMinresError",
    "BreakdownError",
    "DegenerateRotationError",
    "IndefinitePreconditionerError",
    "InputError",
    "ParseError",
    "PartitionError",
    "UnsupportedFormatError",
    "VerificationError",
    "SaddleOperator",
    "apply_operator",
    "check_symmetry",
    "Block",
    "BlockPartition",
    "partitioned_inner",
    "BlockDiagPreconditioner",
    "BlockSolve",
    "CholeskyBlockSolve",
    "DiagonalBlockSolve",
    "IdentityBlockSolve",
    "SparseLUBlockSolve",
    "apply_preconditioner_inverse",
    "check_spd",
    "make_block_solve",
    "as_vector",
]
