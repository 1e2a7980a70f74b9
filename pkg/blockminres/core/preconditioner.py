"""
Block-diagonal SPD preconditioners.

P = blkdiag(P_1, ..., P_k) following a BlockPartition. Each block is
factored once at construction; applying P^{-1} is then a set of
independent block solves.
"""

from abc import ABC, abstractmethod
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from blockminres.core.exceptions import IndefinitePreconditionerError, InputError
from blockminres.core.operator import MatrixLike
from blockminres.core.partition import BlockPartition
from blockminres.utils.logging_config import get_logger

logger = get_logger("core.preconditioner")

DEFAULT_DENSE_LIMIT = 4000


class BlockSolve(ABC):
    """
    Abstract SPD block solve r_b -> P_b^{-1} r_b.
    """

    kind = "base"

    def __init__(self, label: str, size: int):
        self.label = label
        self.size = size

    @abstractmethod
    def solve(self, r: np.ndarray) -> np.ndarray:
        """Return P_b^{-1} r."""

    @abstractmethod
    def matrix(self) -> sp.csr_matrix:
        """The SPD block P_b itself."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}(label={self.label!r}, size={self.size})"


class IdentityBlockSolve(BlockSolve):
    kind = "identity"

    def solve(self, r: np.ndarray) -> np.ndarray:
        return r.copy()

    def matrix(self) -> sp.csr_matrix:
        return sp.identity(self.size, format="csr")


class DiagonalBlockSolve(BlockSolve):
    """Diagonal fast path: elementwise division."""

    kind = "diagonal"

    def __init__(self, label: str, diagonal: np.ndarray):
        diagonal = np.asarray(diagonal, dtype=np.float64).reshape(-1)
        super().__init__(label, diagonal.shape[0])
        bad = np.flatnonzero(~(diagonal > 0.0))
        if bad.size:
            raise IndefinitePreconditionerError(
                f"preconditioner block '{label}' has non-positive diagonal entry at local index {int(bad[0])}",
                block=label,
            )
        self._diagonal = diagonal

    def solve(self, r: np.ndarray) -> np.ndarray:
        return r / self._diagonal

    def matrix(self) -> sp.csr_matrix:
        return sp.diags(self._diagonal, format="csr")


class CholeskyBlockSolve(BlockSolve):
    """Dense Cholesky factorization, factored once."""

    kind = "cholesky"

    def __init__(self, label: str, matrix: MatrixLike):
        dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, dtype=np.float64)
        super().__init__(label, dense.shape[0])
        if not np.allclose(dense, dense.T, rtol=1e-12, atol=1e-14 * np.abs(dense).max()):
            raise IndefinitePreconditionerError(f"preconditioner block '{label}' is not symmetric", block=label)
        try:
            self._factor = scipy.linalg.cho_factor(dense, lower=True, check_finite=True)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise IndefinitePreconditionerError(
                f"preconditioner block '{label}' is not symmetric positive definite: {e}",
                block=label,
            ) from e
        self._matrix = sp.csr_matrix(dense)

    def solve(self, r: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve(self._factor, r, check_finite=False)

    def matrix(self) -> sp.csr_matrix:
        return self._matrix


class SparseLUBlockSolve(BlockSolve):
    """
    Sparse LU for blocks too large to factor densely.

    LU does not certify definiteness; the solver checks <z_b, v_b> per block.
    """

    kind = "sparse-lu"

    def __init__(self, label: str, matrix: MatrixLike):
        csc = sp.csc_matrix(matrix, dtype=np.float64)
        super().__init__(label, csc.shape[0])
        if np.any(csc.diagonal() <= 0.0):
            raise IndefinitePreconditionerError(
                f"preconditioner block '{label}' has a non-positive diagonal entry",
                block=label,
            )
        try:
            self._lu = spla.splu(csc)
        except RuntimeError as e:
            raise IndefinitePreconditionerError(
                f"preconditioner block '{label}' is singular: {e}", block=label
            ) from e
        self._matrix = csc.tocsr()

    def solve(self, r: np.ndarray) -> np.ndarray:
        return self._lu.solve(r)

    def matrix(self) -> sp.csr_matrix:
        return self._matrix


def make_block_solve(label: str, matrix: Optional[MatrixLike], dense_limit: int = DEFAULT_DENSE_LIMIT,
                     size: Optional[int] = None) -> BlockSolve:
    """
    Pick the cheapest exact solve for an SPD block.

    Args:
        label: Block label (used in error messages).
        matrix: The SPD block, or None for the identity.
        dense_limit: Largest size factored densely.
        size: Block size, required when matrix is None.

    Returns:
        An identity, diagonal, dense Cholesky or sparse LU block solve.
    """
    if matrix is None:
        if size is None:
            raise InputError(f"identity block '{label}' needs a size")
        return IdentityBlockSolve(label, size)

    shape = matrix.shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise InputError(f"preconditioner block '{label}' must be square, got shape {shape}")

    if sp.issparse(matrix):
        csr = sp.csr_matrix(matrix, dtype=np.float64)
        off_diagonal = csr - sp.diags(csr.diagonal())
        if off_diagonal.count_nonzero() == 0:
            return DiagonalBlockSolve(label, csr.diagonal())
        if shape[0] > dense_limit:
            return SparseLUBlockSolve(label, csr)
        return CholeskyBlockSolve(label, csr)

    dense = np.asarray(matrix, dtype=np.float64)
    if np.count_nonzero(dense - np.diag(np.diag(dense))) == 0:
        return DiagonalBlockSolve(label, np.diag(dense))
    return CholeskyBlockSolve(label, dense)


class BlockDiagPreconditioner:
    """
    P = blkdiag(P_1, ..., P_k), one SPD solve per partition block.

    Immutable after construction.
    """

    def __init__(self, solves: Sequence[BlockSolve]):
        if not solves:
            raise InputError("a preconditioner needs at least one block")
        self._solves: List[BlockSolve] = list(solves)

    @classmethod
    def identity(cls, part: BlockPartition) -> "BlockDiagPreconditioner":
        return cls([IdentityBlockSolve(b.label, b.size) for b in part])

    @classmethod
    def from_matrices(cls, part: BlockPartition, matrices: Sequence[Optional[MatrixLike]],
                      dense_limit: int = DEFAULT_DENSE_LIMIT) -> "BlockDiagPreconditioner":
        """
        Factor one SPD matrix per block.

        Args:
            part: Partition the blocks follow.
            matrices: One matrix (or None for identity) per block, in partition order.
            dense_limit: Largest block factored with dense Cholesky.

        Raises:
            InputError: On count or size mismatch.
            IndefinitePreconditionerError: If a block fails to factor.
        """
        if len(matrices) != len(part):
            raise InputError(f"partition has {len(part)} blocks but {len(matrices)} preconditioner blocks were given")
        solves = []
        for block, matrix in zip(part, matrices):
            if matrix is not None and matrix.shape[0] != block.size:
                raise InputError(
                    f"preconditioner block '{block.label}' has size {matrix.shape[0]}, partition block has {block.size}"
                )
            solves.append(make_block_solve(block.label, matrix, dense_limit, size=block.size))
        logger.debug("Preconditioner blocks: " + ", ".join(f"{s.label}:{s.kind}" for s in solves))
        return cls(solves)

    @property
    def solves(self) -> List[BlockSolve]:
        return list(self._solves)

    def __len__(self) -> int:
        return len(self._solves)

    def block_matrices(self) -> List[sp.csr_matrix]:
        return [s.matrix() for s in self._solves]

    def assembled(self, part: BlockPartition) -> sp.csr_matrix:
        """The full matrix P in the ordering of the unknowns."""
        self.check_compatible(part)
        rows, cols, vals = [], [], []
        for block, solve in zip(part, self._solves):
            local = solve.matrix().tocoo()
            rows.append(block.indices[local.row])
            cols.append(block.indices[local.col])
            vals.append(local.data)
        P = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(part.n, part.n),
        )
        return P.tocsr()

    def check_compatible(self, part: BlockPartition) -> None:
        if len(self._solves) != len(part):
            raise InputError(f"preconditioner has {len(self._solves)} blocks, partition has {len(part)}")
        for block, solve in zip(part, self._solves):
            if solve.size != block.size:
                raise InputError(
                    f"preconditioner block '{solve.label}' has size {solve.size}, partition block '{block.label}' has {block.size}"
                )

    def apply_inverse(self, part: BlockPartition, v: np.ndarray) -> np.ndarray:
        """z = P^{-1} v without compatibility checks (hot path)."""
        z = np.empty_like(v)
        for block, solve in zip(part.blocks, self._solves):
            z[block.selector] = solve.solve(block.take(v))
        return z

    def __repr__(self) -> str:
        kinds = ", ".join(f"{s.label}:{s.kind}" for s in self._solves)
        return f"BlockDiagPreconditioner({kinds})"


def apply_preconditioner_inverse(pre: BlockDiagPreconditioner, part: BlockPartition, v: np.ndarray) -> np.ndarray:
    """
    Blockwise z_b = P_b^{-1} v_b.

    Args:
        pre: The preconditioner.
        part: Partition matching the preconditioner blocks.
        v: Vector of dimension part.n.

    Returns:
        z = P^{-1} v.

    Raises:
        InputError: On block count/size mismatch.
        IndefinitePreconditionerError: If a block solve produces non-finite values.
    """
    pre.check_compatible(part)
    if v.shape != (part.n,):
        raise InputError(f"v has shape {v.shape}, expected ({part.n},)")
    z = pre.apply_inverse(part, v)
    if not np.all(np.isfinite(z)):
        for block in part:
            if not np.all(np.isfinite(block.take(z))):
                raise IndefinitePreconditionerError(
                    f"preconditioner block '{block.label}' produced non-finite values", block=block.label
                )
    return z


def check_spd(pre: BlockDiagPreconditioner, part: BlockPartition, samples: int = 100, seed: int = 0) -> float:
    """
    Sample the definiteness of P^{-1}.

    Returns:
        min over random nonzero v of <P^{-1} v, v> / ||v||^2; positive for SPD.
    """
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(samples):
        v = rng.standard_normal(part.n)
        z = apply_preconditioner_inverse(pre, part, v)
        worst = min(worst, float(np.dot(z, v) / np.dot(v, v)))
    return worst
