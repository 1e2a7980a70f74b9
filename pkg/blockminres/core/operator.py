"""
Symmetric saddle-point operators.

K = [[A, B^T], [B, -C]] with A and C symmetric, or an opaque symmetric
operator given only through its action v -> K v.
"""

from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from blockminres.core.exceptions import InputError
from blockminres.core.partition import BlockPartition
from blockminres.core.vectors import as_vector
from blockminres.utils.logging_config import get_logger

logger = get_logger("core.operator")

MatrixLike = Union[np.ndarray, sp.spmatrix, sp.sparray]


def _as_sparse(matrix: MatrixLike, name: str) -> sp.csr_matrix:
    if sp.issparse(matrix):
        out = sp.csr_matrix(matrix, dtype=np.float64)
    else:
        arr = np.asarray(matrix, dtype=np.float64)
        if arr.ndim != 2:
            raise InputError(f"{name} must be two-dimensional, got shape {arr.shape}")
        out = sp.csr_matrix(arr)
    if not np.all(np.isfinite(out.data)):
        raise InputError(f"{name} contains NaN or Inf entries")
    return out


class SaddleOperator:
    """
    Symmetric linear operator of dimension n.

    Built either from explicit blocks (from_blocks), from an assembled
    symmetric matrix (from_matrix) or from a callable (from_function).
    Immutable after construction; apply is reentrant.
    """

    def __init__(
        self,
        n: int,
        apply: Callable[[np.ndarray], np.ndarray],
        matrix: Optional[sp.csr_matrix] = None,
        A: Optional[sp.csr_matrix] = None,
        B: Optional[sp.csr_matrix] = None,
        C: Optional[sp.csr_matrix] = None,
    ):
        if n < 1:
            raise InputError(f"operator dimension must be positive, got {n}")
        self._n = int(n)
        self._apply = apply
        self._matrix = matrix
        self._A = A
        self._B = B
        self._C = C

    @classmethod
    def from_blocks(cls, A: MatrixLike, B: MatrixLike, C: Optional[MatrixLike] = None) -> "SaddleOperator":
        """
        Assemble K = [[A, B^T], [B, -C]].

        Args:
            A: Symmetric m x m block.
            B: p x m constraint block.
            C: Symmetric p x p block; zero when None.

        Raises:
            InputError: If the block shapes are inconsistent.
        """
        A = _as_sparse(A, "A")
        B = _as_sparse(B, "B")
        m = A.shape[0]
        if A.shape != (m, m):
            raise InputError(f"A must be square, got shape {A.shape}")
        if B.shape[1] != m:
            raise InputError(f"B has {B.shape[1]} columns, A has {m} rows")
        p = B.shape[0]
        C = sp.csr_matrix((p, p)) if C is None else _as_sparse(C, "C")
        if C.shape != (p, p):
            raise InputError(f"C must be {p} x {p}, got shape {C.shape}")

        K = sp.bmat([[A, B.T], [B, -C]], format="csr")
        logger.debug(f"Assembled saddle operator: m={m}, p={p}, nnz={K.nnz}")
        return cls(n=m + p, apply=K.dot, matrix=K, A=A, B=B, C=C)

    @classmethod
    def from_matrix(cls, K: MatrixLike) -> "SaddleOperator":
        """Wrap an assembled matrix. Symmetry is the caller's promise."""
        K = _as_sparse(K, "K")
        if K.shape[0] != K.shape[1]:
            raise InputError(f"K must be square, got shape {K.shape}")
        return cls(n=K.shape[0], apply=K.dot, matrix=K)

    @classmethod
    def from_function(cls, n: int, apply: Callable[[np.ndarray], np.ndarray]) -> "SaddleOperator":
        """Wrap a matrix-free symmetric action."""
        return cls(n=n, apply=apply)

    @property
    def n(self) -> int:
        return self._n

    @property
    def matrix(self) -> Optional[sp.csr_matrix]:
        """The assembled matrix, or None for a matrix-free operator."""
        return self._matrix

    @property
    def has_blocks(self) -> bool:
        return self._A is not None

    @property
    def A(self) -> Optional[sp.csr_matrix]:
        return self._A

    @property
    def B(self) -> Optional[sp.csr_matrix]:
        return self._B

    @property
    def C(self) -> Optional[sp.csr_matrix]:
        return self._C

    @property
    def block_sizes(self):
        """(m, p) for block operators, None otherwise."""
        if not self.has_blocks:
            return None
        return self._A.shape[0], self._B.shape[0]

    def block_partition(self, labels=("u", "p")) -> BlockPartition:
        """The contiguous u/p partition matching the explicit blocks."""
        if not self.has_blocks:
            raise InputError("operator has no explicit block structure")
        m, p = self.block_sizes
        return BlockPartition.from_sizes([(labels[0], m), (labels[1], p)])

    def apply(self, v: np.ndarray) -> np.ndarray:
        """K v without validation (hot path)."""
        return np.asarray(self._apply(v), dtype=np.float64)

    def apply_blockwise(self, v: np.ndarray) -> np.ndarray:
        """[A v_u + B^T v_p; B v_u - C v_p] evaluated block by block."""
        if not self.has_blocks:
            raise InputError("operator has no explicit block structure")
        m, _ = self.block_sizes
        v_u, v_p = v[:m], v[m:]
        return np.concatenate([
            self._A.dot(v_u) + self._B.T.dot(v_p),
            self._B.dot(v_u) - self._C.dot(v_p),
        ])

    def norm_estimate(self, iterations: int = 30, seed: int = 0) -> float:
        """
        Cheap upper-ish estimate of ||K||_2.

        Uses the 1-norm for assembled operators (an upper bound for
        symmetric K) and power iteration otherwise.
        """
        if self._matrix is not None:
            return float(spla.norm(self._matrix, ord=1))
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(self._n)
        x /= np.linalg.norm(x)
        estimate = 0.0
        for _ in range(iterations):
            y = self.apply(x)
            estimate = float(np.linalg.norm(y))
            if estimate == 0.0:
                break
            x = y / estimate
        return estimate

    def __repr__(self) -> str:
        if self.has_blocks:
            m, p = self.block_sizes
            return f"SaddleOperator(n={self._n}, m={m}, p={p})"
        kind = "assembled" if self._matrix is not None else "matrix-free"
        return f"SaddleOperator(n={self._n}, {kind})"


def apply_operator(op: SaddleOperator, v: np.ndarray) -> np.ndarray:
    """
    Apply K to v with input validation.

    Args:
        op: The operator.
        v: Vector of dimension op.n.

    Returns:
        K v.

    Raises:
        InputError: On dimension mismatch or non-finite input.
    """
    v = as_vector(v, op.n, "v")
    return op.apply(v)


def check_symmetry(op: SaddleOperator, samples: int = 100, seed: int = 0) -> float:
    """
    Sample the symmetry defect of an operator.

    Returns:
        max over samples of |<Kx, y> - <x, Ky>| / (||x|| ||y|| ||K||_est).
    """
    rng = np.random.default_rng(seed)
    scale = op.norm_estimate(seed=seed) or 1.0
    worst = 0.0
    for _ in range(samples):
        x = rng.standard_normal(op.n)
        y = rng.standard_normal(op.n)
        defect = abs(np.dot(op.apply(x), y) - np.dot(x, op.apply(y)))
        worst = max(worst, defect / (np.linalg.norm(x) * np.linalg.norm(y) * scale))
    return worst
