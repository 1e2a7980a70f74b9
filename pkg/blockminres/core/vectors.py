"""
Vector validation at public boundaries.

Vectors are plain 1-D float64 numpy arrays; this module only makes sure
that what enters the solver is one.
"""

from typing import Any, Optional

import numpy as np

from blockminres.core.exceptions import InputError


def as_vector(values: Any, n: Optional[int] = None, name: str = "vector") -> np.ndarray:
    """
    Convert input to a finite 1-D float64 array.

    Args:
        values: Array-like input. Column vectors of shape (n, 1) are flattened.
        n: Required dimension, or None to accept any length.
        name: Name used in error messages.

    Returns:
        A float64 array of shape (n,). The input is copied.

    Raises:
        InputError: On wrong shape, wrong dimension or non-finite entries.
    """
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.reshape(-1)
    if arr.ndim != 1:
        raise InputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise InputError(f"{name} has dimension {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains NaN or Inf entries")
    return arr
