"""
Givens rotations and the progressive residual-fraction update.
"""

import math
from typing import Tuple

import numpy as np

from blockminres.core.exceptions import DegenerateRotationError


def givens(a: float, b: float) -> Tuple[float, float, float]:
    """
    Rotation that maps (a, b) to (r, 0).

    Args:
        a: First component (alpha_0 in the QR update).
        b: Component to annihilate (gamma_{j+1}).

    Returns:
        (c, s, r) with r = sqrt(a^2 + b^2), c = a / r, s = b / r.

    Raises:
        DegenerateRotationError: If a = b = 0.
    """
    r = math.hypot(a, b)
    if r == 0.0:
        raise DegenerateRotationError("Givens rotation of the zero vector")
    return a / r, b / r, r


def update_block_fractions(mu, theta, psi, c: float, s: float):
    """
    mu_b <- s^2 mu_b - 2 s c theta_b + c^2 psi_b, clamped to [0, 1].

    Works on scalars or on arrays holding one entry per block.
    """
    updated = s * s * np.asarray(mu) - 2.0 * s * c * np.asarray(theta) + c * c * np.asarray(psi)
    clamped = np.clip(updated, 0.0, 1.0)
    if np.ndim(clamped) == 0:
        return float(clamped)
    return clamped
