"""
Distance from separability for covariance matrices on an m x n grid.

Rearranging the (mn x mn) matrix so that each (i, k) block becomes a row
turns A (x) B into the rank-one matrix vec(A) vec(B)^T. The share of squared
Frobenius norm outside the leading singular value measures how far a
covariance is from any Kronecker product.
"""

import numpy as np
from scipy import linalg

from utils.errors import ShapeError


def _rearrange(cov: np.ndarray, m: int, n: int) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if m < 1 or n < 1 or cov.shape != (m * n, m * n):
        raise ShapeError(f"Covariance must be {m * n}x{m * n} for an {m}x{n} grid, got {cov.shape}")
    return cov.reshape(m, n, m, n).transpose(0, 2, 1, 3).reshape(m * m, n * n)


def separability_residual(cov, m: int, n: int) -> float:
    """
    1 - sigma_1^2 / sum sigma_i^2 of the rearranged matrix, in [0, 1].

    Zero (to rounding) exactly when cov = A (x) B for some m x m A and n x n B.
    Points must be ordered with the second axis fastest.
    """
    s = linalg.svdvals(_rearrange(cov, m, n))
    total = float(np.sum(s**2))
    if total == 0:
        return 0.0
    return float(np.clip(1.0 - s[0] ** 2 / total, 0.0, 1.0))


def nearest_kronecker(cov, m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Frobenius-nearest A (x) B to cov, as (A, B)."""
    u, s, vt = linalg.svd(_rearrange(cov, m, n))
    scale = np.sqrt(s[0])
    a = (scale * u[:, 0]).reshape(m, m)
    b = (scale * vt[0]).reshape(n, n)
    if np.trace(a) < 0:
        a, b = -a, -b
    return a, b
