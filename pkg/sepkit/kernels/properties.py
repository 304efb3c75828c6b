"""
Second-order properties implied by a separable covariance function.

- isotropy_residual: only a common-theta squared exponential product is a
  function of Euclidean distance, so only it survives a rigid rotation.
- conditional_covariance: given F(x', y), the values F(x, y) and F(x', y')
  are uncorrelated under a separable kernel (right-angle geometry).
- cross_correlation: corr{F(x, y), F(x, y')} does not depend on x.
"""

import math

import numpy as np
from loguru import logger
from scipy import linalg

from kernels.core import Covariance, SeparableKernel, condition_gram
from utils.errors import NumericalError, ShapeError

CHECK_PAIRS = 16
ROTATION = math.pi / 4


def _require_2d(k: SeparableKernel, what: str) -> None:
    if k.dim != 2:
        raise ShapeError(f"{what} needs a 2-D kernel, got {k.dim} factors")


def _check_pairs(k: SeparableKernel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic check pairs around the domain center, plus that center."""
    center = np.array([d.center for d in k.domains])
    scale = min(d.width for d in k.domains)
    idx = np.arange(CHECK_PAIRS)
    angle_p = 2 * math.pi * idx / CHECK_PAIRS
    angle_q = angle_p + 2.0 + 0.3 * (idx % 3)
    radius_p = scale * (0.15 + 0.2 * (idx % 2))
    radius_q = scale * (0.1 + 0.25 * ((idx // 2) % 2))
    p = center + radius_p[:, None] * np.column_stack([np.cos(angle_p), np.sin(angle_p)])
    q = center + radius_q[:, None] * np.column_stack([np.cos(angle_q), np.sin(angle_q)])
    return p, q, center


def isotropy_residual(k: SeparableKernel) -> float:
    """
    Max |kappa(p, q) - kappa(Rp, Rq)| over fixed check pairs, R a rotation by
    pi/4 about the domain center.

    Zero (to round-off) iff both factors are squared exponential with equal theta.
    """
    _require_2d(k, "isotropy_residual")
    p, q, center = _check_pairs(k)
    c, s = math.cos(ROTATION), math.sin(ROTATION)
    rot = np.array([[c, -s], [s, c]])
    p_rot = (p - center) @ rot.T + center
    q_rot = (q - center) @ rot.T + center

    # rotated pairs may leave the rectangle; the kernel is stationary so evaluate unchecked
    before = np.array([k.cross(p[i], q[i], check=False)[0, 0] for i in range(CHECK_PAIRS)])
    after = np.array([k.cross(p_rot[i], q_rot[i], check=False)[0, 0] for i in range(CHECK_PAIRS)])
    return float(np.max(np.abs(before - after)))


def conditional_covariance(k: Covariance, a, b, c, return_jitter: bool = False) -> float | tuple[float, float]:
    """
    Gaussian conditional covariance cov{F(a), F(b) | F(c_1..c_n)}.

        kappa(a, b) - kappa(a, C) Gram(C)^-1 kappa(C, b)

    Jitter is added to Gram(C) when it is ill-conditioned. With
    return_jitter the result is (value, jitter), jitter 0.0 when none was added.

    Raises:
        NumericalError: Gram(C) not positive definite even after jitter
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    k_ab = float(k.cross(a, b)[0, 0])
    c = np.asarray(c, dtype=float)
    if c.size == 0:
        return (k_ab, 0.0) if return_jitter else k_ab
    c = np.atleast_2d(c)

    gram_c, jitter = condition_gram(k.cross(c, c))
    try:
        factor = linalg.cho_factor(gram_c, lower=True)
    except linalg.LinAlgError as e:
        worst = float(linalg.eigvalsh(gram_c)[0])
        raise NumericalError(
            f"Conditioning set Gram is singular (worst eigenvalue {worst:.3e}, jitter {jitter:.3e})",
            worst_eigenvalue=worst,
            jitter=jitter,
        ) from e
    if jitter:
        logger.debug(f"conditional_covariance used jitter {jitter:.3e} on {len(c)} points")
    k_ac = k.cross(a, c)
    k_cb = k.cross(c, b)
    value = float(k_ab - (k_ac @ linalg.cho_solve(factor, k_cb))[0, 0])
    return (value, jitter) if return_jitter else value


def cross_correlation(k: SeparableKernel, x: float, y: float, y2: float) -> float:
    """corr{F(x, y), F(x, y')}; under separability it depends on (y, y') only."""
    _require_2d(k, "cross_correlation")
    a = np.array([[x, y]])
    b = np.array([[x, y2]])
    cov = k.cross(a, b)[0, 0]
    return float(cov / math.sqrt(k.cross(a, a)[0, 0] * k.cross(b, b)[0, 0]))
