"""
Emulator prior: regression terms plus a separable residual.

    F(p) = sum_i beta_i r_i(p) + E(p),   beta ~ (coef_mean, coef_cov),  E ~ (0, kappa_E)

so the prior covariance is r(p)^T coef_cov r(q) + kappa_E(p, q). With
coef_cov = 0 (or in plug-in-mean mode) the covariance is exactly separable.
"""

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from kernels.core import SeparableKernel, is_psd
from utils.errors import ParameterError, ShapeError


@dataclass(frozen=True)
class Regressor:
    """Named regressor r(points) -> values, points shaped (N, p)."""
    name: str
    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(points, dtype=float)), dtype=float).reshape(-1)


def constant_regressor() -> Regressor:
    return Regressor("constant", lambda pts: np.ones(pts.shape[0]))


def linear_regressor(d: int, center: float = 0.0) -> Regressor:
    return Regressor(f"x{d + 1}", lambda pts: pts[:, d] - center)


def interaction_regressor(i: int, j: int, center: float = 0.0) -> Regressor:
    return Regressor(f"x{i + 1}*x{j + 1}", lambda pts: (pts[:, i] - center) * (pts[:, j] - center))


def standard_regressors(p: int, terms: tuple[str, ...] = ("constant",), center: float = 0.0) -> tuple[Regressor, ...]:
    """
    Regressors by family name: "constant", "linear" (one per input) and
    "interaction" (every pair of inputs).
    """
    out: list[Regressor] = []
    for term in terms:
        if term == "constant":
            out.append(constant_regressor())
        elif term == "linear":
            out.extend(linear_regressor(d, center) for d in range(p))
        elif term == "interaction":
            out.extend(interaction_regressor(i, j, center) for i in range(p) for j in range(i + 1, p))
        else:
            raise ParameterError(f"Unknown regressor family '{term}'")
    return tuple(out)


@dataclass(frozen=True, eq=False)
class RegressionPrior:
    """Regressors with a second-order prior on their coefficients."""
    regressors: tuple[Regressor, ...] = ()
    coef_mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    coef_cov: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def __post_init__(self):
        regressors = tuple(self.regressors)
        q = len(regressors)
        mean = np.asarray(self.coef_mean, dtype=float).reshape(-1)
        cov = np.asarray(self.coef_cov, dtype=float)
        if cov.ndim == 1:
            cov = np.diag(cov)
        if mean.size != q or cov.shape != (q, q):
            raise ShapeError(f"{q} regressors need a length-{q} mean and {q}x{q} covariance")
        if q and (not np.allclose(cov, cov.T) or (np.any(cov) and not is_psd(cov))):
            raise ParameterError("coef_cov must be symmetric non-negative definite")
        object.__setattr__(self, "regressors", regressors)
        object.__setattr__(self, "coef_mean", mean)
        object.__setattr__(self, "coef_cov", cov)

    @classmethod
    def of(cls, regressors, variance: float = 0.0, mean: float = 0.0) -> "RegressionPrior":
        """Independent coefficients with a common mean and variance."""
        regressors = tuple(regressors)
        q = len(regressors)
        return cls(regressors, np.full(q, float(mean)), float(variance) * np.eye(q))

    @property
    def size(self) -> int:
        return len(self.regressors)

    def design_matrix(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if not self.regressors:
            return np.zeros((points.shape[0], 0))
        return np.column_stack([r(points) for r in self.regressors])


@dataclass(frozen=True, eq=False)
class EmulatorPrior:
    """
    Regression-plus-residual prior.

    plug_in_mean: treat the coefficients as known (estimated from the runs at
    fit time and plugged in), so only the separable residual is uncertain.
    """
    regression: RegressionPrior
    residual: SeparableKernel
    plug_in_mean: bool = False

    @classmethod
    def separable(cls, residual: SeparableKernel) -> "EmulatorPrior":
        """Zero-mean prior whose covariance is exactly the residual kernel."""
        return cls(RegressionPrior(), residual)

    @property
    def dim(self) -> int:
        return self.residual.dim

    def as_points(self, points) -> np.ndarray:
        return self.residual.as_points(points)

    def mean(self, points) -> np.ndarray:
        points = self.as_points(points)
        return self.regression.design_matrix(points) @ self.regression.coef_mean

    def cross(self, a, b) -> np.ndarray:
        a = self.as_points(a)
        b = self.as_points(b)
        out = self.residual.cross(a, b, check=False)
        if self.regression.size and not self.plug_in_mean:
            h_a = self.regression.design_matrix(a)
            h_b = self.regression.design_matrix(b)
            out = out + h_a @ self.regression.coef_cov @ h_b.T
        return out
