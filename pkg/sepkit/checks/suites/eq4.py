"""
Conditional uncorrelation at right angles.

For a separable kernel, F(x, y) and F(x', y') are uncorrelated given
F(x', y). Random geometries are drawn for several random separable kernels;
a regression-augmented prior on the same geometries serves as the
non-separable counterexample.
"""

from typing import Any

import numpy as np

from checks.router import CheckResult, above, at_most
from emulator.prior import EmulatorPrior, RegressionPrior, standard_regressors
from kernels.core import Kernel1D, SeparableKernel, kernel_from_dict
from kernels.properties import conditional_covariance
from utils.streams import stream


def random_kernel(rng: np.random.Generator, dim: int = 2) -> SeparableKernel:
    """Random squared- or power-exponential factors on the unit interval."""
    factors = []
    for _ in range(dim):
        family = "sqexp" if rng.uniform() < 0.5 else "powexp"
        factors.append(Kernel1D(
            family=family,
            variance=float(rng.uniform(0.5, 2.0)),
            length_scale=float(rng.uniform(0.5, 3.0)),
            exponent=float(rng.uniform(0.5, 2.0)) if family == "powexp" else 2.0,
        ))
    return SeparableKernel(tuple(factors))


def regression_augmented(kernel: SeparableKernel, variance: float) -> EmulatorPrior:
    """Prior with uncertain linear regression terms on top of the separable residual."""
    return EmulatorPrior(RegressionPrior.of(standard_regressors(kernel.dim, ("linear",)), variance=variance), kernel)


def _scale(kernel: SeparableKernel, geometries: np.ndarray) -> np.ndarray:
    lo = np.array([d.lo for d in kernel.domains] * 2)
    width = np.array([d.width for d in kernel.domains] * 2)
    return lo + geometries * width


def worst_conditional_covariance(cov, geometries: np.ndarray) -> tuple[float, float]:
    """Max |cov{F(x, y), F(x', y') | F(x', y)}| over rows (x, y, x', y'), and the largest jitter used."""
    worst = max_jitter = 0.0
    for x, y, x2, y2 in geometries:
        value, jitter = conditional_covariance(cov, [x, y], [x2, y2], [[x2, y]], return_jitter=True)
        worst = max(worst, abs(value))
        max_jitter = max(max_jitter, jitter)
    return worst, max_jitter


class ConditionalCovarianceSuite:
    """Zero conditional covariance under separability, non-zero without it."""

    name = "eq4"
    description = "cov{F(x,y), F(x',y') | F(x',y)} = 0 for separable kernels"

    def run(self, config: dict[str, Any], seed: int, n_jobs: int | None = None) -> list[CheckResult]:
        n_geometries = int(config.get("configurations", 200))
        n_kernels = int(config.get("kernels", 5))
        tol = float(config.get("tol", 1e-10))
        regression_variance = float(config.get("regression_variance", 0.0))
        threshold = float(config.get("counterexample_threshold", 1e-3))

        rng = stream(seed, "check", 4)
        if "kernel" in config:
            kernels = [kernel_from_dict(config["kernel"])]
        else:
            kernels = [random_kernel(rng) for _ in range(n_kernels)]
        geometries = rng.uniform(size=(n_geometries, 4))

        results = []
        for index, kernel in enumerate(kernels):
            scaled = _scale(kernel, geometries)
            if regression_variance > 0:
                augmented = regression_augmented(kernel, regression_variance)
                worst, jitter = worst_conditional_covariance(augmented, scaled)
                result = at_most(f"conditional_covariance[{index}]", worst, tol, configurations=n_geometries,
                                 regression_variance=regression_variance, max_jitter=jitter)
                result.expected_failure = True
                result.detail["reason"] = "regression terms make the prior covariance non-separable"
                results.append(result)
                continue
            worst, jitter = worst_conditional_covariance(kernel, scaled)
            results.append(at_most(f"conditional_covariance[{index}]", worst, tol, configurations=n_geometries,
                                   max_jitter=jitter))

        counter_geometries = _scale(kernels[0], geometries[:20])
        counter, _ = worst_conditional_covariance(regression_augmented(kernels[0], 1.0), counter_geometries)
        results.append(above("nonseparable_counterexample", counter, threshold, regression_variance=1.0))
        return results
