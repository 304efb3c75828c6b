"""Rotation invariance holds only for a common-theta squared exponential product."""

from typing import Any

from checks.router import CheckResult, above, at_most
from kernels.core import Kernel1D, SeparableKernel
from kernels.properties import isotropy_residual


class IsotropySuite:
    name = "isotropy"
    description = "Only sqexp x sqexp with equal theta is invariant under rotation"

    def run(self, config: dict[str, Any], seed: int, n_jobs: int | None = None) -> list[CheckResult]:
        theta = float(config.get("length_scale", 1.0))
        tol = float(config.get("tol", 1e-12))
        threshold = float(config.get("counterexample_threshold", 1e-3))

        common = SeparableKernel((Kernel1D("sqexp", 1.0, theta), Kernel1D("sqexp", 1.0, theta)))
        unequal = SeparableKernel((Kernel1D("sqexp", 1.0, theta), Kernel1D("sqexp", 1.0, 2 * theta)))
        exponential = SeparableKernel((
            Kernel1D("powexp", 1.0, theta, exponent=1.0),
            Kernel1D("powexp", 1.0, theta, exponent=1.0),
        ))
        return [
            at_most("common_theta_sqexp", isotropy_residual(common), tol, length_scale=theta),
            above("unequal_theta_sqexp", isotropy_residual(unequal), threshold, length_scales=[theta, 2 * theta]),
            above("exponential_product", isotropy_residual(exponential), threshold, exponent=1.0),
        ]
