"""Cross-correlation invariance: corr{F(x, y), F(x, y')} does not depend on x."""

import math
from typing import Any

import numpy as np

from checks.router import CheckResult, at_most
from checks.suites.eq4 import random_kernel
from kernels.core import kernel_from_dict
from kernels.properties import cross_correlation
from utils.streams import stream


class CrossCorrelationSuite:
    name = "eq5"
    description = "corr{F(x,y), F(x,y')} is the same for every x"

    def run(self, config: dict[str, Any], seed: int, n_jobs: int | None = None) -> list[CheckResult]:
        n_configs = int(config.get("configurations", 20))
        n_x = int(config.get("x_values", 50))
        tol = float(config.get("tol", 1e-12))

        rng = stream(seed, "check", 5)
        spread, closed_form = 0.0, 0.0
        for _ in range(n_configs):
            kernel = kernel_from_dict(config["kernel"]) if "kernel" in config else random_kernel(rng)
            dx, dy = kernel.domains
            y, y2 = dy.lo + rng.uniform(size=2) * dy.width
            xs = dx.lo + rng.uniform(size=n_x) * dx.width
            values = np.array([cross_correlation(kernel, x, y, y2) for x in xs])
            spread = max(spread, float(values.max() - values.min()))

            ky = kernel.factors[1]
            expected = ky(y, y2) / math.sqrt(ky(y, y) * ky(y2, y2))
            closed_form = max(closed_form, float(np.max(np.abs(values - expected))))

        return [
            at_most("variation_over_x", spread, tol, configurations=n_configs, x_values=n_x),
            at_most("matches_y_factor_correlation", closed_form, tol),
        ]
