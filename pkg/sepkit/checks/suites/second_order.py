"""
Second-order checks: k-th-order uncorrelation and the product process.

The KL sampler and the product sampler must share a covariance function
while the product sampler's values are visibly non-Gaussian.
"""

from typing import Any

import numpy as np

from checks.router import CheckResult, above, at_most
from kernels.core import Kernel1D
from second_order.moments import SampleFamily, check_uncorrelated
from second_order.products import distribution_diagnostics, product_sample_batch, second_order_identical_check
from spectral.basis import ProductBasis
from spectral.karhunen_loeve import kl_sample_batch
from utils.streams import stream

CHECK_PAIRS = (
    ((0.1, 0.2), (0.1, 0.2)),
    ((0.1, 0.2), (0.4, 0.3)),
    ((0.5, 0.5), (0.6, 0.9)),
    ((0.9, 0.1), (0.2, 0.8)),
    ((0.3, 0.7), (0.35, 0.75)),
    ((0.0, 1.0), (1.0, 0.0)),
)


class SecondOrderSuite:
    name = "second_order"
    description = "Order-k uncorrelation and second-order identity of the product process"

    def run(self, config: dict[str, Any], seed: int, n_jobs: int | None = None) -> list[CheckResult]:
        draws = int(config.get("draws", 100_000))
        samples = int(config.get("samples", 4000))
        kurtosis_draws = int(config.get("kurtosis_draws", 400_000))
        results = []

        z = stream(seed, "check", 6).standard_normal(draws)
        squared = check_uncorrelated(SampleFamily.of(Z=z), SampleFamily.of(Y=z**2 - 1), 2, n_jobs=n_jobs)
        results.append(CheckResult(
            "first_order_uncorrelated", squared.passes[0], squared.worst_by_order[0], squared.tol, "<=",
            {"draws": draws},
        ))
        results.append(above("second_order_violated", squared.worst_by_order[1], squared.tol,
                             **squared.to_dict()))

        independent = stream(seed, "check", 7).standard_normal((draws, 2))
        fourth = check_uncorrelated(SampleFamily.of(X=independent[:, 0]), SampleFamily.of(Y=independent[:, 1]), 4,
                                    n_jobs=n_jobs)
        results.append(at_most("independent_fourth_order", fourth.worst_violation, fourth.tol, **fourth.to_dict()))

        sqexp = Kernel1D("sqexp", 1.0, 1.0)
        pb = ProductBasis.from_kernels((sqexp, sqexp))
        identical = second_order_identical_check(pb, samples, CHECK_PAIRS, seed, n_jobs=n_jobs)
        worst = max(pc.discrepancy / pc.band if pc.band else 0.0 for pc in identical.pairs)
        results.append(CheckResult("second_order_identical", identical.passed, worst, 1.0, "<=", identical.to_dict()))

        rank_one = ProductBasis(pb.bases, 1)
        point = np.array([0.5, 0.5])
        product = distribution_diagnostics(product_sample_batch(rank_one, seed, kurtosis_draws, n_jobs=n_jobs), point)
        gaussian = distribution_diagnostics(kl_sample_batch(rank_one, seed, kurtosis_draws, n_jobs=n_jobs), point)
        results.append(at_most("product_kurtosis_near_9", abs(product.kurtosis - 9.0), 0.5,
                               kurtosis=product.kurtosis, samples=kurtosis_draws))
        results.append(at_most("kl_kurtosis_near_3", abs(gaussian.kurtosis - 3.0), 0.1,
                               kurtosis=gaussian.kurtosis, samples=kurtosis_draws))
        return results
