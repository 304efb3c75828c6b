"""
Mercer and Karhunen-Loeve checks on Nystrom bases.

- node Gram recovered at full rank
- check-grid reconstruction error nonincreasing in truncation
- quadrature orthonormality and trace conservation
- KL sample -> projection round trip
"""

from typing import Any

import numpy as np

from checks.router import CheckResult, at_most
from kernels.core import Kernel1D, factor_from_dict
from spectral.basis import ProductBasis, mercer_reconstruct, nystrom_decompose
from spectral.karhunen_loeve import kl_project, kl_sample_batch, quadrature_axes


def reconstruction_errors(kernel: Kernel1D, grid: np.ndarray) -> list[float]:
    """Max |kappa - truncated Mercer sum| over a check grid, for n = 1..rank."""
    b = nystrom_decompose(kernel)
    exact = kernel.matrix(grid, grid)
    return [float(np.max(np.abs(exact - mercer_reconstruct(b, grid, grid, n)))) for n in range(1, b.rank + 1)]


class MercerSuite:
    name = "mercer"
    description = "Nystrom eigenpairs reconstruct the kernel and KL projection inverts sampling"

    def run(self, config: dict[str, Any], seed: int, n_jobs: int | None = None) -> list[CheckResult]:
        spec = config.get("kernel", {"family": "sqexp", "variance": 1.0, "length_scale": 1.0})
        kernel = factor_from_dict(spec["factors"][0] if "factors" in spec else spec)
        n_grid = int(config.get("grid_points", 21))
        slack = float(config.get("monotone_slack", 1e-12))
        b = nystrom_decompose(kernel)

        node_gram = kernel.matrix(b.nodes, b.nodes)
        node_error = float(np.max(np.abs(node_gram - mercer_reconstruct(b, b.nodes, b.nodes, b.rank))))

        grid = np.linspace(kernel.domain.lo, kernel.domain.hi, n_grid)
        errors = reconstruction_errors(kernel, grid)
        worst_increase = max((later - earlier for earlier, later in zip(errors, errors[1:])), default=0.0)

        orthonormality = float(np.max(np.abs(b.gram_inner_products() - np.eye(b.rank))))
        quadrature_trace = float(np.sum(b.weights * kernel.variance))
        trace_error = abs(float(np.sum(b.eigenvalues)) - quadrature_trace) / quadrature_trace

        pb = ProductBasis((b, b), min(int(config.get("truncation", 6)), b.rank))
        field = kl_sample_batch(pb, seed, 1, n_jobs=n_jobs)[0]
        projected = kl_project(field.evaluate_grid(*quadrature_axes(pb)), pb, standardized=True)
        round_trip = float(np.max(np.abs(projected - field.coefficients)))

        return [
            at_most("node_gram_full_rank", node_error, 1e-8, rank=b.rank, nodes=b.m),
            at_most("grid_error_nonincreasing", max(worst_increase, 0.0), slack,
                    errors=errors, grid_points=n_grid),
            at_most("orthonormality", orthonormality, 1e-8),
            at_most("trace_conservation", trace_error, 1e-6, eigenvalue_sum=float(np.sum(b.eigenvalues)),
                    quadrature_trace=quadrature_trace),
            at_most("kl_project_round_trip", round_trip, 1e-6, truncation=pb.truncation),
        ]
