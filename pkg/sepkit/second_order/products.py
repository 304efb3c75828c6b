"""
Products of second-order uncorrelated processes.

Replacing every Z_ij of a KL field by Z_i Z'_j, with {Z_i} and {Z'_j}
orthonormal and mutually independent, gives

    F(x, y) = ( sum_i Z_i g_i(x) ) ( sum_j Z'_j h_j(y) )

which has the same mean and (separable) covariance as the KL field but a
different distribution: with Gaussian coefficients it is not Gaussian.
"""

from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import stats

from kernels.core import SeparableKernel, eval_separable
from spectral.basis import ProductBasis, SpectralBasis, theoretical_covariance
from spectral.karhunen_loeve import draw_chunked, kl_sample_batch
from utils.errors import ParameterError, SampleSizeError
from utils.helpers import setting


@dataclass(frozen=True, eq=False)
class ProductField:
    """One realization F_x(x) F_y(y) (or its p-factor generalization)."""
    product_basis: ProductBasis
    factor_coefficients: tuple[np.ndarray, ...]  # Z_i, Z'_j, ...

    @property
    def basis_x(self) -> SpectralBasis:
        return self.product_basis.basis_x

    @property
    def basis_y(self) -> SpectralBasis:
        return self.product_basis.basis_y

    @property
    def coeffs_x(self) -> np.ndarray:
        return self.factor_coefficients[0]

    @property
    def coeffs_y(self) -> np.ndarray:
        return self.factor_coefficients[1]

    @property
    def truncation(self) -> int:
        return self.product_basis.truncation

    def factor_values(self, d: int, x) -> np.ndarray:
        """The 1-D process of dimension d at points x."""
        return self.product_basis.scaled(d, x) @ self.factor_coefficients[d]

    def evaluate(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, self.product_basis.dim)
        out = np.ones(points.shape[0])
        for d in range(self.product_basis.dim):
            out *= self.factor_values(d, points[:, d])
        return out

    def __call__(self, *coords: float) -> float:
        return float(self.evaluate(np.array([coords]))[0])

    def evaluate_grid(self, *axes) -> np.ndarray:
        out = np.ones(())
        for d, axis in enumerate(axes):
            out = np.multiply.outer(out, self.factor_values(d, axis))
        return out

    @property
    def coefficient_tensor(self) -> np.ndarray:
        """The implied KL coefficients Z_i Z'_j (a rank-one tensor)."""
        out = np.ones(())
        for z in self.factor_coefficients:
            out = np.multiply.outer(out, z)
        return out


@dataclass(frozen=True, eq=False)
class ProductFieldBatch:
    """Stacked product realizations sharing one product basis."""
    product_basis: ProductBasis
    factor_coefficients: tuple[np.ndarray, ...]  # each (count, n)

    def __len__(self) -> int:
        return int(self.factor_coefficients[0].shape[0])

    def __getitem__(self, index: int) -> ProductField:
        return ProductField(self.product_basis, tuple(z[index] for z in self.factor_coefficients))

    def __iter__(self) -> Iterator[ProductField]:
        return (self[i] for i in range(len(self)))

    def values_at(self, points) -> np.ndarray:
        """Values of every field at (N, p) points, shape (count, N)."""
        mats = self.product_basis.design_matrices(points)
        out = np.ones((len(self), mats[0].shape[0]))
        for z, g in zip(self.factor_coefficients, mats, strict=True):
            out *= z @ g.T
        return out


def product_sample_batch(pb: ProductBasis, rng_seed: int, count: int,
                         laws: Sequence[str] | str = "gaussian",
                         n_jobs: int | None = None) -> ProductFieldBatch:
    """
    Draw `count` product fields; each factor's coefficients come from its own
    stream, so the families are independent (hence uncorrelated at every order).
    """
    if count < 0:
        raise ParameterError(f"count must be >= 0, got {count}")
    laws = [laws] * pb.dim if isinstance(laws, str) else list(laws)
    if len(laws) != pb.dim:
        raise ParameterError(f"{len(laws)} coefficient laws for {pb.dim} factors")
    coefficients = []
    for d, law in enumerate(laws):
        z = draw_chunked(rng_seed, ("product", d), count, (pb.truncation,), law, n_jobs)
        z.flags.writeable = False
        coefficients.append(z)
    return ProductFieldBatch(pb, tuple(coefficients))


def product_sample(basis_x: SpectralBasis, basis_y: SpectralBasis, truncation: int, rng_seed: int,
                   count: int, law_x: str = "gaussian", law_y: str | None = None,
                   n_jobs: int | None = None) -> list[ProductField]:
    """List of 2-D product fields (Z_ij -> Z_i Z'_j substitution)."""
    pb = ProductBasis((basis_x, basis_y), truncation)
    return list(product_sample_batch(pb, rng_seed, count, (law_x, law_y or law_x), n_jobs))


@dataclass
class DistributionDiagnostics:
    skewness: float
    kurtosis: float
    n_samples: int

    def to_dict(self) -> dict[str, Any]:
        return {"skewness": self.skewness, "kurtosis": self.kurtosis, "n_samples": self.n_samples}


def _values_at(fields, points: np.ndarray) -> np.ndarray:
    if hasattr(fields, "values_at"):
        return fields.values_at(points)
    return np.array([f.evaluate(points) for f in fields])


def distribution_diagnostics(fields, point) -> DistributionDiagnostics:
    """
    Sample skewness and (Pearson, non-excess) kurtosis of field values at a query point.

    Accepts a list of KLField/ProductField or a batch.

    Raises:
        SampleSizeError: fewer fields than [second_order] min_diagnostic_samples
    """
    minimum = int(setting("second_order", "min_diagnostic_samples"))
    if len(fields) < minimum:
        raise SampleSizeError(f"Need at least {minimum} fields for diagnostics, got {len(fields)}")
    values = _values_at(fields, np.atleast_2d(np.asarray(point, dtype=float)))[:, 0]
    return DistributionDiagnostics(
        skewness=float(stats.skew(values)),
        kurtosis=float(stats.kurtosis(values, fisher=False)),
        n_samples=int(values.size),
    )


@dataclass
class PairCheck:
    """Covariance comparison at one check pair."""
    p: tuple[float, ...]
    q: tuple[float, ...]
    exact: float
    theoretical_kl: float
    theoretical_product: float
    empirical_kl: float
    se_kl: float
    empirical_product: float
    se_product: float
    tol: float

    @property
    def discrepancy(self) -> float:
        return abs(self.empirical_kl - self.empirical_product)

    @property
    def band(self) -> float:
        return self.tol * float(np.hypot(self.se_kl, self.se_product))

    @property
    def passed(self) -> bool:
        return (
            self.discrepancy <= self.band
            and abs(self.empirical_kl - self.exact) <= self.tol * self.se_kl
            and abs(self.empirical_product - self.exact) <= self.tol * self.se_product
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": list(self.p),
            "q": list(self.q),
            "exact": self.exact,
            "theoretical_kl": self.theoretical_kl,
            "theoretical_product": self.theoretical_product,
            "empirical_kl": self.empirical_kl,
            "se_kl": self.se_kl,
            "empirical_product": self.empirical_product,
            "se_product": self.se_product,
            "discrepancy": self.discrepancy,
            "band": self.band,
            "pass": self.passed,
        }


@dataclass
class IdenticalCheckReport:
    pairs: list[PairCheck]
    n_samples: int

    @property
    def passed(self) -> bool:
        return all(pc.passed for pc in self.pairs)

    def to_dict(self) -> dict[str, Any]:
        return {"n_samples": self.n_samples, "pass": self.passed, "pairs": [pc.to_dict() for pc in self.pairs]}


def _mc_covariance(values: np.ndarray, i: int, j: int) -> tuple[float, float]:
    """Covariance of a centred process from samples, with its MC standard error."""
    prods = values[:, i] * values[:, j]
    return float(prods.mean()), float(prods.std(ddof=1) / np.sqrt(prods.size))


def second_order_identical_check(pb: ProductBasis, n_samples: int, point_pairs, rng_seed: int = 0,
                                 product_truncation: int | None = None, law: str = "gaussian",
                                 tol: float | None = None, n_jobs: int | None = None) -> IdenticalCheckReport:
    """
    Compare empirical covariances of the KL sampler and the product sampler,
    each against the other and against the exact separable kernel.

    Args:
        pb: product basis for the KL sampler
        n_samples: draws per sampler
        point_pairs: sequence of (p, q) point pairs
        product_truncation: truncation for the product sampler (default pb.truncation)
    """
    tol = float(setting("second_order", "tol") if tol is None else tol)
    pairs = [(np.asarray(p, dtype=float).ravel(), np.asarray(q, dtype=float).ravel()) for p, q in point_pairs]
    points = np.array([pt for pair in pairs for pt in pair])
    kernel = SeparableKernel(tuple(b.kernel for b in pb.bases))
    pb_product = ProductBasis(pb.bases, product_truncation or pb.truncation)

    kl_values = kl_sample_batch(pb, rng_seed, n_samples, law, n_jobs).values_at(points)
    product_values = product_sample_batch(pb_product, rng_seed, n_samples, law, n_jobs).values_at(points)

    checks = []
    for index, (p, q) in enumerate(pairs):
        i, j = 2 * index, 2 * index + 1
        emp_kl, se_kl = _mc_covariance(kl_values, i, j)
        emp_prod, se_prod = _mc_covariance(product_values, i, j)
        checks.append(PairCheck(
            p=tuple(p.tolist()),
            q=tuple(q.tolist()),
            exact=eval_separable(kernel, p, q),
            theoretical_kl=theoretical_covariance(pb, p, q),
            theoretical_product=theoretical_covariance(pb_product, p, q),
            empirical_kl=emp_kl,
            se_kl=se_kl,
            empirical_product=emp_prod,
            se_product=se_prod,
            tol=tol,
        ))
    return IdenticalCheckReport(checks, n_samples)
