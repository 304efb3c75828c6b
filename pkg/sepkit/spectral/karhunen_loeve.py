"""
Karhunen-Loeve sampling and projection on a product basis.

A sampled field is

    F(x, y) = sum_ij Z_ij g_i(x) h_j(y),   g_i = sqrt(lambda_i) psi_i, h_j = sqrt(gamma_j) phi_j

with Z_ij zero-mean, unit-variance and uncorrelated, generalized to p
dimensions by a coefficient tensor. Projection inverts this on the
tensor quadrature grid:

    Z'_ij = sum_kl w_k w'_l F(x_k, y_l) psi_i(x_k) phi_j(y_l),  E(Z'_ij^2) = lambda_i gamma_j
"""

import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass

import numpy as np

from spectral.basis import ProductBasis
from utils.errors import ParameterError, ShapeError
from utils.streams import parallel_map, stream

# Replicates per RNG stream; streams are keyed (master_seed, *stream_ids, chunk index)
CHUNK = 256


def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape)


def _rademacher(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0


def _uniform(rng: np.random.Generator, shape) -> np.ndarray:
    bound = math.sqrt(3.0)
    return rng.uniform(-bound, bound, size=shape)


# Zero-mean, unit-variance coefficient laws
COEFFICIENT_LAWS: dict[str, Callable[[np.random.Generator, tuple], np.ndarray]] = {
    "gaussian": _gaussian,
    "rademacher": _rademacher,
    "uniform": _uniform,
}


def get_law(name: str) -> Callable[[np.random.Generator, tuple], np.ndarray]:
    try:
        return COEFFICIENT_LAWS[name]
    except KeyError:
        raise ParameterError(f"Unknown coefficient law '{name}', expected one of {sorted(COEFFICIENT_LAWS)}") from None


def draw_chunked(seed: int, stream_ids: tuple, count: int, shape: tuple, law: str,
                 n_jobs: int | None = None) -> np.ndarray:
    """
    Draw `count` coefficient arrays of `shape`, chunked into independent streams.

    Chunk c uses stream(seed, *stream_ids, c); the result depends only on
    (seed, stream_ids, count, shape, law), never on n_jobs.
    """
    sampler = get_law(law)
    starts = list(range(0, count, CHUNK))

    def draw(start: int) -> np.ndarray:
        size = min(CHUNK, count - start)
        return sampler(stream(seed, *stream_ids, start // CHUNK), (size, *shape))

    parts = parallel_map(draw, starts, n_jobs)
    return np.concatenate(parts, axis=0) if parts else np.empty((0, *shape))


def contract(coefficients: np.ndarray, mats: list[np.ndarray]) -> np.ndarray:
    """
    Evaluate sum over multi-indices of coefficients * prod_d mats[d][k, i_d]
    for every row k, where coefficients has shape (n,)*p and mats[d] is (N, n).
    """
    n_points = mats[0].shape[0]
    out = mats[0] @ coefficients.reshape(mats[0].shape[1], -1)
    for g in mats[1:]:
        out = out.reshape(n_points, g.shape[1], -1)
        out = np.einsum("kj,kjr->kr", g, out)
    return out.reshape(n_points)


@dataclass(frozen=True, eq=False)
class KLField:
    """One truncated KL realization F^(n)."""
    product_basis: ProductBasis
    coefficients: np.ndarray  # standardized Z, shape (n,)*p

    def evaluate(self, points) -> np.ndarray:
        """Field values at (N, p) points."""
        return contract(self.coefficients, self.product_basis.design_matrices(points))

    def __call__(self, *coords: float) -> float:
        return float(self.evaluate(np.array([coords]))[0])

    def evaluate_grid(self, *axes) -> np.ndarray:
        """Values on the tensor grid of per-dimension axes, shape (len(a_1), ..., len(a_p))."""
        pb = self.product_basis
        if len(axes) != pb.dim:
            raise ShapeError(f"Need {pb.dim} axes, got {len(axes)}")
        out = self.coefficients
        for d, axis in enumerate(axes):
            out = np.tensordot(out, pb.scaled(d, axis), axes=([0], [1]))
        return out


@dataclass(frozen=True, eq=False)
class KLFieldBatch:
    """Stacked KL realizations sharing one product basis."""
    product_basis: ProductBasis
    coefficients: np.ndarray  # (count, n, ..., n)

    def __len__(self) -> int:
        return int(self.coefficients.shape[0])

    def __getitem__(self, index: int) -> KLField:
        return KLField(self.product_basis, self.coefficients[index])

    def __iter__(self) -> Iterator[KLField]:
        return (self[i] for i in range(len(self)))

    def values_at(self, points) -> np.ndarray:
        """Values of every field at (N, p) points, shape (count, N)."""
        mats = self.product_basis.design_matrices(points)
        n = self.product_basis.truncation
        out = np.einsum("ki,bir->bkr", mats[0], self.coefficients.reshape(len(self), n, -1))
        for g in mats[1:]:
            out = out.reshape(len(self), g.shape[0], n, -1)
            out = np.einsum("kj,bkjr->bkr", g, out)
        return out.reshape(len(self), -1)


def kl_sample_batch(pb: ProductBasis, rng_seed: int, count: int, law: str = "gaussian",
                    n_jobs: int | None = None) -> KLFieldBatch:
    """Draw `count` KL fields with i.i.d. coefficients of the given law."""
    if count < 0:
        raise ParameterError(f"count must be >= 0, got {count}")
    coefficients = draw_chunked(rng_seed, ("kl",), count, pb.shape, law, n_jobs)
    coefficients.flags.writeable = False
    return KLFieldBatch(pb, coefficients)


def kl_sample(pb: ProductBasis, rng_seed: int, count: int, law: str = "gaussian",
              n_jobs: int | None = None) -> list[KLField]:
    """List form of kl_sample_batch."""
    return list(kl_sample_batch(pb, rng_seed, count, law, n_jobs))


def quadrature_axes(pb: ProductBasis) -> tuple[np.ndarray, ...]:
    """The per-dimension nodes on which kl_project expects field values."""
    return tuple(b.nodes for b in pb.bases)


def kl_project(field_values: np.ndarray, pb: ProductBasis, standardized: bool = False) -> np.ndarray:
    """
    Quadrature projection of field values on the tensor node grid.

    Args:
        field_values: array of shape (m_1, ..., m_p) over quadrature_axes(pb)
        pb: product basis supplying nodes, weights and eigenfunctions
        standardized: divide by sqrt(lambda_i gamma_j) to recover Z instead of Z'

    Returns:
        Coefficient tensor of shape (n,)*p; padded directions are zero.

    Raises:
        ShapeError: values not laid out on the basis' quadrature grid
    """
    values = np.asarray(field_values, dtype=float)
    expected = tuple(b.m for b in pb.bases)
    if values.shape != expected:
        raise ShapeError(f"Field values have shape {values.shape}, quadrature grid is {expected}")

    out = values
    for b in pb.bases:
        projector = b.weights[:, None] * b.padded_node_eigenvectors(pb.truncation)
        out = np.tensordot(out, projector, axes=([0], [0]))
    if not standardized:
        return out

    scale = np.ones(pb.shape)
    for d, b in enumerate(pb.bases):
        shape = [1] * pb.dim
        shape[d] = pb.truncation
        scale = scale * np.sqrt(b.padded_eigenvalues(pb.truncation)).reshape(shape)
    return np.divide(out, scale, out=np.zeros_like(out), where=scale > 0)
