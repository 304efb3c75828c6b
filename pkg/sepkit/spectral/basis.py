"""
Mercer eigenpairs of 1-D kernels by the Nystrom method.

The kernel operator on [lo, hi] is discretized on Gauss-Legendre nodes x_k
with weights w_k. The symmetric matrix W^1/2 K W^1/2 is diagonalized and
eigenfunctions are extended off the nodes by

    psi_i(x) = (1 / lambda_i) sum_k w_k kappa(x, x_k) psi_i(x_k)

so that sum_k w_k psi_i(x_k) psi_j(x_k) = delta_ij.
"""

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from loguru import logger
from numpy.polynomial.legendre import leggauss
from scipy import linalg

from kernels.core import Kernel1D
from utils.errors import NumericalError, ParameterError, ShapeError, TruncationError
from utils.helpers import setting


def _frozen(array) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Retained eigenpairs of one 1-D kernel (eigenvalues descending)."""
    kernel: Kernel1D
    nodes: np.ndarray
    weights: np.ndarray
    eigenvalues: np.ndarray
    node_eigenvectors: np.ndarray  # (m, rank): psi_i at the nodes

    @property
    def rank(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def m(self) -> int:
        return int(self.nodes.size)

    def eigenfunctions(self, x, n: int | None = None) -> np.ndarray:
        """Nystrom-extended psi_1..psi_n at points x, shape (len(x), n)."""
        n = self.rank if n is None else n
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k_x = self.kernel.matrix(x, self.nodes, check=False)
        vecs = self.node_eigenvectors[:, :n] * self.weights[:, None]
        return (k_x @ vecs) / self.eigenvalues[:n]

    def scaled_functions(self, x, n: int) -> np.ndarray:
        """
        g_i = sqrt(lambda_i) psi_i for i = 1..n, shape (len(x), n).

        Columns beyond the rank are zero functions.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        used = min(n, self.rank)
        out = np.zeros((x.size, n))
        out[:, :used] = self.eigenfunctions(x, used) * np.sqrt(self.eigenvalues[:used])
        return out

    def padded_eigenvalues(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        used = min(n, self.rank)
        out[:used] = self.eigenvalues[:used]
        return out

    def padded_node_eigenvectors(self, n: int) -> np.ndarray:
        out = np.zeros((self.m, n))
        used = min(n, self.rank)
        out[:, :used] = self.node_eigenvectors[:, :used]
        return out

    def gram_inner_products(self) -> np.ndarray:
        """<psi_i, psi_j> under the quadrature rule; identity up to round-off."""
        v = self.node_eigenvectors
        return v.T @ (self.weights[:, None] * v)


def gauss_legendre(lo: float, hi: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [lo, hi]."""
    t, w = leggauss(m)
    half = 0.5 * (hi - lo)
    return lo + half * (t + 1.0), half * w


def nystrom_decompose(k: Kernel1D, m: int | None = None, r: int | None = None) -> SpectralBasis:
    """
    Eigen-decompose a 1-D kernel on its interval.

    Args:
        k: kernel to decompose
        m: number of quadrature nodes (default [spectral] nodes)
        r: maximum retained rank (default m)

    Returns:
        SpectralBasis with eigenpairs whose eigenvalue exceeds tol_eig * lambda_1

    Raises:
        ParameterError: m < 4 or r > m
        NumericalError: non-positive weights or failed eigen-solve
    """
    m = int(setting("spectral", "nodes") if m is None else m)
    r = m if r is None else int(r)
    if m < 4:
        raise ParameterError(f"Need at least 4 quadrature nodes, got {m}")
    if not 1 <= r <= m:
        raise ParameterError(f"Rank cutoff must lie in [1, {m}], got {r}")
    return _decompose(k, m, r, float(setting("spectral", "tol_eig")))


@lru_cache(maxsize=64)
def _decompose(k: Kernel1D, m: int, r: int, tol_eig: float) -> SpectralBasis:
    nodes, weights = gauss_legendre(k.domain.lo, k.domain.hi, m)
    if np.any(weights <= 0):
        raise NumericalError("Quadrature produced non-positive weights")

    root_w = np.sqrt(weights)
    gram_nodes = k.matrix(nodes, nodes, check=False)
    operator = root_w[:, None] * gram_nodes * root_w[None, :]
    try:
        values, vectors = linalg.eigh(0.5 * (operator + operator.T))
    except linalg.LinAlgError as e:
        raise NumericalError(f"Eigen-solve failed for {k}: {e}") from e

    order = np.argsort(values)[::-1]
    values, vectors = values[order], vectors[:, order]
    keep = values > tol_eig * values[0]
    keep[r:] = False
    values, vectors = values[keep], vectors[:, keep]
    if values.size == 0:
        raise NumericalError(f"No positive eigenvalues retained for {k}")

    node_values = vectors / root_w[:, None]
    # deterministic sign: largest-magnitude node value positive
    pivots = node_values[np.argmax(np.abs(node_values), axis=0), np.arange(values.size)]
    node_values = node_values * np.where(pivots < 0, -1.0, 1.0)

    logger.debug(f"Nystrom {k.family} theta={k.length_scale}: m={m}, retained rank {values.size}")
    return SpectralBasis(
        kernel=k,
        nodes=_frozen(nodes),
        weights=_frozen(weights),
        eigenvalues=_frozen(values),
        node_eigenvectors=_frozen(node_values),
    )


def mercer_reconstruct(b: SpectralBasis, x, x2, n: int):
    """
    Truncated Mercer sum  sum_{i<=n} lambda_i psi_i(x) psi_i(x').

    Scalars give a float; vectors give the (len(x), len(x')) matrix.

    Raises:
        TruncationError: n < 1 or n above the retained rank
    """
    if not 1 <= n <= b.rank:
        raise TruncationError(f"Truncation {n} outside 1..{b.rank}")
    psi_x = b.eigenfunctions(x, n)
    psi_x2 = b.eigenfunctions(x2, n)
    out = (psi_x * b.eigenvalues[:n]) @ psi_x2.T
    if np.ndim(x) == 0 and np.ndim(x2) == 0:
        return float(out[0, 0])
    return out


@dataclass(frozen=True, eq=False)
class ProductBasis:
    """
    Tensor product of per-dimension spectral bases at a common truncation.

    Bases whose rank is below the truncation are padded with zero functions,
    so a single truncation index runs over every dimension.
    """
    bases: tuple[SpectralBasis, ...]
    truncation: int

    def __post_init__(self):
        bases = tuple(self.bases)
        if not bases:
            raise ShapeError("ProductBasis needs at least one basis")
        if self.truncation < 1:
            raise TruncationError(f"Truncation must be >= 1, got {self.truncation}")
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "truncation", int(self.truncation))
        short = [b.rank for b in bases if b.rank < self.truncation]
        if short:
            logger.debug(f"Padding ranks {short} with zero functions up to {self.truncation}")

    @classmethod
    def from_kernels(cls, kernels, truncation: int | None = None, m: int | None = None) -> "ProductBasis":
        """Decompose each factor kernel and combine (truncation capped at the largest rank)."""
        bases = tuple(nystrom_decompose(k, m) for k in kernels)
        n = int(setting("spectral", "truncation") if truncation is None else truncation)
        return cls(bases, min(n, max(b.rank for b in bases)))

    @property
    def dim(self) -> int:
        return len(self.bases)

    @property
    def basis_x(self) -> SpectralBasis:
        return self.bases[0]

    @property
    def basis_y(self) -> SpectralBasis:
        if self.dim < 2:
            raise ShapeError("basis_y needs a product of at least two bases")
        return self.bases[1]

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.truncation,) * self.dim

    def scaled(self, d: int, x) -> np.ndarray:
        """g-functions of dimension d at x, shape (len(x), truncation)."""
        return self.bases[d].scaled_functions(x, self.truncation)

    def design_matrices(self, points) -> list[np.ndarray]:
        """Per-dimension g-function matrices at (N, p) points."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return [self.scaled(d, points[:, d]) for d in range(self.dim)]


@dataclass(frozen=True, eq=False)
class ProductEigenpair:
    """lambda_i gamma_j ... with handles to the factor eigenfunctions."""
    value: float
    indices: tuple[int, ...]
    product_basis: ProductBasis

    def __call__(self, point) -> float:
        point = np.asarray(point, dtype=float).ravel()
        out = 1.0
        for d, i in enumerate(self.indices):
            basis = self.product_basis.bases[d]
            if i >= basis.rank:
                return 0.0
            out *= float(basis.eigenfunctions(point[d], i + 1)[0, i])
        return out


def product_eigenpairs(pb: ProductBasis) -> list[ProductEigenpair]:
    """All truncation**p product eigenpairs, sorted by descending value."""
    spectra = [b.padded_eigenvalues(pb.truncation) for b in pb.bases]
    pairs = [
        ProductEigenpair(math.prod(spectra[d][i] for d, i in enumerate(idx)), idx, pb)
        for idx in itertools.product(range(pb.truncation), repeat=pb.dim)
    ]
    pairs.sort(key=lambda e: (-e.value, e.indices))
    return pairs


def theoretical_covariance(pb: ProductBasis, p, q) -> float:
    """
    Covariance implied by the truncated spectra:

        prod_d  sum_i g_i(p_d) g_i(q_d)
    """
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.size != pb.dim or q.size != pb.dim:
        raise ShapeError(f"ProductBasis has {pb.dim} dimensions")
    out = 1.0
    for d in range(pb.dim):
        out *= float(pb.scaled(d, p[d])[0] @ pb.scaled(d, q[d])[0])
    return out
