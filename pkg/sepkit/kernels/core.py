"""
Kernel Core - 1-D covariance kernels and their separable products.

A separable kernel on p inputs is the product of p one-dimensional kernels:

    kappa((x_1..x_p), (x'_1..x'_p)) = prod_d kappa_d(x_d, x'_d)

Families (per factor, theta = length_scale, h = x - x'):
  - sqexp:    variance * exp(-(theta * h)^2)
  - powexp:   variance * exp(-|theta * h|^alpha), 0 < alpha <= 2
  - constant: variance

Kernels are frozen dataclasses, so evaluation is pure and thread-safe.
"""

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Protocol

import numpy as np
from loguru import logger
from scipy import linalg

from utils.errors import DomainError, ParameterError, ShapeError
from utils.helpers import setting

FAMILIES = ("sqexp", "powexp", "constant")


@dataclass(frozen=True)
class Interval:
    """Closed, bounded interval [lo, hi] housing one input."""
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
            raise DomainError(f"Interval needs finite lo < hi, got [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, values) -> np.ndarray:
        slack = 1e-12 * self.width
        values = np.asarray(values, dtype=float)
        return (values >= self.lo - slack) & (values <= self.hi + slack)

    def check(self, values) -> np.ndarray:
        """Return values as a float array, raising DomainError if any fall outside."""
        values = np.asarray(values, dtype=float)
        inside = self.contains(values)
        if not np.all(inside):
            bad = values[~inside].ravel()[0]
            raise DomainError(f"Point {bad} outside [{self.lo}, {self.hi}]")
        return values


@dataclass(frozen=True)
class Kernel1D:
    """One-dimensional stationary kernel on a closed interval."""
    family: str = "sqexp"
    variance: float = 1.0
    length_scale: float = 1.0
    domain: Interval = field(default_factory=Interval)
    exponent: float = 2.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"Unknown kernel family '{self.family}', expected one of {FAMILIES}")
        if not self.variance > 0:
            raise ParameterError(f"variance must be > 0, got {self.variance}")
        if not self.length_scale > 0:
            raise ParameterError(f"length_scale must be > 0, got {self.length_scale}")
        if self.family == "powexp" and not 0 < self.exponent <= 2:
            raise ParameterError(f"powexp exponent must lie in (0, 2], got {self.exponent}")
        if isinstance(self.domain, (tuple, list)):
            object.__setattr__(self, "domain", Interval(*self.domain))
        object.__setattr__(self, "variance", float(self.variance))
        object.__setattr__(self, "length_scale", float(self.length_scale))
        object.__setattr__(self, "exponent", float(self.exponent))

    def correlation(self, x, x2) -> np.ndarray:
        """Correlation for broadcastable arrays, no domain check."""
        h = np.asarray(x, dtype=float) - np.asarray(x2, dtype=float)
        if self.family == "sqexp":
            return np.exp(-(self.length_scale * h) ** 2)
        if self.family == "powexp":
            return np.exp(-np.abs(self.length_scale * h) ** self.exponent)
        return np.ones_like(h)

    def matrix(self, a, b, check: bool = True) -> np.ndarray:
        """Cross-covariance matrix between 1-D point vectors a (N) and b (M)."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if check:
            self.domain.check(a)
            self.domain.check(b)
        return self.variance * self.correlation(a[:, None], b[None, :])

    def __call__(self, x: float, x2: float) -> float:
        return eval_1d(self, x, x2)


class Covariance(Protocol):
    """Structural type for covariance functions on p-dimensional points."""
    dim: int

    def cross(self, a, b) -> np.ndarray: ...


@dataclass(frozen=True)
class SeparableKernel:
    """
    Product of p one-dimensional kernels.

    The product of the factor variances is stored on the first factor and the
    remaining factors carry variance 1; any input split is accepted.
    """
    factors: tuple[Kernel1D, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ParameterError("SeparableKernel needs at least one factor")
        total = math.prod(f.variance for f in factors)
        canonical = (replace(factors[0], variance=total),) + tuple(
            replace(f, variance=1.0) for f in factors[1:]
        )
        object.__setattr__(self, "factors", canonical)

    @property
    def dim(self) -> int:
        return len(self.factors)

    @property
    def total_variance(self) -> float:
        return self.factors[0].variance

    @property
    def domains(self) -> tuple[Interval, ...]:
        return tuple(f.domain for f in self.factors)

    def as_points(self, pts, check: bool = True) -> np.ndarray:
        """Coerce to an (N, p) array, validating dimension and domains."""
        pts = np.asarray(pts, dtype=float)
        if pts.size == 0:
            return np.empty((0, self.dim))
        if pts.ndim == 0:
            pts = pts.reshape(1, 1)
        if pts.ndim == 1:
            # a flat vector is one point, or a list of scalars for 1-D kernels
            pts = pts[None, :] if pts.size == self.dim else pts[:, None]
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ShapeError(f"Points must have {self.dim} coordinates, got shape {pts.shape}")
        if check:
            for d, f in enumerate(self.factors):
                f.domain.check(pts[:, d])
        return pts

    def cross(self, a, b, check: bool = True) -> np.ndarray:
        """Cross-covariance matrix between point sets a (N, p) and b (M, p)."""
        a = self.as_points(a, check)
        b = self.as_points(b, check)
        out = np.ones((a.shape[0], b.shape[0]))
        for d, f in enumerate(self.factors):
            out *= f.matrix(a[:, d], b[:, d], check=False)
        return out

    def __call__(self, p, q) -> float:
        return eval_separable(self, p, q)


def eval_1d(k: Kernel1D, x: float, x2: float) -> float:
    """Evaluate a 1-D kernel at two in-domain points."""
    k.domain.check([x, x2])
    return float(k.variance * k.correlation(x, x2))


def eval_separable(k: SeparableKernel, p, q) -> float:
    """Evaluate a separable kernel at two points (product of factor values)."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.size != k.dim or q.size != k.dim:
        raise ShapeError(f"Kernel has {k.dim} dimensions, points have {p.size} and {q.size}")
    return float(k.cross(p[None, :], q[None, :])[0, 0])


def gram(k: SeparableKernel, pts) -> np.ndarray:
    """Symmetric Gram matrix of k over a point list."""
    pts = k.as_points(pts)
    return k.cross(pts, pts, check=False)


def cross_gram(k: SeparableKernel, a, b) -> np.ndarray:
    """Cross-covariance matrix between two point lists."""
    return k.cross(a, b)


def min_eigenvalue_ratio(matrix: np.ndarray) -> float:
    """Smallest eigenvalue divided by the largest diagonal entry."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return 0.0
    scale = float(np.max(np.diag(matrix)))
    return float(linalg.eigvalsh(0.5 * (matrix + matrix.T))[0] / scale) if scale > 0 else 0.0


def is_psd(matrix: np.ndarray, tol: float | None = None) -> bool:
    """True if min eigenvalue >= -tol * max diagonal."""
    tol = setting("kernel", "tol_psd") if tol is None else tol
    return min_eigenvalue_ratio(matrix) >= -tol


def condition_gram(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """
    Add diagonal jitter when the condition number exceeds the configured limit.

    Returns:
        (possibly jittered copy, jitter added)
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return matrix, 0.0
    if np.linalg.cond(matrix) <= setting("kernel", "condition_limit"):
        return matrix, 0.0
    jitter = setting("kernel", "jitter_scale") * float(np.max(np.diag(matrix)))
    logger.debug(f"Conditioning Gram ill-conditioned, adding jitter {jitter:.3e}")
    return matrix + jitter * np.eye(matrix.shape[0]), jitter


# -- JSON serialization --

def factor_to_dict(f: Kernel1D) -> dict[str, Any]:
    data = {
        "family": f.family,
        "variance": f.variance,
        "length_scale": f.length_scale,
        "domain": [f.domain.lo, f.domain.hi],
    }
    if f.family == "powexp":
        data["exponent"] = f.exponent
    return data


def factor_from_dict(data: dict[str, Any]) -> Kernel1D:
    try:
        lo, hi = data.get("domain", [0.0, 1.0])
        return Kernel1D(
            family=data.get("family", "sqexp"),
            variance=float(data.get("variance", 1.0)),
            length_scale=float(data.get("length_scale", 1.0)),
            domain=Interval(lo, hi),
            exponent=float(data.get("exponent", 2.0)),
        )
    except (TypeError, ValueError) as e:
        if isinstance(e, ParameterError | DomainError):
            raise
        raise ParameterError(f"Malformed kernel factor {data!r}: {e}") from e


def kernel_to_dict(k: SeparableKernel) -> dict[str, Any]:
    return {"factors": [factor_to_dict(f) for f in k.factors]}


def kernel_from_dict(data: dict[str, Any]) -> SeparableKernel:
    factors = data.get("factors") if isinstance(data, dict) else None
    if not isinstance(factors, list) or not factors:
        raise ParameterError("Kernel spec needs a non-empty 'factors' list")
    return SeparableKernel(tuple(factor_from_dict(f) for f in factors))


def kernel_to_json(k: SeparableKernel) -> str:
    return json.dumps(kernel_to_dict(k))


def kernel_from_json(text: str) -> SeparableKernel:
    return kernel_from_dict(json.loads(text))
