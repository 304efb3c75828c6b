"""
Kronecker solves on full-grid designs.

On a grid X_1 x ... x X_p (points in C order, last axis fastest) the Gram
matrix of a separable kernel is K_1 (x) ... (x) K_p. Each factor is
eigendecomposed once, so a solve costs sum_d n_d^3 + N sum_d n_d instead of
N^3, and factors are reused across right-hand sides.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy import linalg

from kernels.core import SeparableKernel, condition_gram
from utils.errors import NumericalError, ParameterError, ShapeError


@dataclass(frozen=True, eq=False)
class GridDesign:
    """Cartesian product of strictly increasing per-axis point sets."""
    axis_points: tuple[np.ndarray, ...]

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float).reshape(-1) for a in self.axis_points)
        if not axes or any(a.size == 0 for a in axes):
            raise ShapeError("GridDesign needs at least one non-empty axis")
        for d, a in enumerate(axes):
            if np.unique(a).size != a.size:
                raise ShapeError(f"Grid axis {d} points must be distinct")
            if a.size > 1 and np.min(np.diff(a)) < 0:
                raise ParameterError(f"Grid axis {d} points must be increasing, got {a.tolist()}")
        object.__setattr__(self, "axis_points", axes)

    @property
    def dim(self) -> int:
        return len(self.axis_points)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.axis_points)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def points(self) -> np.ndarray:
        return np.array(list(itertools.product(*self.axis_points)), dtype=float).reshape(self.size, self.dim)


def kron_mvprod(mats: list[np.ndarray], tensor: np.ndarray) -> np.ndarray:
    """Apply (A_1 (x) ... (x) A_p) to a tensor shaped like the grid."""
    for d, a in enumerate(mats):
        tensor = np.moveaxis(np.tensordot(a, tensor, axes=([1], [d])), 0, d)
    return tensor


class KroneckerSolver:
    """Eigendecomposed grid Gram, solving K z = b for any number of b."""

    def __init__(self, grid: GridDesign, kernel: SeparableKernel):
        if grid.dim != kernel.dim:
            raise ShapeError(f"Grid has {grid.dim} axes, kernel has {kernel.dim} factors")
        self.grid = grid
        self.kernel = kernel
        self.jitters: list[float] = []
        vectors, values = [], []
        for d, (factor, axis) in enumerate(zip(kernel.factors, grid.axis_points, strict=True)):
            k_d, jitter = condition_gram(factor.matrix(axis, axis))
            w, q = linalg.eigh(k_d)
            if w[0] <= 0:
                raise NumericalError(
                    f"Grid factor {d} is singular: worst eigenvalue {w[0]:.3e} with jitter {jitter:.3e}",
                    worst_eigenvalue=float(w[0]),
                    jitter=jitter,
                )
            self.jitters.append(jitter)
            vectors.append(q)
            values.append(w)
        self._vectors = vectors
        self._vectors_t = [q.T for q in vectors]
        self._spectrum = values[0]
        for w in values[1:]:
            self._spectrum = np.multiply.outer(self._spectrum, w)
        logger.debug(f"Kronecker factors ready for grid {grid.shape}")

    def solve(self, rhs) -> np.ndarray:
        """Solve against one right-hand side (N,) or several stacked as (N, k)."""
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.grid.size:
            raise ShapeError(f"Right-hand side has {rhs.shape[0]} rows, grid has {self.grid.size} points")
        if rhs.ndim == 2:
            return np.column_stack([self.solve(rhs[:, j]) for j in range(rhs.shape[1])])
        t = kron_mvprod(self._vectors_t, rhs.reshape(self.grid.shape))
        t = kron_mvprod(self._vectors, t / self._spectrum)
        return t.reshape(-1)

    def gram(self) -> np.ndarray:
        """Dense Kronecker Gram (for checks on small grids)."""
        out = np.ones((1, 1))
        for factor, axis in zip(self.kernel.factors, self.grid.axis_points, strict=True):
            out = np.kron(out, factor.matrix(axis, axis))
        return out


def kron_solve(grid: GridDesign, kernel: SeparableKernel, rhs) -> np.ndarray:
    """Solve (K_1 (x) ... (x) K_p) z = rhs for a full-grid design."""
    return KroneckerSolver(grid, kernel).solve(rhs)
