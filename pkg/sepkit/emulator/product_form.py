"""
Product-form emulator for one-factor-at-a-time designs.

Along each axis sweep through the base point the function is fitted with a
1-D emulator f_d(x_d). A product-form prediction is

    f(x) ~ prod_d f_d(x_d) / f(base)^(p - 1)

which is exact when f itself factorizes across inputs.
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger

from emulator.posterior import EmulatorPosterior, RunEnsemble, fit
from emulator.prior import EmulatorPrior, RegressionPrior, constant_regressor
from kernels.core import SeparableKernel
from utils.errors import NumericalError, ParameterError


@dataclass(frozen=True, eq=False)
class ProductFormEmulator:
    base_point: np.ndarray
    base_value: float
    axis_posteriors: tuple[EmulatorPosterior, ...]

    @property
    def dim(self) -> int:
        return len(self.axis_posteriors)

    def predict_mean(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.ones(points.shape[0])
        for d, post in enumerate(self.axis_posteriors):
            out *= post.predict(points[:, d : d + 1]).mean
        return out / self.base_value ** (self.dim - 1)


def fit_product_form(kernel: SeparableKernel, ensemble: RunEnsemble, base_point) -> ProductFormEmulator:
    """
    Fit per-axis emulators to a one-factor-at-a-time ensemble.

    Raises:
        ParameterError: the base point is not a run, or an axis has under 2 runs
        NumericalError: the function vanishes at the base point
    """
    base = np.asarray(base_point, dtype=float).reshape(-1)
    design, values = ensemble.design, ensemble.values
    at_base = np.all(np.abs(design - base) <= 1e-12, axis=1)
    if not at_base.any():
        raise ParameterError("Product-form fit needs a run at the base point")
    base_value = float(values[at_base][0])
    if abs(base_value) < 1e-300:
        raise NumericalError("Function vanishes at the base point", worst_eigenvalue=0.0, jitter=0.0)

    posteriors = []
    for d, factor in enumerate(kernel.factors):
        others = np.delete(np.arange(kernel.dim), d)
        on_axis = np.all(np.abs(design[:, others] - base[others]) <= 1e-12, axis=1)
        if on_axis.sum() < 2:
            raise ParameterError(f"Axis {d} sweep has {int(on_axis.sum())} runs, need at least 2")
        prior = EmulatorPrior(
            RegressionPrior.of((constant_regressor(),)),
            SeparableKernel((factor,)),
            plug_in_mean=True,
        )
        posteriors.append(fit(prior, RunEnsemble(design[on_axis, d : d + 1], values[on_axis])))
    logger.debug(f"Product-form emulator fitted on {ensemble.size} runs across {kernel.dim} axes")
    return ProductFormEmulator(base, base_value, tuple(posteriors))
