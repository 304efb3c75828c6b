"""
Emulator package - Bayesian emulation with separable residuals.

Modules:
- prior: regressors, coefficient prior, regression-plus-residual prior
- posterior: run ensembles, fitting, prediction, reports
- grid: Kronecker solves on full-grid designs
- separability: distance of a covariance matrix from a Kronecker product
- product_form: per-axis emulators multiplied together
"""

from emulator.grid import GridDesign, KroneckerSolver, kron_mvprod, kron_solve
from emulator.posterior import (
    EmulatorPosterior,
    Prediction,
    RunEnsemble,
    fit,
    posterior_report,
    predict,
    prior_reversion,
    write_posterior_csv,
    write_posterior_report,
)
from emulator.prior import (
    EmulatorPrior,
    RegressionPrior,
    Regressor,
    constant_regressor,
    interaction_regressor,
    linear_regressor,
    standard_regressors,
)
from emulator.product_form import ProductFormEmulator, fit_product_form
from emulator.separability import nearest_kronecker, separability_residual

__all__ = [
    "EmulatorPosterior",
    "EmulatorPrior",
    "GridDesign",
    "KroneckerSolver",
    "Prediction",
    "ProductFormEmulator",
    "RegressionPrior",
    "Regressor",
    "RunEnsemble",
    "constant_regressor",
    "fit",
    "fit_product_form",
    "interaction_regressor",
    "kron_mvprod",
    "kron_solve",
    "linear_regressor",
    "nearest_kronecker",
    "posterior_report",
    "predict",
    "prior_reversion",
    "separability_residual",
    "standard_regressors",
    "write_posterior_csv",
    "write_posterior_report",
]
