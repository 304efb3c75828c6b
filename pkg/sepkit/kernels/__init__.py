"""
Kernels package - 1-D covariance kernels, separable products and their
closed-form second-order properties.
"""

from .core import (
    FAMILIES,
    Covariance,
    Interval,
    Kernel1D,
    SeparableKernel,
    condition_gram,
    cross_gram,
    eval_1d,
    eval_separable,
    gram,
    is_psd,
    kernel_from_dict,
    kernel_from_json,
    kernel_to_dict,
    kernel_to_json,
    min_eigenvalue_ratio,
)
from .properties import conditional_covariance, cross_correlation, isotropy_residual

__all__ = [
    "FAMILIES",
    "Covariance",
    "Interval",
    "Kernel1D",
    "SeparableKernel",
    "eval_1d",
    "eval_separable",
    "gram",
    "cross_gram",
    "is_psd",
    "min_eigenvalue_ratio",
    "condition_gram",
    "kernel_to_dict",
    "kernel_from_dict",
    "kernel_to_json",
    "kernel_from_json",
    "isotropy_residual",
    "conditional_covariance",
    "cross_correlation",
]
