"""
Second-order package - k-th-order uncorrelation checks and product processes.
"""

from .moments import (
    SampleFamily,
    UncorrelationReport,
    check_uncorrelated,
    exponent_tuples,
    jackknife_covariance,
    monomial_count,
)
from .products import (
    DistributionDiagnostics,
    IdenticalCheckReport,
    PairCheck,
    ProductField,
    ProductFieldBatch,
    distribution_diagnostics,
    product_sample,
    product_sample_batch,
    second_order_identical_check,
)

__all__ = [
    "SampleFamily",
    "UncorrelationReport",
    "check_uncorrelated",
    "exponent_tuples",
    "jackknife_covariance",
    "monomial_count",
    "ProductField",
    "ProductFieldBatch",
    "product_sample",
    "product_sample_batch",
    "DistributionDiagnostics",
    "distribution_diagnostics",
    "PairCheck",
    "IdenticalCheckReport",
    "second_order_identical_check",
]
