"""
Spectral package - Nystrom/Mercer eigenpairs and Karhunen-Loeve fields.
"""

from .basis import (
    ProductBasis,
    ProductEigenpair,
    SpectralBasis,
    gauss_legendre,
    mercer_reconstruct,
    nystrom_decompose,
    product_eigenpairs,
    theoretical_covariance,
)
from .export import basis_to_dict, write_basis_json, write_field_csv
from .karhunen_loeve import (
    COEFFICIENT_LAWS,
    KLField,
    KLFieldBatch,
    draw_chunked,
    kl_project,
    kl_sample,
    kl_sample_batch,
    quadrature_axes,
)

__all__ = [
    "SpectralBasis",
    "ProductBasis",
    "ProductEigenpair",
    "gauss_legendre",
    "nystrom_decompose",
    "mercer_reconstruct",
    "product_eigenpairs",
    "theoretical_covariance",
    "KLField",
    "KLFieldBatch",
    "COEFFICIENT_LAWS",
    "draw_chunked",
    "kl_sample",
    "kl_sample_batch",
    "kl_project",
    "quadrature_axes",
    "basis_to_dict",
    "write_basis_json",
    "write_field_csv",
]
