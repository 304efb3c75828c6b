"""
File exports for spectral bases and sampled fields.

Bases go to JSON (eigenvalues, nodes, weights, row-major node eigenvector
matrix); fields on grids go to CSV with header "x,y,value".
"""

from pathlib import Path
from typing import Any

import numpy as np

from kernels.core import factor_to_dict
from spectral.basis import SpectralBasis
from utils.helpers import write_csv, write_json


def basis_to_dict(b: SpectralBasis) -> dict[str, Any]:
    # repr-based JSON floats round-trip exactly (at most 17 significant digits)
    return {
        "kernel": factor_to_dict(b.kernel),
        "eigenvalues": [float(v) for v in b.eigenvalues],
        "nodes": [float(v) for v in b.nodes],
        "weights": [float(v) for v in b.weights],
        "node_eigenvectors": {
            "rows": b.m,
            "cols": b.rank,
            "data": [float(v) for v in b.node_eigenvectors.ravel(order="C")],
        },
    }


def write_basis_json(b: SpectralBasis, path: str | Path) -> Path:
    return write_json(path, basis_to_dict(b))


def write_field_csv(field, xs, ys, path: str | Path) -> Path:
    """Evaluate a 2-D field on the xs x ys grid and write x,y,value rows."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    values = field.evaluate_grid(xs, ys)
    rows = ((float(x), float(y), float(values[i, j])) for i, x in enumerate(xs) for j, y in enumerate(ys))
    return write_csv(path, ["x", "y", "value"], rows)
