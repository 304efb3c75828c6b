# sepkit Utilities Package
"""
Shared utility functions, errors and random streams.
"""

from .errors import (
    BudgetError,
    DomainError,
    NumericalError,
    ParameterError,
    SampleSizeError,
    SepkitError,
    ShapeError,
    TruncationError,
    UsageError,
)
from .helpers import (
    atomic_write_text,
    format_float,
    load_config,
    load_settings,
    reset_settings_cache,
    setting,
    write_csv,
    write_json,
)
from .streams import parallel_map, resolve_jobs, stream

__all__ = [
    "SepkitError",
    "DomainError",
    "ShapeError",
    "ParameterError",
    "TruncationError",
    "NumericalError",
    "SampleSizeError",
    "BudgetError",
    "UsageError",
    "load_settings",
    "reset_settings_cache",
    "setting",
    "load_config",
    "atomic_write_text",
    "format_float",
    "write_csv",
    "write_json",
    "stream",
    "parallel_map",
    "resolve_jobs",
]
