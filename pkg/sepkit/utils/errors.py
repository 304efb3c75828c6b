"""
Exception hierarchy shared by every sepkit package.

The CLI maps these onto exit codes (UsageError -> 2, NumericalError -> 3).
"""


class SepkitError(Exception):
    """Root of all sepkit errors."""


class DomainError(SepkitError, ValueError):
    """A point lies outside a kernel's interval, or an interval is invalid."""


class ShapeError(SepkitError, ValueError):
    """Dimensions of points, kernels, grids or matrices disagree."""


class ParameterError(SepkitError, ValueError):
    """Invalid kernel parameters, configuration values or design inputs."""


class TruncationError(SepkitError, IndexError):
    """A truncation level exceeds the available spectral rank."""


class NumericalError(SepkitError, ArithmeticError):
    """A linear solve or eigen-solve failed or was too ill-conditioned."""

    def __init__(self, message: str, worst_eigenvalue: float | None = None, jitter: float = 0.0):
        super().__init__(message)
        self.worst_eigenvalue = worst_eigenvalue
        self.jitter = jitter


class SampleSizeError(SepkitError, ValueError):
    """Too few samples for a Monte Carlo statistic."""


class BudgetError(SepkitError, RuntimeError):
    """An enumeration would exceed its configured budget."""


class UsageError(SepkitError):
    """Bad command-line usage: missing files, malformed JSON, unknown names."""
