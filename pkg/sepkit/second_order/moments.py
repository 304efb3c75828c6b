"""
k-th-order uncorrelation of two families of random quantities.

{X_i} and {Y_j} are k-th-order uncorrelated when

    E( prod_i X_i^a_i  prod_j Y_j^b_j ) = E( prod_i X_i^a_i ) E( prod_j Y_j^b_j )

for all non-negative integer exponents with sum(a) <= k and sum(b) <= k.
Tuples with sum(a) = 0 or sum(b) = 0 hold trivially and are skipped.
Violations are standardized by a jackknife standard error.
"""

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from loguru import logger

from utils.errors import BudgetError, ParameterError, SampleSizeError
from utils.helpers import setting
from utils.streams import parallel_map

Exponents = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SampleFamily:
    """Joint draws (n_draws x n_quantities) of named random quantities."""
    labels: tuple[str, ...]
    draws: np.ndarray

    def __post_init__(self):
        draws = np.asarray(self.draws, dtype=float)
        if draws.ndim == 1:
            draws = draws[:, None]
        if draws.ndim != 2:
            raise ParameterError(f"draws must be 2-D, got shape {draws.shape}")
        if draws.shape[0] < 2:
            raise SampleSizeError(f"Need at least 2 draws, got {draws.shape[0]}")
        if not np.all(np.isfinite(draws)):
            raise ParameterError("draws contain non-finite entries")
        labels = tuple(self.labels) or tuple(f"q{i + 1}" for i in range(draws.shape[1]))
        if len(labels) != draws.shape[1]:
            raise ParameterError(f"{len(labels)} labels for {draws.shape[1]} quantities")
        object.__setattr__(self, "draws", draws)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def of(cls, **quantities) -> "SampleFamily":
        """Build from named 1-D sample arrays of equal length."""
        labels = tuple(quantities)
        return cls(labels, np.column_stack([np.asarray(v, dtype=float) for v in quantities.values()]))

    @property
    def n_draws(self) -> int:
        return int(self.draws.shape[0])

    @property
    def n_quantities(self) -> int:
        return int(self.draws.shape[1])


@dataclass
class UncorrelationReport:
    """Result of check_uncorrelated; `passes[j-1]` is the verdict at order j."""
    order_tested: int
    worst_violation: float
    violating_monomial: tuple[Exponents, Exponents] | None
    passes: tuple[bool, ...]
    tol: float
    monomials_checked: int = 0
    worst_by_order: tuple[float, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return self.passes[-1]

    def to_dict(self) -> dict[str, Any]:
        a, b = self.violating_monomial or ((), ())
        return {
            "order": self.order_tested,
            "worst_violation": self.worst_violation,
            "monomial_a": list(a),
            "monomial_b": list(b),
            "pass": self.passed,
        }


def exponent_tuples(n_vars: int, k: int) -> list[Exponents]:
    """Exponent tuples of total degree 1..k, graded lexicographic order."""
    def compositions(total: int, slots: int):
        if slots == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, slots - 1):
                yield (first, *rest)

    return [t for degree in range(1, k + 1) for t in compositions(degree, n_vars)]


def monomial_count(n_x: int, n_y: int, k: int) -> int:
    per_family = lambda n: math.comb(n + k, k) - 1  # noqa: E731
    return per_family(n_x) * per_family(n_y)


def jackknife_covariance(p: np.ndarray, q: np.ndarray) -> tuple[float, float]:
    """
    mean(pq) - mean(p) mean(q) and its leave-one-out jackknife standard error.
    """
    n = p.size
    s_pq, s_p, s_q = float(np.sum(p * q)), float(np.sum(p)), float(np.sum(q))
    estimate = s_pq / n - (s_p / n) * (s_q / n)
    loo = (s_pq - p * q) / (n - 1) - ((s_p - p) / (n - 1)) * ((s_q - q) / (n - 1))
    spread = loo - loo.mean()
    std_error = math.sqrt((n - 1) / n * float(np.sum(spread * spread)))
    return estimate, std_error


def _standardize(estimate: float, std_error: float) -> float:
    if std_error > 0:
        return abs(estimate) / std_error
    return 0.0 if estimate == 0 else math.inf


def check_uncorrelated(X: SampleFamily, Y: SampleFamily, k: int, tol: float | None = None,
                       budget: int | None = None, n_jobs: int | None = None) -> UncorrelationReport:
    """
    Test k-th-order uncorrelation of two jointly sampled families.

    Args:
        X, Y: families with the same number of draws (row i of each is one joint draw)
        k: highest order tested (orders 1..k are all reported)
        tol: pass threshold in standard errors (default [second_order] tol)
        budget: maximum mixed monomials (default [second_order] budget)

    Raises:
        ParameterError: k < 1 or draw counts differ
        BudgetError: enumeration exceeds the budget
    """
    tol = float(setting("second_order", "tol") if tol is None else tol)
    budget = int(setting("second_order", "budget") if budget is None else budget)
    if k < 1:
        raise ParameterError(f"Order k must be >= 1, got {k}")
    if X.n_draws != Y.n_draws:
        raise ParameterError(f"Families must be jointly sampled: {X.n_draws} vs {Y.n_draws} draws")
    count = monomial_count(X.n_quantities, Y.n_quantities, k)
    if count > budget:
        raise BudgetError(f"{count} monomials at order {k} exceeds budget {budget}")

    x_exps = exponent_tuples(X.n_quantities, k)
    y_exps = exponent_tuples(Y.n_quantities, k)
    x_powers = {a: np.prod(X.draws ** np.array(a), axis=1) for a in x_exps}
    y_powers = {b: np.prod(Y.draws ** np.array(b), axis=1) for b in y_exps}
    monomials = sorted(
        ((a, b) for a in x_exps for b in y_exps),
        key=lambda ab: (max(sum(ab[0]), sum(ab[1])), sum(ab[0]) + sum(ab[1])),
    )

    def score(ab: tuple[Exponents, Exponents]) -> float:
        estimate, std_error = jackknife_covariance(x_powers[ab[0]], y_powers[ab[1]])
        return _standardize(estimate, std_error)

    scores = parallel_map(score, monomials, n_jobs)

    worst_by_order = []
    for order in range(1, k + 1):
        in_order = [s for (a, b), s in zip(monomials, scores, strict=True) if max(sum(a), sum(b)) <= order]
        worst_by_order.append(max(in_order))
    worst_index = int(np.argmax(scores))
    report = UncorrelationReport(
        order_tested=k,
        worst_violation=float(scores[worst_index]),
        violating_monomial=monomials[worst_index],
        passes=tuple(w <= tol for w in worst_by_order),
        tol=tol,
        monomials_checked=len(monomials),
        worst_by_order=tuple(worst_by_order),
    )
    logger.debug(f"Order-{k} uncorrelation: worst {report.worst_violation:.2f} SE at {report.violating_monomial}")
    return report
