"""
Check Router - Dispatches property-check suites by name.

Each suite declares a name and a run() method returning CheckResults. The
router looks the suite up, times it and wraps the results in a SuiteReport
whose verdict drives the CLI exit code.
"""

import time
from dataclasses import dataclass, field
from typing import Any, Protocol

from loguru import logger

from utils.errors import UsageError


@dataclass
class CheckResult:
    """A single assertion from any suite."""
    name: str
    passed: bool
    value: float
    threshold: float
    comparison: str = "<="  # <=, >
    detail: dict[str, Any] = field(default_factory=dict)
    expected_failure: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "pass": self.passed,
            "value": self.value,
            "threshold": self.threshold,
            "comparison": self.comparison,
            "expected_failure": self.expected_failure,
            "detail": self.detail,
        }


def at_most(name: str, value: float, threshold: float, **detail) -> CheckResult:
    return CheckResult(name, bool(value <= threshold), float(value), float(threshold), "<=", detail)


def above(name: str, value: float, threshold: float, **detail) -> CheckResult:
    return CheckResult(name, bool(value > threshold), float(value), float(threshold), ">", detail)


@dataclass
class SuiteReport:
    suite: str
    results: list[CheckResult]
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "pass": self.passed,
            "seconds": self.seconds,
            "checks": [r.to_dict() for r in self.results],
        }


class CheckSuite(Protocol):
    """Structural type for check suites. No inheritance required."""
    name: str
    description: str

    def run(self, config: dict[str, Any], seed: int, n_jobs: int | None = None) -> list[CheckResult]: ...


class CheckRouter:
    """Routes suite names to registered suites."""

    def __init__(self):
        self._suites: dict[str, CheckSuite] = {}

    def register(self, suite: CheckSuite) -> None:
        self._suites[suite.name] = suite

    @property
    def names(self) -> list[str]:
        return sorted(self._suites)

    def route(self, name: str) -> CheckSuite:
        """
        Find a suite by name.

        Raises:
            UsageError: no suite has this name
        """
        if name not in self._suites:
            raise UsageError(f"Unknown suite '{name}', expected one of {self.names}")
        return self._suites[name]

    def run(self, name: str, config: dict[str, Any] | None = None, seed: int = 0,
            n_jobs: int | None = None) -> SuiteReport:
        suite = self.route(name)
        start = time.perf_counter()
        results = suite.run(config or {}, seed, n_jobs)
        report = SuiteReport(name, results, time.perf_counter() - start)
        failed = [r.name for r in results if not r.passed]
        if failed:
            logger.warning(f"Suite {name}: {len(failed)} check(s) failed: {failed}")
        else:
            logger.info(f"Suite {name}: {len(results)} checks passed in {report.seconds:.2f}s")
        return report


def default_router() -> CheckRouter:
    """Router with every built-in suite registered."""
    from checks.suites import (
        ConditionalCovarianceSuite,
        CrossCorrelationSuite,
        IsotropySuite,
        MercerSuite,
        SecondOrderSuite,
    )

    router = CheckRouter()
    for suite in (
        ConditionalCovarianceSuite(),
        CrossCorrelationSuite(),
        IsotropySuite(),
        MercerSuite(),
        SecondOrderSuite(),
    ):
        router.register(suite)
    return router
