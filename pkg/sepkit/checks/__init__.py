"""
Checks package - Property-check routing and suites.

Provides the `check` command's suites (eq4, eq5, isotropy, mercer,
second_order) behind a name-based router.
"""

from .router import CheckResult, CheckRouter, CheckSuite, SuiteReport, default_router

__all__ = ["CheckResult", "CheckRouter", "CheckSuite", "SuiteReport", "default_router"]
