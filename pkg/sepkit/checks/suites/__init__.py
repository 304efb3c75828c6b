"""
Check suites - Property suites run by the `check` command.

Each suite returns CheckResults; the router reports the suite as passed
only when every result passes.
"""

from .eq4 import ConditionalCovarianceSuite
from .eq5 import CrossCorrelationSuite
from .isotropy import IsotropySuite
from .mercer import MercerSuite
from .second_order import SecondOrderSuite

__all__ = [
    "ConditionalCovarianceSuite",
    "CrossCorrelationSuite",
    "IsotropySuite",
    "MercerSuite",
    "SecondOrderSuite",
]
