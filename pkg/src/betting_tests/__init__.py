"""Anytime-valid sequential tests for bounded means via betting.

Wealth processes (test supermartingales) built from online betting
strategies, a power-bound calculator, synthetic experiment streams with a
Monte Carlo harness, and a command-line interface.
"""

from .bounds import (
    BeyondHorizon,
    BoundFamily,
    PowerBoundSpec,
    aleph,
    aleph_closed_form,
    expected_tau_bound,
    lambert_like,
    linlog,
    lower_bound_tau,
    u_n,
)
from .core import (
    BetDomainError,
    BettingTestError,
    ConfigurationError,
    GeometryBounds,
    IngestionError,
    NullSpec,
    NumericalError,
    RunningStats,
    StreamSpec,
    update_stats,
)
from .estimators import SequentialTest
from .experiments import TrialSummary, monte_carlo_tau
from .martingales import RejectionRecord, WealthProcess, make_process, rejection_time

__version__ = "0.1.0"

__all__ = [
    "BeyondHorizon", "BoundFamily", "PowerBoundSpec", "aleph", "aleph_closed_form",
    "expected_tau_bound", "lambert_like", "linlog", "lower_bound_tau", "u_n",
    "BetDomainError", "BettingTestError", "ConfigurationError", "GeometryBounds",
    "IngestionError", "NullSpec", "NumericalError", "RunningStats", "StreamSpec",
    "update_stats", "SequentialTest", "TrialSummary", "monte_carlo_tau",
    "RejectionRecord", "WealthProcess", "make_process", "rejection_time",
]
