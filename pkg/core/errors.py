"""
Exception hierarchy for leap analysis.

Every error carries the process exit code the CLI reports for it:
2 for invalid input, 3 for a numerical tolerance failure and 4 when the
computation is too ill-conditioned to trust.
"""
from __future__ import annotations

try:
    from config.defaults import EXIT_ILL_CONDITIONED, EXIT_TOLERANCE, EXIT_VALIDATION
except ImportError:
    from ..config.defaults import EXIT_ILL_CONDITIONED, EXIT_TOLERANCE, EXIT_VALIDATION


class LeapError(Exception):
    """Base class for all leap analysis errors."""

    exit_code: int = 1


# =============================================================================
# Validation (exit code 2)
# =============================================================================
class LeapValidationError(LeapError, ValueError):
    """Inputs violate a stated precondition."""

    exit_code = EXIT_VALIDATION


class ShapeMismatch(LeapValidationError):
    """p and q are empty or have different lengths."""


class NotAProbability(LeapValidationError):
    """Probabilities do not sum to one, or a value cannot be parsed."""


class NegativeEntry(LeapValidationError):
    """A step or hold probability is negative."""


class MonotoneDrift(LeapValidationError):
    """All mass moves in one direction (sum(p) = 0 or sum(q) = 0)."""


class HoldTooLarge(LeapValidationError):
    """Hold probability is 1 or more."""


class BarrierTooNarrow(LeapValidationError):
    """N is smaller than k_p + k_q."""


class NotIrreducible(LeapValidationError):
    """Step support has gcd > 1, so the reflecting chain splits into classes."""


class PositiveDrift(LeapValidationError):
    """A one-sided construction was asked for with mu >= 0."""


class NoStationaryDistribution(LeapValidationError):
    """The one-sided reflecting leap has mu >= 0 (or numerically zero)."""


class DivergentSum(LeapValidationError):
    """Infinite power sum requested for |z| >= 1."""


class OracleTooLarge(LeapValidationError):
    """Dense oracle refused: N above the cap or not enough memory."""


# =============================================================================
# Numerical tolerance (exit code 3)
# =============================================================================
class NumericalToleranceError(LeapError, ArithmeticError):
    """A computed quantity failed its acceptance tolerance."""

    exit_code = EXIT_TOLERANCE


class NoConvergence(NumericalToleranceError):
    """Iteration cap hit before reaching the requested tolerance."""

    def __init__(self, message: str, gap_estimate: float = float("nan")):
        super().__init__(message)
        self.gap_estimate = gap_estimate


class VerificationFailed(NumericalToleranceError):
    """Cross-check between independent methods failed."""


# =============================================================================
# Ill-conditioning (exit code 4)
# =============================================================================
class IllConditioned(LeapError, ArithmeticError):
    """Result cannot be trusted at working precision."""

    exit_code = EXIT_ILL_CONDITIONED


class RootResidualTooLarge(IllConditioned):
    """A computed root does not satisfy |chi(z)| within tolerance."""


class LocationCountMismatch(IllConditioned):
    """Unit-circle root counts contradict the drift sign."""


class SingularSystem(IllConditioned):
    """Dense (I - Q) system is singular."""
