"""Custom exceptions for ergoscope."""

from typing import Any, Dict, Optional

from ergoscope.utils import get_logger

logger = get_logger(__name__)


class ErgoscopeError(Exception):
    """Base exception for ergoscope."""

    def __init__(self, message: str, details: str = None):
        super().__init__(message)
        self.message = message
        self.details = details

        # Log the exception when created
        logger.error(f"Exception raised: {message}")
        if details:
            logger.debug(f"Exception details: {details}")


class ConfigurationError(ErgoscopeError):
    """Raised when there's a configuration problem."""
    pass


class IoError(ErgoscopeError):
    """Raised when results or plots cannot be written or read."""
    pass


# --- continued fractions, rotations, Birkhoff sums -------------------------

class ArithmeticDomainError(ErgoscopeError):
    """Base for number-theoretic and summation failures."""
    pass


class PrecisionExhausted(ArithmeticDomainError):
    """Raised when a continued-fraction expansion runs out of precision."""
    pass


class DepthExceeded(ArithmeticDomainError):
    """Raised when a convergent beyond the stored depth is requested."""
    pass


class EmptyInput(ArithmeticDomainError):
    pass


class OutOfRange(ArithmeticDomainError):
    """Raised when an argument lies outside the admissible range."""
    pass


class SingularOrbit(ArithmeticDomainError):
    """Raised when an orbit point coincides with 0 on the circle."""
    pass


class InvalidParams(ArithmeticDomainError):
    pass


class SingularityHit(ArithmeticDomainError):
    """Raised when an orbit point enters the singularity guard band."""

    def __init__(self, message: str, index: Optional[int] = None, details: str = None):
        super().__init__(message, details)
        self.index = index


class OrderUnsupported(ArithmeticDomainError):
    pass


class GridTooCoarse(ArithmeticDomainError):
    pass


# --- interval exchanges ------------------------------------------------------

class InductionError(ErgoscopeError):
    """Base for interval-exchange and induction failures."""
    pass


class NonPositiveLength(InductionError):
    pass


class OutOfDomain(InductionError):
    pass


class DegenerateStep(InductionError):
    """Raised when the two last intervals have equal length."""

    def __init__(self, message: str, step: int = 0, details: str = None):
        super().__init__(message, details)
        self.step = step


class InconsistentRecord(InductionError):
    pass


class NotFound(InductionError):
    """Raised when a search over induction paths gives up."""

    def __init__(self, message: str, steps: int = 0, details: str = None):
        super().__init__(message, details)
        self.steps = steps


# --- tower construction ------------------------------------------------------

class ConstructionError(ErgoscopeError):
    """Base for failures of the tower construction."""
    pass


class InvariantViolated(ConstructionError):
    pass


class PermutationMismatch(ConstructionError):
    """Raised when induction does not follow the prescribed path."""
    pass


class BetaInForbiddenRegion(ConstructionError):
    pass


# --- measures ----------------------------------------------------------------

class MeasureError(ErgoscopeError):
    """Base for measure algebra failures."""
    pass


class MassMismatch(MeasureError):
    pass


class DegenerateSupport(MeasureError):
    pass


class ZeroScale(MeasureError):
    pass


class SubProbability(MeasureError):
    pass


class MixedArithmetic(MeasureError):
    """Raised when exact and floating-point measures are combined."""
    pass


# --- orchestration -----------------------------------------------------------

class ExperimentError(ErgoscopeError):
    """Raised when an experiment aborts; carries where it happened."""

    def __init__(
        self,
        message: str,
        context: Optional[Dict[str, Any]] = None,
        details: str = None
    ):
        super().__init__(message, details)
        self.context = context or {}
