"""Core functionality for ergoscope."""

from .models import (
    ExperimentKind,
    CheckStatus,
    CheckResult,
    ExperimentTask,
    TaskResult,
    ResultBundle,
)

from .exceptions import (
    ErgoscopeError,
    ConfigurationError,
    IoError,
    ArithmeticDomainError,
    InductionError,
    ConstructionError,
    MeasureError,
    ExperimentError,
)

__all__ = [
    # Enums
    "ExperimentKind",
    "CheckStatus",
    # Models
    "CheckResult",
    "ExperimentTask",
    "TaskResult",
    "ResultBundle",
    # Exceptions
    "ErgoscopeError",
    "ConfigurationError",
    "IoError",
    "ArithmeticDomainError",
    "InductionError",
    "ConstructionError",
    "MeasureError",
    "ExperimentError",
]
