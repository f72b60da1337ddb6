"""Utility modules for ergoscope."""

from .logger import get_logger, log_function_call, log_exception, LoggerSetup

__all__ = [
    "get_logger",
    "log_function_call",
    "log_exception",
    "LoggerSetup",
]
