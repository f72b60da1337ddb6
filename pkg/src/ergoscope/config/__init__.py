"""Configuration management module.

Experiment files are handled by :mod:`ergoscope.config.experiment`, which is
imported explicitly to keep this package free of domain imports.
"""

from .settings import (
    Settings,
    AppConfig,
    RuntimeConfig,
    LoggingConfig,
    get_settings,
    reload_settings,
)

__all__ = [
    "Settings",
    "AppConfig",
    "RuntimeConfig",
    "LoggingConfig",
    "get_settings",
    "reload_settings",
]
