"""Tests for logging functionality."""

import logging
from pathlib import Path

import pytest

from ergoscope.utils.logger import LoggerSetup, get_logger, log_function_call
from ergoscope.config import get_settings


class TestLogging:
    """Test logging functionality."""

    def test_logger_setup(self):
        """Test basic logger setup."""
        LoggerSetup._loggers_configured = False
        LoggerSetup.setup_logging()

        assert LoggerSetup._loggers_configured is True
        assert LoggerSetup._file_handler is not None
        assert LoggerSetup._console_handler is not None

    def test_handlers_on_package_logger(self):
        LoggerSetup.setup_logging()
        package_logger = logging.getLogger("ergoscope")

        assert LoggerSetup._file_handler in package_logger.handlers
        assert package_logger.propagate is False

    def test_get_logger(self):
        """Test getting logger instances."""
        logger1 = get_logger("ergoscope.test.module1")
        logger2 = get_logger("ergoscope.test.module2")
        logger3 = get_logger("ergoscope.test.module1")

        assert logger1.name == "ergoscope.test.module1"
        assert logger2.name == "ergoscope.test.module2"
        assert logger1 is logger3

    def test_default_name(self):
        assert get_logger().name == __name__

    def test_log_file_creation(self):
        """Test that log files are created."""
        settings = get_settings()
        log_file = Path(settings.logging.file)

        logger = get_logger("ergoscope.test.file")
        logger.info("Test message for file creation")
        LoggerSetup._file_handler.flush()

        assert log_file.exists()
        assert "Test message for file creation" in log_file.read_text(encoding='utf-8')

    def test_set_console_level(self):
        LoggerSetup.set_console_level(logging.DEBUG)

        assert LoggerSetup._console_handler.level == logging.DEBUG
        assert logging.getLogger("ergoscope").level == logging.DEBUG

        LoggerSetup.reconfigure()

    def test_logger_reconfiguration(self):
        """Test logger reconfiguration."""
        LoggerSetup.setup_logging()
        LoggerSetup.reconfigure()

        package_logger = logging.getLogger("ergoscope")
        handlers = [h for h in package_logger.handlers
                    if h in (LoggerSetup._file_handler, LoggerSetup._console_handler)]

        assert len(handlers) == 2
        assert LoggerSetup._loggers_configured is True

    def test_function_decorator(self):
        """Test the function call logging decorator."""
        @log_function_call
        def scaled(x: int, factor: int = 1) -> int:
            return x * factor

        assert scaled(21, factor=2) == 42

        @log_function_call
        def failing_function():
            raise RuntimeError("Test error")

        with pytest.raises(RuntimeError):
            failing_function()


def test_exception_logs_on_construction(caplog):
    """Errors are logged when raised."""
    from ergoscope.core.exceptions import ConfigurationError

    package_logger = logging.getLogger("ergoscope")
    package_logger.addHandler(caplog.handler)
    try:
        with caplog.at_level(logging.ERROR, logger="ergoscope"):
            ConfigurationError("Test configuration error", "Additional details")
    finally:
        package_logger.removeHandler(caplog.handler)

    assert "Test configuration error" in caplog.text
