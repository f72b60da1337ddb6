"""Tests for configuration management."""

import os
from unittest.mock import patch

import pytest
import yaml

from ergoscope.config import Settings, get_settings


class TestSettings:
    """Test configuration settings."""

    def test_default_settings(self):
        """Test default settings creation."""
        settings = Settings()

        assert settings.app.name == "ergoscope"
        assert settings.app.version == "0.1.0"
        assert settings.runtime.threads == 1
        assert settings.runtime.precision_bits == 256
        assert settings.logging.file == "logs/ergoscope.log"

    def test_load_from_yaml(self, tmp_path, monkeypatch):
        """Test loading settings from YAML file."""
        config_data = {
            "app": {"debug": True, "log_level": "DEBUG"},
            "runtime": {"threads": 4, "precision_bits": 128},
            "unknown": {"ignored": 1},
        }
        config_path = tmp_path / "config.yaml"
        config_path.write_text(yaml.dump(config_data))

        for name in ("DEBUG", "LOG_LEVEL", "ERGOSCOPE_THREADS", "ERGOSCOPE_OUTPUT_DIR"):
            monkeypatch.delenv(name, raising=False)

        with patch('ergoscope.config.settings.load_dotenv'):
            settings = Settings.load_from_file(str(config_path))

        assert settings.app.debug is True
        assert settings.app.log_level == "DEBUG"
        assert settings.runtime.threads == 4
        assert settings.runtime.precision_bits == 128
        assert settings.runtime.output_dir == "runs"

    def test_missing_file_gives_defaults(self, tmp_path):
        """Test that a missing file falls back to defaults."""
        with patch('ergoscope.config.settings.load_dotenv'):
            settings = Settings.load_from_file(str(tmp_path / "absent.yaml"))

        assert settings.runtime.max_height == 10_000

    def test_environment_variables(self, tmp_path, monkeypatch):
        """Test environment variable override."""
        monkeypatch.setenv("DEBUG", "true")
        monkeypatch.setenv("LOG_LEVEL", "WARNING")
        monkeypatch.setenv("ERGOSCOPE_THREADS", "3")
        monkeypatch.setenv("ERGOSCOPE_OUTPUT_DIR", str(tmp_path))

        with patch('ergoscope.config.settings.load_dotenv'):
            settings = Settings.load_from_file(str(tmp_path / "absent.yaml"))

        assert settings.app.debug is True
        assert settings.app.log_level == "WARNING"
        assert settings.runtime.threads == 3
        assert settings.runtime.output_dir == str(tmp_path)

    def test_bad_thread_env_ignored(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ERGOSCOPE_THREADS", "many")

        with patch('ergoscope.config.settings.load_dotenv'):
            settings = Settings.load_from_file(str(tmp_path / "absent.yaml"))

        assert settings.runtime.threads == 1

    def test_validation_errors(self):
        """Test configuration validation."""
        settings = Settings()
        settings.app.log_level = "LOUD"
        settings.runtime.threads = 0
        settings.runtime.precision_bits = 32

        errors = settings.validate()

        assert len(errors) == 3
        assert any("Log level must be one of" in error for error in errors)
        assert any("threads" in error for error in errors)
        assert any("precision_bits" in error for error in errors)

    def test_validation_success(self):
        """Test successful validation."""
        assert Settings().validate() == []

    def test_to_dict(self):
        """Test conversion to dictionary."""
        config_dict = Settings().to_dict()

        assert set(config_dict) == {"app", "runtime", "logging"}
        assert config_dict["runtime"]["singularity_guard"] == 1e-14


def test_get_settings_singleton():
    """Test that get_settings returns the same instance."""
    settings1 = get_settings()
    settings2 = get_settings()

    assert settings1 is settings2


def test_reload_settings():
    """Test settings reload functionality."""
    from ergoscope.config.settings import reload_settings

    settings1 = get_settings()
    settings2 = reload_settings()

    assert settings1 is not settings2


def test_repository_config_is_valid():
    """The shipped config file validates cleanly."""
    path = os.path.join(os.path.dirname(__file__), "..", "..", "config", "config.yaml")

    with patch('ergoscope.config.settings.load_dotenv'):
        settings = Settings.load_from_file(path)

    assert settings.validate() == []
