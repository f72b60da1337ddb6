"""
Shared test fixtures and configuration for pytest.
This file is automatically discovered by pytest.
"""

from fractions import Fraction

import pytest

from ergoscope.config import Settings, reload_settings
from ergoscope.config.experiment import experiment_from_dict
from ergoscope.core import (
    CheckResult,
    CheckStatus,
    ExperimentKind,
    ResultBundle,
    TaskResult,
)

from tests.utils import CountingExperiment


@pytest.fixture
def counting_experiment():
    return CountingExperiment()


@pytest.fixture
def iet_pl_config():
    """A small iet-pl configuration for engine tests."""
    return experiment_from_dict({
        "kind": "iet-pl",
        "seed": 0,
        "iet_pl": {"n_min": 3, "n_max": 6},
    })


@pytest.fixture
def sample_check():
    return CheckResult(
        name="rigidity",
        status=CheckStatus.PASS,
        summary="T^{i q_n} x = x + i Delta_n on C",
        details={"max_deviation": Fraction(0), "n": 3},
    )


@pytest.fixture
def sample_bundle(sample_check):
    """A hand-built bundle with atoms, density and construction rows."""
    task_a = TaskResult(index=0, label="n=3", records={"q_n": 7, "gamma_n": Fraction(7, 100)})
    task_a.add_rows("atoms", [
        {"n": 3, "i": 2, "location": Fraction(0), "mass": Fraction(1, 2)},
        {"n": 3, "i": 2, "location": Fraction(1), "mass": Fraction(1, 2)},
    ])
    task_a.add_rows("density", [
        {"n": 3, "i": 2, "breakpoint": Fraction(-1, 4), "value": Fraction(1)},
        {"n": 3, "i": 2, "breakpoint": Fraction(3, 4), "value": Fraction(0)},
    ])
    task_a.add_rows("construction", [{"n": 3, "q_n": 7, "Delta_n": Fraction(1, 100)}])
    task_a.checks.append(sample_check)

    task_b = TaskResult(index=1, label="n=4", records={"q_n": 9})
    task_b.add_rows("construction", [{"n": 4, "q_n": 9, "Delta_n": Fraction(1, 200)}])
    task_b.checks.append(CheckResult("atom_count", CheckStatus.FAIL, "3 atoms, expected 4"))

    return ResultBundle(
        kind=ExperimentKind.IET_PC,
        config={"kind": "iet-pc", "seed": 0},
        tasks=[task_b, task_a],
        sections={"fit": {"slope": Fraction(-1, 2)}},
        checks=[CheckResult("ks_trend", CheckStatus.REPORT, "decreasing")],
        status="partial_failure",
    )


@pytest.fixture
def temp_config_file(tmp_path):
    """Create a temporary settings file for testing."""
    config_content = """
app:
  name: "ergoscope-test"
  debug: true
  log_level: "DEBUG"

runtime:
  threads: 2
  precision_bits: 128
"""
    config_file = tmp_path / "test_config.yaml"
    config_file.write_text(config_content)
    return config_file


@pytest.fixture
def mock_settings():
    """Create a default Settings object for testing."""
    return Settings()


@pytest.fixture(autouse=True)
def _reset_settings():
    """Reload the global settings after each test so none leaks into the next."""
    yield
    reload_settings()


@pytest.fixture
def runtime_env(monkeypatch):
    """
    Reload the global settings with extra environment variables.

    The original settings are reloaded on teardown.
    """
    def _reload(**env):
        for name, value in env.items():
            monkeypatch.setenv(name, str(value))
        return reload_settings()

    yield _reload
    monkeypatch.undo()
    reload_settings()


# Pytest configuration hooks
def pytest_configure(config):
    """Configure pytest with custom settings."""
    config.addinivalue_line(
        "markers", "unit: mark test as a unit test"
    )
    config.addinivalue_line(
        "markers", "integration: mark test as an integration test"
    )
    config.addinivalue_line(
        "markers", "slow: mark test as slow (full constructions and runs)"
    )


def pytest_collection_modifyitems(config, items):
    """Modify test collection to add markers automatically."""
    for item in items:
        # Auto-add 'unit' marker to tests in tests/unit/
        if "unit" in str(item.fspath):
            item.add_marker(pytest.mark.unit)
        # Auto-add 'integration' marker to tests in tests/integration/
        elif "integration" in str(item.fspath):
            item.add_marker(pytest.mark.integration)
