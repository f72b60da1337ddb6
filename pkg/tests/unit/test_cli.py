"""Tests for CLI functionality."""

import json

import pytest
from click.testing import CliRunner

from ergoscope.cli import main, config, run, verify, plot, EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK
from ergoscope.reporters import emit_results

from tests.utils import CountingExperiment, fixture_path


class TestCLI:
    """Test CLI commands."""

    def setup_method(self):
        """Set up test fixtures."""
        self.runner = CliRunner()

    def test_main_help(self):
        """Test main command help."""
        result = self.runner.invoke(main, ['--help'])
        assert result.exit_code == 0
        assert 'Rotations, interval exchanges' in result.output
        for command in ('run', 'verify', 'plot', 'config'):
            assert command in result.output

    def test_version(self):
        result = self.runner.invoke(main, ['--version'])
        assert result.exit_code == 0
        assert '0.1.0' in result.output

    def test_config_command(self):
        """Test config command."""
        result = self.runner.invoke(config)
        assert result.exit_code == 0
        assert 'runtime.threads' in result.output

    def test_config_validate(self, temp_config_file):
        """Test config validation."""
        result = self.runner.invoke(config, [str(temp_config_file), '--validate'])
        assert result.exit_code == EXIT_OK
        assert 'valid' in result.output

    def test_config_validate_errors(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("runtime:\n  threads: 0\n")

        result = self.runner.invoke(config, [str(path), '--validate'])

        assert result.exit_code == EXIT_CHECK_FAILED
        assert 'threads' in result.output


class TestRunCommand:
    """Test ``run`` with a stand-in experiment."""

    def setup_method(self):
        self.runner = CliRunner()

    @pytest.fixture(autouse=True)
    def _counting(self, mocker):
        mocker.patch('ergoscope.cli.default_experiments', return_value=[CountingExperiment()])

    def test_run_passes(self, tmp_path):
        result = self.runner.invoke(run, [str(fixture_path("counting.yaml")), '--out', str(tmp_path)])

        assert result.exit_code == EXIT_OK
        target = tmp_path / "iet-pl-seed3"
        assert (target / "bundle.json").exists()
        assert (target / "construction.csv").exists()
        assert json.loads((target / "checks.json").read_text())["passed"] is True

    def test_run_output_dir_from_environment(self, runtime_env, tmp_path):
        runtime_env(ERGOSCOPE_OUTPUT_DIR=tmp_path / "from-env")

        result = self.runner.invoke(run, [str(fixture_path("counting.yaml"))])

        assert result.exit_code == EXIT_OK
        assert (tmp_path / "from-env" / "iet-pl-seed3" / "bundle.json").exists()

    def test_run_check_failure(self, tmp_path):
        result = self.runner.invoke(run, [
            str(fixture_path("iet_pl_small.yaml")), '--out', str(tmp_path), '--threads', '2',
        ])

        assert result.exit_code == EXIT_CHECK_FAILED
        assert 'even_3' in result.output
        assert (tmp_path / "iet-pl-seed0" / "summary.md").exists()

    def test_run_invalid_config(self, tmp_path):
        result = self.runner.invoke(run, [str(fixture_path("invalid_experiment.yaml")), '--out', str(tmp_path)])

        assert result.exit_code == EXIT_ERROR
        assert 'Invalid experiment configuration' in result.output

    def test_run_missing_file(self):
        result = self.runner.invoke(run, ['does-not-exist.yaml'])

        assert result.exit_code == 2

    def test_run_unhandled_kind(self, tmp_path):
        result = self.runner.invoke(run, [
            str(fixture_path("rotation_log_small.yaml")), '--out', str(tmp_path),
        ])

        assert result.exit_code == EXIT_ERROR
        assert 'No registered experiment' in result.output


class TestVerifyCommand:
    """Test argument handling of ``verify``."""

    def setup_method(self):
        self.runner = CliRunner()

    def test_bad_only(self):
        result = self.runner.invoke(verify, [str(fixture_path("counting.yaml")), '--only', '1,x'])

        assert result.exit_code == 2
        assert '--only' in result.output

    def test_unknown_criterion(self, tmp_path):
        result = self.runner.invoke(verify, [
            str(fixture_path("counting.yaml")), '--only', '11', '--out', str(tmp_path),
        ])

        assert result.exit_code == EXIT_ERROR
        assert 'Unknown acceptance criteria' in result.output

    def test_quick_direct_criteria(self, tmp_path):
        result = self.runner.invoke(verify, [
            str(fixture_path("counting.yaml")), '--only', '3,4', '--quick', '--out', str(tmp_path),
        ])

        assert result.exit_code in [EXIT_OK, EXIT_CHECK_FAILED]
        target = tmp_path / "acceptance-seed3"
        payload = json.loads((target / "checks.json").read_text())
        assert [c["name"] for c in payload["checks"]] == ["criterion_3", "criterion_4"]
        assert "--quick" in (target / "summary.md").read_text()


class TestPlotCommand:
    """Test ``plot``."""

    def setup_method(self):
        self.runner = CliRunner()

    def test_plot_bundle(self, sample_bundle, tmp_path):
        emit_results(sample_bundle, tmp_path / "iet-pc-seed0")

        result = self.runner.invoke(plot, [str(tmp_path)])

        assert result.exit_code == 0
        assert (tmp_path / "iet-pc-seed0" / "plots" / "atoms_n3_i2.svg").exists()

    def test_plot_missing_bundle(self, tmp_path):
        result = self.runner.invoke(plot, [str(tmp_path)])

        assert result.exit_code == EXIT_ERROR
        assert 'No bundle.json' in result.output
