"""Tests for experiment configuration files."""

from fractions import Fraction as F
from pathlib import Path

import pytest

from ergoscope.config.experiment import (
    ExperimentConfig,
    IetPcParams,
    IetPlParams,
    RotationLogParams,
    experiment_from_dict,
    load_experiment_config,
)
from ergoscope.core.exceptions import ConfigurationError
from ergoscope.core.models import ExperimentKind

from tests.utils import fixture_path, load_yaml_fixture

REPO_CONFIGS = Path(__file__).parent.parent.parent / "config" / "experiments"


class TestLoadExperimentConfig:
    """Test loading and validating experiment files."""

    @pytest.mark.parametrize("name, kind", [
        ("rotation_log.yaml", ExperimentKind.ROTATION_LOG),
        ("iet_pc.yaml", ExperimentKind.IET_PC),
        ("iet_pl.yaml", ExperimentKind.IET_PL),
    ])
    def test_repository_files(self, name, kind):
        config = load_experiment_config(REPO_CONFIGS / name)

        assert config.kind is kind
        assert config.params is getattr(config, kind.block)

    def test_fraction_strings(self):
        config = load_experiment_config(REPO_CONFIGS / "iet_pc.yaml")

        assert config.params.beta_offset == F(3, 4)
        assert config.params.D_beta == F(1)
        assert config.params.n_values == [3, 4, 5, 6, 7, 8]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            load_experiment_config(tmp_path / "absent.yaml")

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")

        with pytest.raises(ConfigurationError, match="mapping"):
            load_experiment_config(path)

    def test_bad_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("kind: [unclosed\n")

        with pytest.raises(ConfigurationError):
            load_experiment_config(path)


class TestValidation:
    """Test that invalid keys are rejected with the key named."""

    def test_missing_block_filled_with_defaults(self):
        config = experiment_from_dict({"kind": "iet-pl"})

        assert isinstance(config.params, IetPlParams)
        assert config.params.kappa == 1

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError, match="kind"):
            experiment_from_dict({"kind": "flow"})

    def test_foreign_block(self):
        with pytest.raises(ConfigurationError, match="iet_pl"):
            experiment_from_dict({"kind": "iet-pc", "iet_pl": {}})

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError, match="iet_pc.bogus"):
            experiment_from_dict({"kind": "iet-pc", "iet_pc": {"bogus": 1}})

    @pytest.mark.parametrize("block", [
        {"K": 2, "L": 2},
        {"K": 2, "L": 3},
        {"d": 3},
        {"n_min": 2},
        {"n_min": 5, "n_max": 4},
        {"epsilon": "1/1000"},
        {"epsilon": "1/1000", "delta": "1/10000", "delta_prime": "1/5000"},
    ])
    def test_invalid_iet_blocks(self, block):
        with pytest.raises(ConfigurationError):
            experiment_from_dict({"kind": "iet-pl", "iet_pl": block})

    @pytest.mark.parametrize("block", [{"beta_offset": "1/4"}, {"D_beta": 0}])
    def test_invalid_pc_blocks(self, block):
        with pytest.raises(ConfigurationError):
            experiment_from_dict({"kind": "iet-pc", "iet_pc": block})

    def test_invalid_slope(self):
        with pytest.raises(ConfigurationError, match="kappa"):
            experiment_from_dict({"kind": "iet-pl", "iet_pl": {"kappa": "0"}})

    def test_explicit_construction_params(self):
        block = {"epsilon": "1/1000", "delta": "11/24000", "delta_prime": "3/8000"}

        config = experiment_from_dict({"kind": "iet-pl", "iet_pl": block})

        assert config.params.delta == F(11, 24000)

    @pytest.mark.parametrize("block", [
        {"K": 3, "L": 3},
        {"filler_bound": 100},
        {"a0": 0.5, "cos_coeffs": [1.0]},
        {"b_grid": []},
        {"separation_b": [-1.0]},
    ])
    def test_invalid_rotation_blocks(self, block):
        with pytest.raises(ConfigurationError):
            experiment_from_dict({"kind": "rotation-log", "rotation_log": block})

    def test_b_grid_sorted(self):
        config = experiment_from_dict({"kind": "rotation-log", "rotation_log": {"b_grid": [5, 2, 3]}})

        assert config.params.b_grid == [2.0, 3.0, 5.0]

    def test_seed_and_threads(self):
        with pytest.raises(ConfigurationError):
            experiment_from_dict({"kind": "iet-pc", "seed": -1})
        with pytest.raises(ConfigurationError):
            experiment_from_dict({"kind": "iet-pc", "threads": 0})

    def test_not_a_dict(self):
        with pytest.raises(ConfigurationError):
            experiment_from_dict(["kind"])


class TestOverrides:
    """Test command line overrides and the config echo."""

    def test_with_overrides(self, tmp_path):
        config = experiment_from_dict({"kind": "iet-pc", "threads": 1})

        updated = config.with_overrides(output_dir=str(tmp_path), threads=4)

        assert updated.output_dir == str(tmp_path)
        assert updated.threads == 4
        assert config.threads == 1

    def test_override_revalidated(self):
        config = experiment_from_dict({"kind": "iet-pc"})

        with pytest.raises(ConfigurationError):
            config.with_overrides(threads=0)

    def test_to_dict_drops_other_blocks(self):
        data = experiment_from_dict({"kind": "iet-pc"}).to_dict()

        assert data["kind"] == "iet-pc"
        assert "iet_pl" not in data
        assert data["iet_pc"]["beta_offset"] == "3/4"

    def test_to_dict_round_trip(self):
        config = experiment_from_dict({"kind": "rotation-log", "seed": 7})

        again = experiment_from_dict(config.to_dict())

        assert again == config
        assert isinstance(again.params, RotationLogParams)
        assert isinstance(ExperimentConfig(kind="iet-pc").params, IetPcParams)

    def test_fixture_dict_matches_file(self):
        data = load_yaml_fixture("iet_pl_small.yaml")
        data["seed"] = 11

        config = experiment_from_dict(data)

        assert config.seed == 11
        assert config.params == load_experiment_config(fixture_path("iet_pl_small.yaml")).params


class TestRuntimeDefaults:
    """Keys left out of the file come from the runtime settings."""

    def test_threads_and_output_dir_from_environment(self, runtime_env, tmp_path):
        runtime_env(ERGOSCOPE_THREADS=5, ERGOSCOPE_OUTPUT_DIR=tmp_path)

        config = experiment_from_dict({"kind": "iet-pc"})

        assert config.threads == 5
        assert config.output_dir == str(tmp_path)

    def test_file_values_win(self, runtime_env, tmp_path):
        runtime_env(ERGOSCOPE_THREADS=5, ERGOSCOPE_OUTPUT_DIR=tmp_path)

        config = load_experiment_config(fixture_path("iet_pl_small.yaml"))

        assert config.threads == 1
        assert config.output_dir == "runs"

    def test_guard_from_settings_file(self, runtime_env, tmp_path):
        settings_file = tmp_path / "settings.yaml"
        settings_file.write_text("runtime:\n  singularity_guard: 1.0e-10\n")
        runtime_env(ERGOSCOPE_CONFIG=settings_file)

        default = experiment_from_dict({"kind": "rotation-log"})
        explicit = experiment_from_dict({"kind": "rotation-log", "rotation_log": {"guard": 1e-12}})

        assert default.params.guard == 1e-10
        assert explicit.params.guard == 1e-12
