"""Tests for the experiment engine."""

import pytest

from ergoscope.config.experiment import experiment_from_dict
from ergoscope.core import ResultBundle
from ergoscope.core.engine import ExperimentEngine
from ergoscope.core.exceptions import ExperimentError
from ergoscope.experiments import IetFlowExperiment, RotationLogExperiment, default_experiments

from tests.utils import CountingExperiment


class TestExperimentEngine:
    """Test ExperimentEngine functionality."""

    def test_engine_initialization(self):
        """Test creating an engine instance."""
        engine = ExperimentEngine()

        assert engine is not None
        assert len(engine.experiments) == 0

    def test_register_experiment(self, counting_experiment):
        engine = ExperimentEngine()

        engine.register_experiment(counting_experiment)

        assert engine.experiments == [counting_experiment]

    def test_register_invalid_experiment(self):
        """Test that registering an invalid experiment raises error."""
        engine = ExperimentEngine()

        with pytest.raises(ValueError):
            engine.register_experiment("not an experiment")

    def test_run_basic(self, counting_experiment, iet_pl_config):
        engine = ExperimentEngine()
        engine.register_experiment(counting_experiment)

        bundle = engine.run(iet_pl_config)

        assert isinstance(bundle, ResultBundle)
        assert [t.label for t in bundle.tasks] == ["n=3", "n=4", "n=5", "n=6"]
        assert bundle.sections == {"total": 18}
        assert bundle.status == "partial_failure"
        assert "output_dir" not in bundle.config

    def test_parallel_matches_sequential(self, iet_pl_config):
        engine = ExperimentEngine()
        engine.register_experiment(CountingExperiment(delay=0.05))

        sequential = engine.run(iet_pl_config)
        parallel = engine.run(iet_pl_config.with_overrides(threads=4))

        assert [t.to_dict() for t in parallel.tasks] == [t.to_dict() for t in sequential.tasks]
        assert parallel.sections == sequential.sections

    @pytest.mark.parametrize("threads", [1, 3])
    def test_failing_task(self, iet_pl_config, threads):
        engine = ExperimentEngine()
        engine.register_experiment(CountingExperiment(fail_at=5))

        with pytest.raises(ExperimentError) as excinfo:
            engine.run(iet_pl_config.with_overrides(threads=threads))

        assert excinfo.value.context["task"] == "n=5"
        assert excinfo.value.context["kind"] == "iet-pl"
        assert "refused" in excinfo.value.message

    def test_no_experiment_for_kind(self, counting_experiment):
        engine = ExperimentEngine()
        engine.register_experiment(counting_experiment)

        with pytest.raises(ExperimentError, match="rotation-log"):
            engine.run(experiment_from_dict({"kind": "rotation-log"}))

    def test_determine_status(self):
        engine = ExperimentEngine()

        assert engine._determine_status([], []) == "failure"

    def test_get_statistics(self):
        engine = ExperimentEngine()
        for experiment in default_experiments():
            engine.register_experiment(experiment)

        stats = engine.get_statistics()

        assert stats["total_experiments"] == 2
        assert stats["experiment_types"] == ["RotationLogExperiment", "IetFlowExperiment"]
        assert stats["kinds"] == ["iet-pc", "iet-pl", "rotation-log"]

    def test_default_experiments_cover_kinds(self):
        rotation, flow = default_experiments()

        assert isinstance(rotation, RotationLogExperiment)
        assert isinstance(flow, IetFlowExperiment)
        assert rotation.can_run(experiment_from_dict({"kind": "rotation-log"}))
        assert flow.can_run(experiment_from_dict({"kind": "iet-pc"}))
        assert not flow.can_run(experiment_from_dict({"kind": "rotation-log"}))


class TestRuntimeDefaults:
    """Thread count falls back to the runtime settings."""

    def test_threads_from_environment(self, runtime_env, mocker):
        runtime_env(ERGOSCOPE_THREADS=3)
        config = experiment_from_dict({"kind": "iet-pl", "iet_pl": {"n_min": 3, "n_max": 6}})
        engine = ExperimentEngine()
        engine.register_experiment(CountingExperiment())
        spy = mocker.spy(engine, "_run_parallel")

        bundle = engine.run(config)

        assert config.threads == 3
        spy.assert_called_once()
        assert spy.call_args.args[3] == 3
        assert "threads" not in bundle.config

    def test_file_threads_win(self, runtime_env, mocker):
        runtime_env(ERGOSCOPE_THREADS=3)
        config = experiment_from_dict({"kind": "iet-pl", "threads": 1, "iet_pl": {"n_min": 3, "n_max": 4}})
        engine = ExperimentEngine()
        engine.register_experiment(CountingExperiment())
        spy = mocker.spy(engine, "_run_parallel")

        engine.run(config)

        assert config.threads == 1
        spy.assert_not_called()

    def test_bundle_independent_of_threads(self, iet_pl_config):
        engine = ExperimentEngine()
        engine.register_experiment(CountingExperiment())

        one = engine.run(iet_pl_config.with_overrides(threads=1))
        four = engine.run(iet_pl_config.with_overrides(threads=4))

        assert one.to_dict() == four.to_dict()
