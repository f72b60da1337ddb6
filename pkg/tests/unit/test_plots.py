"""Tests for SVG figures."""

from fractions import Fraction

from ergoscope.core.models import ExperimentKind, ResultBundle, TaskResult
from ergoscope.dynamics.special_flow import predicted_density
from ergoscope.reporters import emit_plot, emit_results, load_bundle

from tests.utils import snapshot_tree


def _pl_bundle():
    oracle = predicted_density(2, Fraction(1), Fraction(1, 10), rescaled=True)
    task = TaskResult(index=0, label="n=3", records={"pushforwards": {"2": {"oracle": oracle.to_dict()}}})
    task.add_rows("density", [
        {"n": 3, "i": 2, "breakpoint": Fraction(0), "value": Fraction(1, 2)},
        {"n": 3, "i": 2, "breakpoint": Fraction(2), "value": Fraction(0)},
    ])
    return ResultBundle(kind=ExperimentKind.IET_PL, config={"seed": 0}, tasks=[task])


def _tail_bundle():
    task = TaskResult(index=0, label="k=0", records={"k": 0, "fits": {"1": {"slope": -1.0, "intercept": 0.0}}})
    task.add_rows("tails", [
        {"k": 0, "w": 1, "n_k": 10, "grid_size": 100, "b": b, "mass": 2.0 ** -b}
        for b in (2.0, 3.0, 4.0)
    ])
    return ResultBundle(kind=ExperimentKind.ROTATION_LOG, config={"seed": 0}, tasks=[task])


class TestEmitPlot:
    """Test figure output per experiment kind."""

    def test_atoms(self, sample_bundle, tmp_path):
        paths = emit_plot(sample_bundle, tmp_path)

        assert [p.name for p in paths] == ["atoms_n3_i2.svg"]
        assert paths[0].read_text().lstrip().startswith("<?xml")

    def test_density_overlay(self, tmp_path):
        paths = emit_plot(_pl_bundle(), tmp_path)

        assert [p.name for p in paths] == ["density_n3_i2.svg"]

    def test_tails(self, tmp_path):
        paths = emit_plot(_tail_bundle(), tmp_path)

        assert [p.name for p in paths] == ["tails_k0.svg"]

    def test_deterministic(self, tmp_path):
        emit_plot(_pl_bundle(), tmp_path / "a")
        emit_plot(_pl_bundle(), tmp_path / "b")

        assert snapshot_tree(tmp_path / "a") == snapshot_tree(tmp_path / "b")

    def test_from_loaded_bundle(self, sample_bundle, tmp_path):
        emit_results(sample_bundle, tmp_path / "run")

        paths = emit_plot(load_bundle(tmp_path / "run"), tmp_path / "run" / "plots")

        assert len(paths) == 1
