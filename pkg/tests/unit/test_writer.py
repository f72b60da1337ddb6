"""Tests for result persistence."""

import json

import pytest

from ergoscope.core.exceptions import IoError
from ergoscope.core.models import CSV_TABLES, CheckResult, CheckStatus
from ergoscope.reporters import emit_checks, emit_results, load_bundle, run_directory
from ergoscope.reporters.writer import (
    BUNDLE_FILE,
    CHECKS_FILE,
    CSV_COLUMNS,
    SUMMARY_FILE,
    find_bundle_dir,
    read_csv,
)

from tests.utils import snapshot_tree


class TestEmitResults:
    """Test writing a bundle to disk."""

    def test_writes_every_artifact(self, sample_bundle, tmp_path):
        written = emit_results(sample_bundle, tmp_path)

        assert set(written) == {"bundle", "checks", "summary", *CSV_TABLES}
        for path in written.values():
            assert path.exists()

    def test_csv_headers_always_present(self, sample_bundle, tmp_path):
        emit_results(sample_bundle, tmp_path)

        for table in CSV_TABLES:
            header = (tmp_path / f"{table}.csv").read_text().splitlines()[0]
            assert header == ",".join(CSV_COLUMNS[table])

    def test_csv_exact_values(self, sample_bundle, tmp_path):
        emit_results(sample_bundle, tmp_path)

        atoms = read_csv(tmp_path / "atoms.csv")
        construction = read_csv(tmp_path / "construction.csv")

        assert atoms[0] == {"n": "3", "i": "2", "location": "0/1", "mass": "1/2"}
        assert [r["n"] for r in construction] == ["3", "4"]
        assert construction[0]["partition_ok"] == ""

    def test_checks_file(self, sample_bundle, tmp_path):
        emit_results(sample_bundle, tmp_path)

        payload = json.loads((tmp_path / CHECKS_FILE).read_text())

        assert payload["failed"] == ["atom_count"]
        assert payload["passed"] is False

    def test_byte_identical_rewrite(self, sample_bundle, tmp_path):
        emit_results(sample_bundle, tmp_path / "a")
        emit_results(sample_bundle, tmp_path / "b")

        assert snapshot_tree(tmp_path / "a") == snapshot_tree(tmp_path / "b")

    def test_json_only(self, sample_bundle, tmp_path):
        written = emit_results(sample_bundle, tmp_path, formats=("json",))

        assert "atoms" not in written
        assert (tmp_path / SUMMARY_FILE).exists()

    def test_unknown_format(self, sample_bundle, tmp_path):
        with pytest.raises(ValueError):
            emit_results(sample_bundle, tmp_path, formats=("xml",))

    def test_unwritable_target(self, sample_bundle, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")

        with pytest.raises(IoError):
            emit_results(sample_bundle, blocker / "out")


class TestLoadBundle:
    """Test reading bundles back."""

    def test_round_trip(self, sample_bundle, tmp_path):
        emit_results(sample_bundle, tmp_path)

        bundle = load_bundle(tmp_path)

        assert bundle.kind is sample_bundle.kind
        assert [c.name for c in bundle.failed_checks] == ["atom_count"]
        assert bundle.table("atoms")[1]["mass"] == "1/2"

    def test_missing(self, tmp_path):
        with pytest.raises(IoError):
            load_bundle(tmp_path)

    def test_corrupt(self, tmp_path):
        (tmp_path / BUNDLE_FILE).write_text("{not json")

        with pytest.raises(IoError):
            load_bundle(tmp_path)


def test_run_directory(sample_bundle, tmp_path):
    assert run_directory(tmp_path, sample_bundle) == tmp_path / "iet-pc-seed0"


def test_find_bundle_dir(sample_bundle, tmp_path):
    target = run_directory(tmp_path, sample_bundle)
    emit_results(sample_bundle, target)

    assert find_bundle_dir(target) == target
    assert find_bundle_dir(tmp_path) == target
    assert find_bundle_dir(target / "plots") is None


def test_emit_checks(tmp_path):
    checks = [CheckResult("criterion_1"), CheckResult("criterion_2", CheckStatus.SKIPPED)]

    path = emit_checks(checks, tmp_path / "acceptance-seed0")

    assert json.loads(path.read_text())["passed"] is True
