"""
Utility functions for testing.
"""

import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List

import yaml

from ergoscope.core import CheckResult, CheckStatus, ExperimentKind, ExperimentTask, TaskResult
from ergoscope.core.exceptions import InvariantViolated
from ergoscope.experiments import BaseExperiment


class CountingExperiment(BaseExperiment):
    """Cheap experiment: one task per level, each checking ``n`` is odd or even."""

    kinds = (ExperimentKind.IET_PL,)

    def __init__(self, delay: float = 0.0, fail_at: int = -1):
        self.delay = delay
        self.fail_at = fail_at

    def plan(self, config) -> List[ExperimentTask]:
        return [
            ExperimentTask(index=i, label=f"n={n}", params={"n": n})
            for i, n in enumerate(config.params.n_values)
        ]

    def run_task(self, config, task) -> TaskResult:
        n = task.params["n"]
        # later tasks finish first under a pool
        time.sleep(self.delay / n)
        if n == self.fail_at:
            raise InvariantViolated(f"level {n} refused")
        result = TaskResult(index=task.index, label=task.label, records={"n": n, "half": Fraction(n, 2)})
        result.add_rows("construction", [{"n": n, "q_n": 2 * n}])
        result.checks.append(CheckResult.from_bool(f"even_{n}", n % 2 == 0, f"n={n}"))
        return result

    def summarize(self, config, results):
        total = sum(r.records["n"] for r in results)
        return {"total": total}, [CheckResult("total", CheckStatus.REPORT, f"sum {total}")]


def fixture_path(filename: str) -> Path:
    """Absolute path of a fixture file."""
    return Path(__file__).parent / "fixtures" / filename


def load_fixture_file(filename: str) -> str:
    """
    Load content from a fixture file.

    Args:
        filename: Name of the fixture file

    Returns:
        File content as string
    """
    with open(fixture_path(filename), 'r', encoding='utf-8') as f:
        return f.read()


def load_yaml_fixture(filename: str) -> Dict[str, Any]:
    """
    Load YAML fixture file.

    Args:
        filename: Name of the YAML fixture file

    Returns:
        Parsed YAML data
    """
    content = load_fixture_file(filename)
    return yaml.safe_load(content)


def snapshot_tree(root: Path) -> Dict[str, bytes]:
    """Relative path to bytes for every file under ``root``."""
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }
