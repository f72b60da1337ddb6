"""
Base experiment interface.
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Tuple

from ergoscope.config.experiment import ExperimentConfig
from ergoscope.core.models import (
    CheckResult,
    ExperimentKind,
    ExperimentTask,
    TaskResult,
)


class BaseExperiment(ABC):
    """
    Base class for all experiments.

    An experiment splits a configuration into independent tasks (one per
    construction level or per witness index), runs each task, and folds the
    ordered task results into run-level sections and checks.
    """

    kinds: Tuple[ExperimentKind, ...] = ()

    @abstractmethod
    def plan(self, config: ExperimentConfig) -> List[ExperimentTask]:
        """
        Split the configuration into tasks.

        Args:
            config: Validated experiment configuration

        Returns:
            Tasks with consecutive indices starting at 0; objects shared by
            all tasks (the rotation number, the induction path) travel in
            ``task.params`` and are treated as read-only
        """
        pass

    @abstractmethod
    def run_task(self, config: ExperimentConfig, task: ExperimentTask) -> TaskResult:
        """
        Run one task. Must not touch shared state.

        Args:
            config: Validated experiment configuration
            task: The task to run

        Returns:
            TaskResult with records, CSV rows and per-task checks
        """
        pass

    @abstractmethod
    def summarize(
        self, config: ExperimentConfig, results: List[TaskResult]
    ) -> Tuple[Dict[str, Any], List[CheckResult]]:
        """
        Fold task results (in index order) into sections and run-level checks.
        """
        pass

    def can_run(self, config: ExperimentConfig) -> bool:
        """
        Check if this experiment handles the given configuration.

        Args:
            config: Configuration to check

        Returns:
            True if the configuration's kind is supported
        """
        return config.kind in self.kinds
