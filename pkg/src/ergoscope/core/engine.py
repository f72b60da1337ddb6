"""
Experiment Engine - Orchestrates experiment runs.
"""
from typing import List, Optional, Dict, Any
import time
from concurrent.futures import ThreadPoolExecutor, as_completed

from ergoscope.utils import get_logger
from ergoscope.config import get_settings
from ergoscope.config.experiment import ExperimentConfig
from .models import (
    CheckResult,
    CheckStatus,
    ExperimentTask,
    ResultBundle,
    TaskResult,
)
from .exceptions import ErgoscopeError, ExperimentError


logger = get_logger(__name__)


class ExperimentEngine:
    """
    Main engine for running experiments.

    The engine picks the registered experiment for a configuration, fans its
    tasks out to a worker pool and merges the results in task order, so the
    bundle does not depend on completion order.
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        """
        Initialize the experiment engine.

        Args:
            config: Optional configuration override
        """
        self.settings = get_settings()
        self.config = config or {}
        self.experiments = []

        logger.info("ExperimentEngine initialized")

    def register_experiment(self, experiment: Any) -> None:
        """
        Register an experiment.

        Args:
            experiment: Experiment instance (must have plan(), run_task() and
                summarize() methods)
        """
        for method in ('plan', 'run_task', 'summarize'):
            if not hasattr(experiment, method):
                raise ValueError(f"Experiment {experiment} must have a '{method}' method")

        self.experiments.append(experiment)
        logger.info(f"Registered experiment: {experiment.__class__.__name__}")

    def run(self, config: ExperimentConfig) -> ResultBundle:
        """
        Run the experiment matching ``config.kind``.

        Args:
            config: Validated experiment configuration

        Returns:
            ResultBundle with per-task results and run-level checks

        Raises:
            ExperimentError: If no experiment handles the kind, or any task
                fails; the context names the kind and the failing task
        """
        experiment = self._select(config)
        threads = config.threads
        logger.info(
            f"Starting {config.kind.value} with {experiment.__class__.__name__} "
            f"(seed={config.seed}, threads={threads})"
        )

        start_time = time.time()

        try:
            tasks = experiment.plan(config)
            logger.info(f"Planned {len(tasks)} tasks")

            if threads > 1 and len(tasks) > 1:
                results = self._run_parallel(experiment, config, tasks, threads)
            else:
                results = self._run_sequential(experiment, config, tasks)

            sections, checks = experiment.summarize(config, results)

        except ExperimentError:
            raise
        except ErgoscopeError as e:
            raise ExperimentError(
                f"{config.kind.value} failed: {e.message}",
                context={"kind": config.kind.value},
                details=e.details,
            ) from e
        except Exception as e:
            logger.error(f"Experiment failed: {e}", exc_info=True)
            raise ExperimentError(
                f"{config.kind.value} failed",
                context={"kind": config.kind.value},
                details=str(e),
            ) from e

        echo = config.to_dict()
        # bundles do not depend on output location or thread count
        echo.pop("output_dir", None)
        echo.pop("threads", None)
        status = self._determine_status(results, checks)
        bundle = ResultBundle(
            kind=config.kind,
            config=echo,
            tasks=results,
            sections=sections,
            checks=checks,
            status=status,
        )

        execution_time = time.time() - start_time
        logger.info(
            f"Experiment complete - {len(results)} tasks, "
            f"{len(bundle.failed_checks)} failed checks, "
            f"status: {status} ({execution_time:.2f}s)"
        )
        return bundle

    def _select(self, config: ExperimentConfig) -> Any:
        for experiment in self.experiments:
            can_run = getattr(experiment, 'can_run', None)
            if can_run is None or can_run(config):
                return experiment
        raise ExperimentError(
            f"No registered experiment handles kind '{config.kind.value}'",
            context={"kind": config.kind.value},
        )

    def _run_sequential(
        self,
        experiment: Any,
        config: ExperimentConfig,
        tasks: List[ExperimentTask]
    ) -> List[TaskResult]:
        """
        Run tasks one after another, stopping at the first failure.

        Args:
            experiment: The selected experiment
            config: Experiment configuration
            tasks: Planned tasks

        Returns:
            Task results in index order
        """
        return [self._run_task(experiment, config, task) for task in tasks]

    def _run_parallel(
        self,
        experiment: Any,
        config: ExperimentConfig,
        tasks: List[ExperimentTask],
        threads: int
    ) -> List[TaskResult]:
        """
        Run tasks on a thread pool and merge by task index.

        Pending tasks are cancelled once one task fails.

        Args:
            experiment: The selected experiment
            config: Experiment configuration
            tasks: Planned tasks
            threads: Worker count

        Returns:
            Task results in index order
        """
        max_workers = min(threads, len(tasks))
        logger.debug(f"Using {max_workers} parallel workers")

        results: Dict[int, TaskResult] = {}

        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            future_to_task = {
                executor.submit(self._run_task, experiment, config, task): task
                for task in tasks
            }

            for future in as_completed(future_to_task):
                task = future_to_task[future]
                try:
                    results[task.index] = future.result()
                except Exception:
                    for pending in future_to_task:
                        pending.cancel()
                    raise

        return [results[i] for i in sorted(results)]

    def _run_task(
        self,
        experiment: Any,
        config: ExperimentConfig,
        task: ExperimentTask
    ) -> TaskResult:
        """
        Run a single task with error handling.

        Args:
            experiment: The selected experiment
            config: Experiment configuration
            task: The task

        Returns:
            The task result

        Raises:
            ExperimentError: Wrapping any failure, with the task in the context
        """
        experiment_name = experiment.__class__.__name__

        try:
            start_time = time.time()
            result = experiment.run_task(config, task)
            result.execution_time = time.time() - start_time
            logger.debug(
                f"{experiment_name} finished {task.label} "
                f"in {result.execution_time:.2f}s"
            )
            return result

        except ErgoscopeError as e:
            raise ExperimentError(
                f"{config.kind.value} task {task.label} failed: {e.message}",
                context={"kind": config.kind.value, "task": task.label,
                         **{k: v for k, v in task.params.items() if isinstance(v, (int, str))}},
                details=e.details,
            ) from e
        except Exception as e:
            logger.error(
                f"{experiment_name} failed for {task.label}: {e}",
                exc_info=True
            )
            raise ExperimentError(
                f"{config.kind.value} task {task.label} failed",
                context={"kind": config.kind.value, "task": task.label},
                details=str(e),
            ) from e

    def _determine_status(
        self,
        results: List[TaskResult],
        checks: List[CheckResult]
    ) -> str:
        """
        Determine overall run status from task and check outcomes.

        Args:
            results: Task results
            checks: Run-level checks

        Returns:
            Status string: "success", "partial_failure", or "failure"
        """
        if not results:
            return "failure"

        all_checks = [c for r in results for c in r.checks] + list(checks)
        decided = [c for c in all_checks if c.status in (CheckStatus.PASS, CheckStatus.FAIL)]
        failed = [c for c in decided if c.status == CheckStatus.FAIL]

        if decided and len(failed) == len(decided):
            return "failure"
        elif failed or any(not r.success for r in results):
            return "partial_failure"
        else:
            return "success"

    def get_statistics(self) -> Dict[str, Any]:
        """
        Get statistics about registered experiments.

        Returns:
            Dictionary with experiment statistics
        """
        return {
            "total_experiments": len(self.experiments),
            "experiment_types": [
                experiment.__class__.__name__
                for experiment in self.experiments
            ],
            "kinds": sorted(
                kind.value
                for experiment in self.experiments
                for kind in getattr(experiment, 'kinds', ())
            ),
        }
