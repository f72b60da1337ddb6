"""
Core data models for ergoscope experiment runs.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Dict, Any
from enum import Enum

from ergoscope.core.helpers import jsonable
from ergoscope.utils import get_logger

logger = get_logger(__name__)

CSV_TABLES = ("atoms", "density", "tails", "construction")


class ExperimentKind(Enum):
    """The three experiment families."""
    ROTATION_LOG = "rotation-log"
    IET_PC = "iet-pc"
    IET_PL = "iet-pl"

    @property
    def block(self) -> str:
        """Name of the parameter block in a config file."""
        return self.value.replace("-", "_")


class CheckStatus(Enum):
    """Outcome of a single check."""
    PASS = "pass"
    FAIL = "fail"
    REPORT = "report"
    SKIPPED = "skipped"


@dataclass
class CheckResult:
    """
    Outcome of one verifiable property.

    Attributes:
        name: Short identifier, e.g. ``"rigidity"``
        status: Pass, fail, report-only or skipped
        summary: One-line human readable outcome
        details: Measured values backing the outcome
        execution_time: Seconds spent; not serialized
    """
    name: str
    status: CheckStatus = CheckStatus.PASS
    summary: str = ""
    details: Dict[str, Any] = field(default_factory=dict)
    execution_time: float = 0.0

    def __post_init__(self):
        """Post-initialization processing."""
        if isinstance(self.status, str):
            self.status = CheckStatus(self.status.lower())

        logger.debug(f"Created CheckResult {self.name}: {self.status.value}")

    @classmethod
    def from_bool(cls, name: str, ok: bool, summary: str = "", **details: Any) -> "CheckResult":
        return cls(
            name=name,
            status=CheckStatus.PASS if ok else CheckStatus.FAIL,
            summary=summary,
            details=details,
        )

    @property
    def passed(self) -> bool:
        """Report-only and skipped checks never fail a run."""
        return self.status != CheckStatus.FAIL

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'status': self.status.value,
            'summary': self.summary,
            'details': jsonable(self.details),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CheckResult":
        return cls(
            name=data['name'],
            status=data.get('status', 'pass'),
            summary=data.get('summary', ''),
            details=data.get('details', {}),
        )


@dataclass
class ExperimentTask:
    """
    One unit of work handed to a worker.

    Attributes:
        index: Position used to merge results in order
        label: Human readable tag, e.g. ``"n=5"``
        params: Task parameters (``{"n": 5}`` or ``{"k": 0}``)
    """
    index: int
    label: str
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass
class TaskResult:
    """
    Results produced by one task.

    Attributes:
        index: Index of the originating task
        label: Label of the originating task
        records: Structured per-task results
        rows: CSV rows keyed by table name
        checks: Per-task checks
        success: False when the task raised
        error_message: The error when ``success`` is False
        execution_time: Seconds spent; not serialized
    """
    index: int
    label: str
    records: Dict[str, Any] = field(default_factory=dict)
    rows: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)
    success: bool = True
    error_message: Optional[str] = None
    execution_time: float = 0.0

    def __post_init__(self):
        """Post-initialization processing."""
        logger.debug(
            f"Created TaskResult {self.label}: {len(self.checks)} checks, success={self.success}"
        )

    def add_rows(self, table: str, rows: List[Dict[str, Any]]) -> None:
        if table not in CSV_TABLES:
            raise ValueError(f"Unknown table {table!r}; expected one of {CSV_TABLES}")
        self.rows.setdefault(table, []).extend(rows)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'index': self.index,
            'label': self.label,
            'records': jsonable(self.records),
            'rows': jsonable(self.rows),
            'checks': [c.to_dict() for c in self.checks],
            'success': self.success,
            'error_message': self.error_message,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TaskResult":
        return cls(
            index=data['index'],
            label=data['label'],
            records=data.get('records', {}),
            rows=data.get('rows', {}),
            checks=[CheckResult.from_dict(c) for c in data.get('checks', [])],
            success=data.get('success', True),
            error_message=data.get('error_message'),
        )


@dataclass
class ResultBundle:
    """
    Everything one experiment run produced.

    No timestamps or timings are serialized, so identical configurations give
    identical bundles.

    Attributes:
        kind: The experiment family
        config: Echo of the validated configuration
        tasks: Per-task results in index order
        sections: Run-level summaries (fits, comparisons, witnesses)
        checks: Run-level checks
        status: ``"success"``, ``"partial_failure"`` or ``"failure"``
    """
    kind: ExperimentKind
    config: Dict[str, Any] = field(default_factory=dict)
    tasks: List[TaskResult] = field(default_factory=list)
    sections: Dict[str, Any] = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)
    status: str = "success"

    def __post_init__(self):
        """Post-initialization processing."""
        if isinstance(self.kind, str):
            self.kind = ExperimentKind(self.kind)
        self.tasks.sort(key=lambda t: t.index)

        logger.info(
            f"Created ResultBundle for {self.kind.value}: "
            f"{len(self.tasks)} tasks, {len(self.all_checks)} checks"
        )

    @property
    def all_checks(self) -> List[CheckResult]:
        """Per-task checks in task order, then run-level checks."""
        checks = []
        for task in self.tasks:
            checks.extend(task.checks)
        checks.extend(self.checks)
        return checks

    @property
    def failed_checks(self) -> List[CheckResult]:
        return [c for c in self.all_checks if not c.passed]

    @property
    def all_passed(self) -> bool:
        return not self.failed_checks and all(t.success for t in self.tasks)

    def table(self, name: str) -> List[Dict[str, Any]]:
        """Concatenated CSV rows of one table, in task order."""
        rows = []
        for task in self.tasks:
            rows.extend(task.rows.get(name, []))
        return rows

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind.value,
            'config': jsonable(self.config),
            'tasks': [t.to_dict() for t in self.tasks],
            'sections': jsonable(self.sections),
            'checks': [c.to_dict() for c in self.checks],
            'status': self.status,
            'summary': {
                'tasks': len(self.tasks),
                'failed_tasks': sum(1 for t in self.tasks if not t.success),
                'checks': len(self.all_checks),
                'failed_checks': len(self.failed_checks),
            }
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ResultBundle":
        return cls(
            kind=data['kind'],
            config=data.get('config', {}),
            tasks=[TaskResult.from_dict(t) for t in data.get('tasks', [])],
            sections=data.get('sections', {}),
            checks=[CheckResult.from_dict(c) for c in data.get('checks', [])],
            status=data.get('status', 'success'),
        )
