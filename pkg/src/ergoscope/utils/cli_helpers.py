"""
Helper functions for CLI operations.
"""
from typing import List, Optional

from rich.console import Console
from rich.table import Table

from ergoscope.core.models import CheckResult, CheckStatus, ResultBundle

console = Console()

STATUS_STYLE = {
    CheckStatus.PASS: "green",
    CheckStatus.FAIL: "red",
    CheckStatus.REPORT: "yellow",
    CheckStatus.SKIPPED: "dim",
}


def display_checks(checks: List[CheckResult], title: Optional[str] = None, show_time: bool = False) -> None:
    """
    Display checks as a table.

    Args:
        checks: Checks to display
        title: Optional table title
        show_time: Add a column with execution times
    """
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column("Check", style="cyan")
    table.add_column("Status")
    table.add_column("Summary")
    if show_time:
        table.add_column("Time", justify="right")

    for check in checks:
        style = STATUS_STYLE.get(check.status, "white")
        row = [check.name, f"[{style}]{check.status.value}[/{style}]", check.summary]
        if show_time:
            row.append(f"{check.execution_time:.1f}s")
        table.add_row(*row)

    console.print(table)


def display_bundle_summary(bundle: ResultBundle) -> None:
    """
    Display per-task results of a bundle.

    Args:
        bundle: Result bundle
    """
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Task", style="cyan")
    table.add_column("Checks", justify="right")
    table.add_column("Failed", justify="right")
    table.add_column("Time", justify="right")

    for task in bundle.tasks:
        failed = sum(1 for c in task.checks if not c.passed)
        table.add_row(
            task.label,
            str(len(task.checks)),
            f"[red]{failed}[/red]" if failed else "0",
            f"{task.execution_time:.1f}s",
        )

    console.print(table)
    if bundle.checks:
        display_checks(bundle.checks, title="Run checks")


def parse_criteria(value: Optional[str]) -> Optional[List[int]]:
    """
    Parse ``"1,2,5"`` into criterion numbers.

    Args:
        value: Comma separated numbers, or None

    Returns:
        Sorted unique numbers, or None for all criteria

    Raises:
        ValueError: If an entry is not an integer
    """
    if not value:
        return None
    numbers = set()
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            numbers.add(int(part))
        except ValueError:
            raise ValueError(f"Not a criterion number: {part!r}")
    return sorted(numbers) or None
