from typing import List, Dict, Any

from ergoscope.core.helpers import jsonable
from ergoscope.core.models import (
    ResultBundle,
    CheckResult,
    CheckStatus,
)


class MarkdownFormatter:
    """Format bundles and check lists as Markdown."""

    # Symbol mapping for check outcomes
    STATUS_SYMBOL = {
        CheckStatus.PASS: "✓",
        CheckStatus.FAIL: "✗",
        CheckStatus.REPORT: "i",
        CheckStatus.SKIPPED: "→",
    }

    STATUS_LABELS = {
        CheckStatus.PASS: "[PASS]",
        CheckStatus.FAIL: "[FAIL]",
        CheckStatus.REPORT: "[REPORT]",
        CheckStatus.SKIPPED: "[SKIPPED]",
    }

    HIGHLIGHT_KEYS = ["slopes", "gamma_n", "Leb_X", "ks", "interior_error", "rescaled_ks_K_L"]

    def format_check(self, check: CheckResult) -> str:
        """
        Format a single check as one list item.

        Args:
            check: Check to format

        Returns:
            Formatted markdown string
        """
        symbol = self.STATUS_SYMBOL.get(check.status, "•")
        label = self.STATUS_LABELS.get(check.status, "[NOTE]")
        line = f"- {symbol} {label} `{check.name}`"
        if check.summary:
            line += f": {check.summary}"
        return line

    def format_checks_table(self, checks: List[CheckResult]) -> str:
        """
        Format checks as a table with a status count line.

        Args:
            checks: Checks to format

        Returns:
            Formatted markdown string
        """
        lines = []
        lines.append("| Check | Status | Summary |")
        lines.append("|-------|--------|---------|")
        for check in checks:
            summary = check.summary.replace("|", "\\|")
            lines.append(f"| `{check.name}` | {check.status.value} | {summary} |")
        lines.append("")
        lines.append(self._counts_line(checks))
        return "\n".join(lines)

    def _counts_line(self, checks: List[CheckResult]) -> str:
        counts = {status: 0 for status in CheckStatus}
        for check in checks:
            counts[check.status] += 1
        return ", ".join(f"{counts[s]} {s.value}" for s in CheckStatus)

    def format_bundle(self, bundle: ResultBundle) -> str:
        """
        Format complete run summary.

        Args:
            bundle: Result bundle to format

        Returns:
            Formatted markdown string
        """
        lines = []

        # Header
        lines.append(f"## Experiment Report: {bundle.kind.value}")
        lines.append("")

        status_symbol = "✓" if bundle.status == "success" else "✗"
        lines.append(f"**Status:** {status_symbol} {bundle.status.replace('_', ' ').title()}")
        lines.append("")

        # Configuration echo
        lines.append("### Configuration")
        lines.append("")
        config = jsonable(bundle.config)
        for key in sorted(config):
            value = config[key]
            if isinstance(value, dict):
                lines.append(f"- **{key}:**")
                for sub in sorted(value):
                    lines.append(f"  - {sub}: `{value[sub]}`")
            else:
                lines.append(f"- **{key}:** `{value}`")
        lines.append("")

        # Summary statistics
        all_checks = bundle.all_checks
        lines.append("### Summary")
        lines.append("")
        lines.append(f"- **Tasks:** {len(bundle.tasks)}")
        lines.append(f"- **Checks:** {len(all_checks)}")
        lines.append(f"- **Failed Checks:** {len(bundle.failed_checks)}")
        lines.append("")

        highlights = self.format_sections(bundle.sections, self.HIGHLIGHT_KEYS)
        if highlights:
            lines.append("### Highlights")
            lines.append("")
            lines.append(highlights)
            lines.append("")

        # Per-task checks
        lines.append("### Tasks")
        lines.append("")
        for task in bundle.tasks:
            failed = [c for c in task.checks if not c.passed]
            marker = "✓" if not failed and task.success else "✗"
            lines.append(f"- {marker} **{task.label}**: {len(task.checks)} checks, {len(failed)} failed")
        lines.append("")

        if bundle.checks:
            lines.append("### Run Checks")
            lines.append("")
            for check in bundle.checks:
                lines.append(self.format_check(check))
            lines.append("")

        if bundle.failed_checks:
            lines.append("### Failures")
            lines.append("")
            for check in bundle.failed_checks:
                lines.append(self.format_check(check))
            lines.append("")

        lines.append("---")
        lines.append(f"*{self._counts_line(all_checks)}*")
        lines.append("")
        return "\n".join(lines)

    def format_acceptance(self, checks: List[CheckResult], quick: bool = False) -> str:
        """
        Format an acceptance run.

        Args:
            checks: One result per criterion
            quick: Whether the reduced sizes were used

        Returns:
            Formatted markdown string
        """
        lines = []
        lines.append("## Acceptance Report")
        lines.append("")
        if quick:
            lines.append("*Reduced instance counts and grids (`--quick`).*")
            lines.append("")
        lines.append(self.format_checks_table(checks))
        lines.append("")
        return "\n".join(lines)

    def format_sections(self, sections: Dict[str, Any], keys: List[str]) -> str:
        """Selected run-level sections as key/value bullets."""
        lines = []
        data = jsonable(sections)
        for key in keys:
            if key in data:
                lines.append(f"- **{key}:** `{data[key]}`")
        return "\n".join(lines)
