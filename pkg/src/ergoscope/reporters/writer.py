"""
Result persistence.

A run directory holds ``bundle.json``, ``checks.json``, the four CSV tables
and ``summary.md``. Every file is a pure function of the bundle, so writing
the same bundle twice gives byte-identical files.
"""
import csv
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from ergoscope.core.exceptions import IoError
from ergoscope.core.helpers import frac_to_str, jsonable, stable_json_dumps
from ergoscope.core.models import CSV_TABLES, CheckResult, ResultBundle
from ergoscope.reporters.formatter import MarkdownFormatter
from ergoscope.utils import get_logger

logger = get_logger(__name__)

CSV_COLUMNS: Dict[str, List[str]] = {
    "atoms": ["n", "i", "location", "mass"],
    "density": ["n", "i", "breakpoint", "value"],
    "tails": ["k", "w", "n_k", "grid_size", "b", "mass"],
    "construction": [
        "n", "q_n", "Delta_n", "gamma_n", "Leb_W", "Leb_Z", "Leb_U", "Leb_X", "partition_ok",
    ],
}

BUNDLE_FILE = "bundle.json"
CHECKS_FILE = "checks.json"
SUMMARY_FILE = "summary.md"


def _cell(value: Any) -> str:
    if isinstance(value, Fraction):
        return frac_to_str(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(jsonable(value))


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
    except OSError as e:
        raise IoError(f"Cannot write {path}", details=str(e)) from e


def _write_csv(*, path: Path, fieldnames: Sequence[str], rows: Iterable[Dict[str, Any]]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            w = csv.DictWriter(f, fieldnames=list(fieldnames), extrasaction="ignore", lineterminator="\n")
            w.writeheader()
            for row in rows:
                w.writerow({k: _cell(row.get(k)) for k in fieldnames})
    except OSError as e:
        raise IoError(f"Cannot write {path}", details=str(e)) from e


def run_directory(base: Union[str, Path], bundle: ResultBundle) -> Path:
    """``<base>/<kind>-seed<seed>``."""
    seed = bundle.config.get("seed", 0)
    return Path(base) / f"{bundle.kind.value}-seed{seed}"


def checks_payload(checks: List[CheckResult]) -> Dict[str, Any]:
    return {
        "checks": [c.to_dict() for c in checks],
        "failed": [c.name for c in checks if not c.passed],
        "passed": all(c.passed for c in checks),
    }


def emit_results(
    bundle: ResultBundle,
    out_dir: Union[str, Path],
    formats: Sequence[str] = ("json", "csv"),
) -> Dict[str, Path]:
    """
    Write a bundle into ``out_dir``.

    Args:
        bundle: Complete result bundle
        out_dir: Target directory, created if missing
        formats: Any of ``"json"`` and ``"csv"``

    Returns:
        Mapping from artifact name to written path

    Raises:
        IoError: If a file cannot be written
        ValueError: If a format is unknown
    """
    unknown = [f for f in formats if f not in ("json", "csv")]
    if unknown:
        raise ValueError(f"Unknown output formats: {unknown}")

    out_dir = Path(out_dir)
    written: Dict[str, Path] = {}

    if "json" in formats:
        path = out_dir / BUNDLE_FILE
        _write_text(path, stable_json_dumps(bundle.to_dict()))
        written["bundle"] = path
        path = out_dir / CHECKS_FILE
        _write_text(path, stable_json_dumps(checks_payload(bundle.all_checks)))
        written["checks"] = path

    if "csv" in formats:
        for table in CSV_TABLES:
            path = out_dir / f"{table}.csv"
            _write_csv(path=path, fieldnames=CSV_COLUMNS[table], rows=bundle.table(table))
            written[table] = path

    path = out_dir / SUMMARY_FILE
    _write_text(path, MarkdownFormatter().format_bundle(bundle))
    written["summary"] = path

    logger.info(f"Wrote {len(written)} result files to {out_dir}")
    return written


def emit_checks(checks: List[CheckResult], out_dir: Union[str, Path]) -> Path:
    """``checks.json`` for an acceptance run."""
    path = Path(out_dir) / CHECKS_FILE
    _write_text(path, stable_json_dumps(checks_payload(checks)))
    return path


def load_bundle(bundle_dir: Union[str, Path]) -> ResultBundle:
    """
    Read ``bundle.json`` back.

    Values come back in their serialized form (rationals as ``"num/den"``).

    Raises:
        IoError: If the file is missing or is not a bundle
    """
    path = Path(bundle_dir) / BUNDLE_FILE
    if not path.exists():
        raise IoError(f"No {BUNDLE_FILE} in {bundle_dir}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        return ResultBundle.from_dict(data)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as e:
        raise IoError(f"Cannot read bundle {path}", details=str(e)) from e


def read_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Rows of a written table."""
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            return list(csv.DictReader(f))
    except OSError as e:
        raise IoError(f"Cannot read {path}", details=str(e)) from e


def find_bundle_dir(path: Union[str, Path]) -> Optional[Path]:
    """``path`` itself or its single sub-directory holding ``bundle.json``."""
    path = Path(path)
    if (path / BUNDLE_FILE).exists():
        return path
    candidates = sorted(p.parent for p in path.glob(f"*/{BUNDLE_FILE}"))
    return candidates[0] if len(candidates) == 1 else None
