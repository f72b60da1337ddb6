from .formatter import MarkdownFormatter
from .writer import emit_results, emit_checks, load_bundle, run_directory
from .plots import emit_plot

__all__ = [
    "MarkdownFormatter",
    "emit_results",
    "emit_checks",
    "load_bundle",
    "run_directory",
    "emit_plot",
]
