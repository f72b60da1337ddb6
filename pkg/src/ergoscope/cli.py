"""
Command-line interface for ergoscope.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on error.
"""
import logging
import sys
from pathlib import Path

import click
from rich import print as rprint
from rich.panel import Panel
from rich.table import Table

from ergoscope import __version__
from ergoscope.config import get_settings
from ergoscope.config.experiment import load_experiment_config
from ergoscope.core.engine import ExperimentEngine
from ergoscope.core.exceptions import ErgoscopeError, ExperimentError
from ergoscope.experiments import AcceptanceSuite, default_experiments
from ergoscope.reporters import MarkdownFormatter, emit_checks, emit_plot, emit_results, load_bundle, run_directory
from ergoscope.reporters.plots import PLOT_DIR
from ergoscope.reporters.writer import SUMMARY_FILE, find_bundle_dir
from ergoscope.utils import LoggerSetup, get_logger
from ergoscope.utils.cli_helpers import console, display_bundle_summary, display_checks, parse_criteria

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def _fail(error: ErgoscopeError) -> None:
    rprint(f"[red]Error: {error.message}[/red]")
    if error.details:
        rprint(f"[dim]{error.details}[/dim]")
    context = getattr(error, "context", None)
    if context:
        rprint(f"[dim]context: {context}[/dim]")
    sys.exit(EXIT_ERROR)


@click.group()
@click.version_option(version=__version__)
@click.option('--debug', is_flag=True, help='Enable debug mode')
def main(debug):
    """Rotations, interval exchanges and limit laws of Birkhoff sums."""
    if debug:
        LoggerSetup.set_console_level(logging.DEBUG)


@main.command()
@click.argument('path', required=False, type=click.Path(exists=True))
@click.option(
    "--validate",
    "-v",
    is_flag=True,
    help="Validate configuration"
)
def config(path: str, validate: bool):
    """Show and validate application settings."""
    try:
        settings = get_settings(path, reload=path is not None)

        if validate:
            errors = settings.validate()
            if errors:
                rprint("[red]❌ Configuration validation failed:[/red]")
                for error in errors:
                    rprint(f"  • {error}")
                sys.exit(EXIT_CHECK_FAILED)
            else:
                rprint("[green]✅ Configuration is valid![/green]")
                return

        rprint(Panel.fit(
            "[bold blue]ergoscope Configuration[/bold blue]",
            border_style="blue"
        ))

        table = Table(show_header=True, header_style="bold magenta")
        table.add_column("Setting", style="cyan", width=40)
        table.add_column("Value", style="green")

        def add_section(section_name: str, section_data: dict, prefix: str = ""):
            for key, value in section_data.items():
                if isinstance(value, dict):
                    add_section(f"{section_name}.{key}", value, prefix + "  ")
                else:
                    table.add_row(f"{prefix}{section_name}.{key}", str(value))

        for section_name, section_data in settings.to_dict().items():
            add_section(section_name, section_data)

        console.print(table)

    except ErgoscopeError as e:
        _fail(e)


@main.command()
@click.argument('config_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), help='Output directory (overrides the file)')
@click.option('--threads', type=click.IntRange(min=1), help='Worker threads (overrides the file)')
def run(config_path, out_dir, threads):
    """Run the experiment described by CONFIG_PATH."""
    try:
        experiment_config = load_experiment_config(config_path)
        experiment_config = experiment_config.with_overrides(output_dir=out_dir, threads=threads)

        rprint(Panel.fit(
            f"[bold blue]Running {experiment_config.kind.value}[/bold blue] "
            f"(seed {experiment_config.seed}, threads {experiment_config.threads})",
            border_style="blue"
        ))

        engine = ExperimentEngine()
        for experiment in default_experiments():
            engine.register_experiment(experiment)

        bundle = engine.run(experiment_config)
        target = run_directory(experiment_config.output_dir, bundle)
        written = emit_results(bundle, target)

    except ErgoscopeError as e:
        _fail(e)
        return

    display_bundle_summary(bundle)
    rprint(f"\n[bold]Results:[/bold] {target} ({len(written)} files)")

    if bundle.all_passed:
        rprint("[green]✅ All checks passed[/green]")
        sys.exit(EXIT_OK)

    rprint(f"[red]❌ {len(bundle.failed_checks)} checks failed:[/red]")
    for check in bundle.failed_checks:
        rprint(f"  • {check.name}: {check.summary}")
    sys.exit(EXIT_CHECK_FAILED)


@main.command()
@click.argument('config_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--only', help='Comma separated criterion numbers, e.g. 1,2,10')
@click.option('--quick', is_flag=True, help='Smaller instance counts and grids, same checks')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), help='Output directory (overrides the file)')
def verify(config_path, only, quick, out_dir):
    """Run the acceptance criteria with the seed and threads of CONFIG_PATH."""
    try:
        criteria = parse_criteria(only)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--only")

    try:
        experiment_config = load_experiment_config(config_path)
        experiment_config = experiment_config.with_overrides(output_dir=out_dir)

        suite = AcceptanceSuite(
            seed=experiment_config.seed,
            threads=experiment_config.threads,
            quick=quick,
        )
        checks = suite.run(criteria)

        target = Path(experiment_config.output_dir) / f"acceptance-seed{experiment_config.seed}"
        emit_checks(checks, target)
        (target / SUMMARY_FILE).write_text(
            MarkdownFormatter().format_acceptance(checks, quick=quick), encoding='utf-8'
        )

    except ErgoscopeError as e:
        _fail(e)
        return
    except OSError as e:
        rprint(f"[red]Error: {e}[/red]")
        sys.exit(EXIT_ERROR)

    display_checks(checks, title="Acceptance", show_time=True)
    failed = [c for c in checks if not c.passed]
    if failed:
        rprint(f"[red]❌ {len(failed)} of {len(checks)} criteria failed[/red]")
        sys.exit(EXIT_CHECK_FAILED)
    rprint(f"[green]✅ {len(checks)} criteria passed[/green]")
    sys.exit(EXIT_OK)


@main.command()
@click.argument('bundle_dir', type=click.Path(exists=True, file_okay=False))
def plot(bundle_dir):
    """Write SVG figures for the bundle in BUNDLE_DIR."""
    try:
        found = find_bundle_dir(bundle_dir)
        if found is None:
            raise ExperimentError(
                f"No bundle.json under {bundle_dir}",
                context={"bundle_dir": str(bundle_dir)},
            )
        bundle = load_bundle(found)
        paths = emit_plot(bundle, found / PLOT_DIR)
    except ErgoscopeError as e:
        _fail(e)
        return

    rprint(f"[green]✅ Wrote {len(paths)} plots to {found / PLOT_DIR}[/green]")
    for path in paths:
        rprint(f"  • {path.name}")


if __name__ == '__main__':
    main()
