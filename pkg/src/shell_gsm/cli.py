"""
Command Line Interface for shell-gsm
Every task subcommand runs a scenario file and writes CSV outputs plus a manifest
"""

import functools
import logging
import sys
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from . import __version__, config
from .errors import (
    CompositionError,
    ConfigError,
    DegenerateModeError,
    DomainError,
    GeometryError,
    GSMFormatError,
    StiffnessError,
)
from .runner import RunOptions, RunResult, ScenarioRunner, run_validation
from .scenario import parse_config

console = Console()

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VALIDATION = 4

NUMERIC_ERRORS = (DegenerateModeError, StiffnessError, CompositionError, DomainError, GeometryError)


def setup_logging(verbose: int) -> None:
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logger = logging.getLogger("shell_gsm")
    logger.handlers.clear()
    logger.addHandler(RichHandler(console=console, show_path=verbose > 1, rich_tracebacks=True))
    logger.setLevel(level)
    logger.propagate = False


def run_options(fn: Callable) -> Callable:
    """Options shared by every scenario task"""
    options = [
        click.option("--config", "-c", "config_path", type=click.Path(dir_okay=False, path_type=Path), required=True, help="Scenario TOML file"),
        click.option("--out", "-o", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=Path("out"), show_default=True, help="Output folder"),
        click.option("--threads", "-j", type=int, default=config.DEFAULT_THREADS, show_default=True, help="Worker threads"),
        click.option("--lmax-override", type=int, default=None, help="Truncation degree (bypasses the cap)"),
        click.option("--tol", type=float, default=None, help="Radial integrator tolerance"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def report_error(e: Exception, verbose: int) -> None:
    console.print(f"\n[bold red]❌ {type(e).__name__}: {e}[/bold red]")
    if verbose:
        console.print_exception()


def guarded(fn: Callable) -> Callable:
    """Map package errors to exit codes"""

    @functools.wraps(fn)
    @click.pass_context
    def wrapper(ctx: click.Context, *args, **kwargs):
        verbose = ctx.obj.get("verbose", 0) if ctx.obj else 0
        try:
            code = fn(*args, **kwargs)
        except (ConfigError, GSMFormatError) as e:
            report_error(e, verbose)
            sys.exit(EXIT_CONFIG)
        except NUMERIC_ERRORS as e:
            report_error(e, verbose)
            sys.exit(EXIT_NUMERIC)
        sys.exit(code or EXIT_OK)

    return wrapper


def summarize(result: RunResult) -> None:
    manifest = result.manifest
    table = Table(title=f"Task {manifest.task}", show_header=True, header_style="bold cyan")
    table.add_column("Output")
    table.add_column("sha256", style="dim")
    for name, digest in manifest.outputs.items():
        table.add_row(name, digest[:16])
    console.print(table)
    timings = ", ".join(f"{k} {v:.2f}s" for k, v in manifest.timings_s.items())
    console.print(f"[dim]lmax={manifest.lmax}  {timings}[/dim]")


def print_checks(result: RunResult) -> None:
    table = Table(title="Validation", show_header=True, header_style="bold cyan")
    for column in ("Check", "Result", "Value", "Threshold", "Detail", "Time"):
        table.add_column(column)
    for c in result.checks:
        mark = "[green]pass[/green]" if c.passed else "[bold red]FAIL[/bold red]"
        table.add_row(c.name, mark, f"{c.value:.3g}", f"{c.threshold:.0e}", c.detail, f"{c.seconds:.2f}s")
    console.print(table)


def run_task(kind: str, config_path: Path, out_dir: Path, threads: int, lmax_override: Optional[int], tol: Optional[float]) -> int:
    cfg = parse_config(config_path)
    options = RunOptions(out_dir, threads, lmax_override, tol, config_path)
    console.print(Panel.fit(
        f"[bold cyan]🌐 shell-gsm[/bold cyan]\n"
        f"Task: {kind}\n"
        f"Scenario: {config_path}\n"
        f"Antenna: {cfg.antenna.gsm_file}",
        title="Starting run",
    ))
    result = ScenarioRunner(cfg, options).run(kind)
    summarize(result)
    if result.checks:
        print_checks(result)
        if not result.passed:
            return EXIT_VALIDATION
    console.print(f"\n[bold green]✅ Wrote {len(result.outputs)} files to {out_dir}[/bold green]")
    return EXIT_OK


@click.group()
@click.version_option(version=__version__, prog_name="shellgsm")
@click.option("--verbose", "-v", count=True, help="-v for progress, -vv for solver detail")
@click.pass_context
def main(ctx: click.Context, verbose: int):
    """
    🌐 shell-gsm - antennas inside layered spherical shells

    Computes the scattering operators of a radially stratified, uniaxially
    anisotropic shell and composes them with an antenna's generalized
    scattering matrix.
    """
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    setup_logging(verbose)


def _task_command(kind: str, summary: str) -> None:
    @main.command(name=kind, help=summary)
    @run_options
    @guarded
    def command(config_path, out_dir, threads, lmax_override, tol):
        return run_task(kind, config_path, out_dir, threads, lmax_override, tol)


_task_command("sso", "Shell operators t, Phi, rho, Psi per (tau, l, frequency) -> sso.csv")
_task_command("compose", "Effective GSM of antenna plus shell -> effective_gsm.json, sparams.csv")
_task_command("sparams", "Port reflection of the embedded antenna -> sparams.csv")
_task_command("pattern", "Gain and far field on principal cuts -> fields.csv, efficiency.csv")
_task_command("rcs", "Bistatic and monostatic RCS with ports unexcited -> fields.csv")
_task_command("sweep", "Material sweep of one layer with the antenna loaded once -> sweep_sparams.csv")


@main.command()
@click.option("--config", "-c", "config_path", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Scenario TOML file (optional)")
@click.option("--out", "-o", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=Path("out"), show_default=True)
@click.option("--threads", "-j", type=int, default=config.DEFAULT_THREADS, show_default=True)
@click.option("--lmax-override", type=int, default=None, hidden=True)
@click.option("--tol", type=float, default=None, hidden=True)
@click.option("--full", is_flag=True, help="Full-size random trials plus the staircase convergence checks")
@click.option("--seed", type=int, default=0, show_default=True)
@guarded
def validate(config_path, out_dir, threads, lmax_override, tol, full, seed):
    """
    Run the oracle checks and print a pass/fail table.

    Example:
        shellgsm validate --out results/
    """
    if config_path is not None:
        return run_task("validate", config_path, out_dir, threads, lmax_override, tol)
    result = run_validation(RunOptions(out_dir, threads), seed=seed, quick=not full)
    print_checks(result)
    if not result.passed:
        console.print(f"\n[bold red]❌ {result.manifest.checks_failed} checks failed[/bold red]")
        return EXIT_VALIDATION
    console.print("\n[bold green]✅ All checks passed[/bold green]")
    return EXIT_OK


@main.command()
@click.argument("path", required=False)
@click.option("--force", is_flag=True, help="Overwrite an existing file")
def init(path: Optional[str], force: bool):
    """
    Write an example scenario: a lossy dielectric shell around a transparent antenna.

    Example:
        shellgsm init shell.toml
    """
    target = Path(path or "scenario.toml")
    if target.exists() and not force:
        console.print(f"[yellow]{target} exists; pass --force to overwrite[/yellow]")
        sys.exit(1)
    template = resources.files("shell_gsm").joinpath("templates/scenario.toml").read_text(encoding="utf-8")
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(template, encoding="utf-8")
    console.print(f"[bold green]✅ Wrote {target}[/bold green]")
    console.print(f"\nNext:\n  shellgsm sparams --config {target}")


if __name__ == "__main__":
    main()
