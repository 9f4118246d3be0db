"""
Command-line interface for bell-timing.
"""

import logging
from pathlib import Path
from typing import Annotated, Any, Callable, Optional

import typer

from bell_timing import app as commands
from bell_timing.config_model import ScenarioConfig, build_config
from bell_timing.errors import ConfigError
from bell_timing.utils.reporting import render
from bell_timing.utils.simulation import write_run_record

app = typer.Typer(
    name="bell-timing",
    help="Counterfactual time averages in time-sequenced Bell tests: QM tables, "
    "local-model simulation, possible worlds, oracles and admissibility.",
    add_completion=False,
)

logger = logging.getLogger(__name__)

# Exit status for configuration, model and numerical errors
ERROR_EXIT = 2

ConfigOpt = Annotated[
    Optional[Path],
    typer.Option(
        "--config",
        "-c",
        help="JSON or YAML scenario file; flags override its values",
        exists=True,
        file_okay=True,
        dir_okay=False,
        readable=True,
        resolve_path=True,
    ),
]
QuadOpt = Annotated[Optional[str], typer.Option("--quad", help="alpha,alpha',beta,beta' in radians")]
ModelOpt = Annotated[Optional[str], typer.Option("--model", "-m", help="Sample model name (malus, clock, constant, qm)")]
PairsOpt = Annotated[Optional[int], typer.Option("--pairs", "-n", help="Number of emitted pairs")]
SeedOpt = Annotated[Optional[int], typer.Option("--seed", "-s", help="Master RNG seed")]
WorldOpt = Annotated[Optional[str], typer.Option("--world", "-w", help="Restrict to one world: A, B, C or D")]
FormatOpt = Annotated[Optional[str], typer.Option("--format", "-f", help="Output format: table, json or csv")]
TolOpt = Annotated[Optional[float], typer.Option("--tol", help="Admissibility tolerance (probability units)")]
WorkersOpt = Annotated[Optional[int], typer.Option("--workers", help="Threads for chunked simulation")]
ResolutionOpt = Annotated[Optional[float], typer.Option("--resolution", help="Initial quadrature step, units of total time")]
TimeOpt = Annotated[Optional[float], typer.Option("--time", help="Total run time T")]
PrintedOpt = Annotated[Optional[bool], typer.Option("--as-printed/--standard-pairing", help="CHSH pairing as published")]


@app.callback()
def main(
    verbose: Annotated[
        bool,
        typer.Option("--verbose", "-v", help="Log progress at DEBUG level"),
    ] = False,
) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _parse_quad(text: Optional[str]) -> Optional[list[float]]:
    if text is None:
        return None
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError as e:
        raise ConfigError(f"--quad: expected four comma-separated radians, got {text!r}") from e
    if len(values) != 4:
        raise ConfigError(f"--quad: expected four comma-separated radians, got {len(values)}")
    return values


def _run(
    command: Callable[..., commands.CommandReport],
    config_file: Optional[Path],
    overrides: dict[str, Any],
    **kwargs: Any,
) -> tuple[ScenarioConfig, commands.CommandReport]:
    """Build the config, run ``command`` and print its report; errors exit with status 2."""
    try:
        overrides = dict(overrides)
        overrides["quad"] = _parse_quad(overrides.get("quad"))
        config = build_config(config_file, overrides)
        report = command(config, **kwargs)
    except (ConfigError, ValueError, TypeError, RuntimeError, FileNotFoundError) as e:
        logger.debug("Command failed", exc_info=True)
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(code=ERROR_EXIT)
    typer.echo(render(config.format, report.command, config.to_dict(), report.results, report.annotations), nl=False)
    return config, report


@app.command("qm-table")
def qm_table(
    config_file: ConfigOpt = None,
    quad: QuadOpt = None,
    fmt: FormatOpt = None,
    as_printed: PrintedOpt = None,
) -> None:
    """Quantum probabilities, CH sum and CHSH S with violation verdicts."""
    _run(commands.cmd_qm_table, config_file, {"quad": quad, "format": fmt, "as_printed": as_printed})


@app.command()
def simulate(
    config_file: ConfigOpt = None,
    quad: QuadOpt = None,
    model: ModelOpt = None,
    pairs: PairsOpt = None,
    seed: SeedOpt = None,
    workers: WorkersOpt = None,
    total_time: TimeOpt = None,
    resolution: ResolutionOpt = None,
    fmt: FormatOpt = None,
    fixed_per_quarter: Annotated[
        Optional[bool],
        typer.Option("--fixed-per-quarter/--random-quarters", help="Emit n/4 pairs per quarter"),
    ] = None,
    record: Annotated[
        Optional[Path],
        typer.Option("--record", help="Also write the event-level run record (TSV) here"),
    ] = None,
) -> None:
    """Monte Carlo run: coincidence counts, estimates with error bars, verdicts."""
    _, report = _run(
        commands.cmd_simulate,
        config_file,
        {
            "quad": quad,
            "model": model,
            "n_pairs": pairs,
            "seed": seed,
            "workers": workers,
            "total_time": total_time,
            "resolution": resolution,
            "format": fmt,
            "fixed_per_quarter": fixed_per_quarter,
        },
    )
    if record is not None and report.run is not None:
        write_run_record(report.run, record)
        typer.echo(f"Run record written to {record}", err=True)


@app.command()
def worlds(
    config_file: ConfigOpt = None,
    quad: QuadOpt = None,
    world: WorldOpt = None,
    fmt: FormatOpt = None,
    model: ModelOpt = None,
    pairs: PairsOpt = None,
    seed: SeedOpt = None,
    as_printed: PrintedOpt = None,
    data: Annotated[
        str,
        typer.Option("--data", help="qm (closed form) or simulated (Monte Carlo of --model)"),
    ] = "qm",
) -> None:
    """CH and CHSH values and bounds under the four possible worlds."""
    _run(
        commands.cmd_worlds,
        config_file,
        {
            "quad": quad,
            "world": world,
            "format": fmt,
            "model": model,
            "n_pairs": pairs,
            "seed": seed,
            "as_printed": as_printed,
        },
        data_source=data,
    )


@app.command()
def oracle(
    config_file: ConfigOpt = None,
    quad: QuadOpt = None,
    seed: SeedOpt = None,
    fmt: FormatOpt = None,
    samples: Annotated[Optional[int], typer.Option("--samples", help="Random samples for the identity check")] = None,
) -> None:
    """Identity check and exhaustive deterministic-strategy enumeration."""
    _run(
        commands.cmd_oracle,
        config_file,
        {"quad": quad, "seed": seed, "format": fmt, "oracle_samples": samples},
    )


@app.command()
def admissibility(
    config_file: ConfigOpt = None,
    quad: QuadOpt = None,
    model: ModelOpt = None,
    tol: TolOpt = None,
    total_time: TimeOpt = None,
    resolution: ResolutionOpt = None,
    fmt: FormatOpt = None,
) -> None:
    """Factual vs counterfactual time averages of a local model and the resulting verdict."""
    _run(
        commands.cmd_admissibility,
        config_file,
        {
            "quad": quad,
            "model": model,
            "tol": tol,
            "total_time": total_time,
            "resolution": resolution,
            "format": fmt,
        },
    )


@app.command()
def sweep(
    config_file: ConfigOpt = None,
    points: Annotated[Optional[int], typer.Option("--points", help="Offsets sampled in (0, pi/2)")] = None,
    fmt: FormatOpt = None,
) -> None:
    """QM CH and CHSH values versus the offset theta of the quad {0, theta, 2 theta, 3 theta}."""
    _run(commands.cmd_sweep, config_file, {"sweep_points": points, "format": fmt})


@app.command()
def repro(
    config_file: ConfigOpt = None,
    pairs: PairsOpt = None,
    seed: SeedOpt = None,
    workers: WorkersOpt = None,
    fmt: FormatOpt = None,
    strict: Annotated[
        bool,
        typer.Option("--strict", help="Exit with status 1 when any check fails"),
    ] = False,
) -> None:
    """Run every acceptance check and print a pass/fail table."""
    _, report = _run(
        commands.cmd_repro,
        config_file,
        {"n_pairs": pairs, "seed": seed, "workers": workers, "format": fmt},
    )
    if strict and not commands.all_passed(report):
        raise typer.Exit(code=1)


if __name__ in {"__main__", "__mp_main__"}:
    app()
