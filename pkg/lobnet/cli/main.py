"""
lobnet command line.

Every command takes the run options (--manifest, --output, --seed, --jobs,
--significance, --replicas); flags override manifest keys. Exit codes: 0 ok,
1 runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import json
import logging
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Optional

import click

from lobnet import __version__
from lobnet.cli import stages
from lobnet.cli.context import RunContext, load_manifest
from lobnet.common.core.tracing import setup_tracing
from lobnet.common.models.schemas import PIPELINE_STAGES, CancelMode
from lobnet.common.utils.artifacts import canonical_json
from lobnet.common.utils.errors import cli_errors
from lobnet.common.utils.logger import initialize_logger
from lobnet.orderflow.phases import hms

logger = logging.getLogger(__name__)

ANALYSIS_STAGES = ("stats", "network", "fit", "profiles")

_RUN_OPTIONS = (
    click.option("--manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
                 help="YAML run manifest."),
    click.option("--output", "-o", type=click.Path(file_okay=False, path_type=Path),
                 help="Artifact directory (default lobnet-out)."),
    click.option("--seed", type=click.IntRange(min=0), help="Master seed; omitted means 0."),
    click.option("--jobs", type=click.IntRange(min=1), help="Worker processes."),
    click.option("--significance", type=click.FloatRange(0, 1, min_open=True, max_open=True),
                 help="KS test significance level."),
    click.option("--replicas", type=click.IntRange(min=1), help="Fitness-model replicas per day."),
)

_ANALYSIS_INPUTS = (
    click.option("--ledgers", type=click.Path(exists=True, file_okay=False, path_type=Path),
                 help="Directory of YYYYMMDD_trades.csv ledgers (default <output>/ledgers)."),
    click.option("--orderflow", multiple=True, type=click.Path(exists=True, path_type=Path),
                 help="Order-flow files or directories, for submitted order sizes and ratios."),
)


def run_options(func: Callable) -> Callable:
    for option in reversed(_RUN_OPTIONS):
        func = option(func)
    return func


def analysis_inputs(func: Callable) -> Callable:
    for option in reversed(_ANALYSIS_INPUTS):
        func = option(func)
    return func


def with_context(func: Callable) -> Callable:
    """Turn the run options into a RunContext passed as the first argument."""
    @wraps(func)
    def wrapper(manifest_path: Optional[Path], output, seed, jobs, significance, replicas, **kwargs) -> Any:
        overrides = dict(output=output, seed=seed, jobs=jobs, significance=significance, replicas=replicas)
        gen_file = kwargs.pop("gen_file", None)
        extra = kwargs.pop("manifest_overrides", None) or {}
        manifest = load_manifest(manifest_path, {**overrides, **extra}, gen_file=gen_file)
        ctx = RunContext.from_manifest(manifest)
        logger.info(f"Run manifest {ctx.digest[:16]}, output {ctx.output}", extra={"seed": manifest.seed})
        return func(ctx, **kwargs)

    return wrapper


def _parse_clock(_ctx, _param, values: tuple[str, ...]) -> tuple[int, ...]:
    """HH:MM[:SS[.cc]] to centiseconds since midnight."""
    parsed = []
    for value in values:
        try:
            clock, _, centis = value.partition(".")
            parts = [int(p) for p in clock.split(":")]
            if not 2 <= len(parts) <= 3:
                raise ValueError
            parsed.append(hms(*parts, centis=int(centis or 0)))
        except ValueError:
            raise click.BadParameter(f"{value!r} is not HH:MM[:SS[.cc]]")
    return tuple(parsed)


@click.group()
@click.version_option(__version__, prog_name="lobnet")
@click.option("--log-level", default=None, help="Overrides LOBNET_LOG_LEVEL.")
def cli(log_level: Optional[str]) -> None:
    """Order-book replay, trading networks and power-law statistics."""
    initialize_logger(log_level)
    setup_tracing()


@cli.command()
@run_options
@click.option("--config", "gen_file", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="YAML generator settings (the manifest's `gen` section).")
@click.option("--days", type=click.IntRange(min=0), help="Number of consecutive trading days.")
@cli_errors
def synth(manifest_path, output, seed, jobs, significance, replicas, gen_file, days) -> None:
    """Generate synthetic order-flow day files."""
    @with_context
    def run(ctx: RunContext) -> None:
        paths = stages.synth_stage(ctx)
        click.echo(f"wrote {len(paths)} day files to {ctx.path(stages.ORDERFLOW_DIR)}")

    run(manifest_path, output, seed, jobs, significance, replicas,
        gen_file=gen_file, manifest_overrides={"days": days})


@cli.command()
@run_options
@click.argument("inputs", nargs=-1, type=click.Path(exists=True, path_type=Path))
@click.option("--reference", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="CSV date,close,volume to cross-check the reconstruction against.")
@click.option("--check", is_flag=True, help="Replay every day through the reference matcher too.")
@click.option("--snapshot", multiple=True, callback=_parse_clock, help="Dump the book at HH:MM[:SS[.cc]].")
@click.option("--cancel-mode", type=click.Choice([m.value for m in CancelMode]), default=CancelMode.TARGET.value,
              show_default=True, help="How cancels without a target are resolved.")
@cli_errors
def replay(manifest_path, output, seed, jobs, significance, replicas, inputs, reference, check, snapshot,
           cancel_mode) -> None:
    """Replay order-flow days into trade ledgers."""
    @with_context
    def run(ctx: RunContext) -> None:
        results = stages.replay_stage(ctx, inputs, check=check, snapshot_times=snapshot,
                                      cancel_mode=CancelMode(cancel_mode))
        click.echo(f"replayed {len(results)} days, {sum(len(r.trades) for r in results)} trades")

    run(manifest_path, output, seed, jobs, significance, replicas, manifest_overrides={"reference": reference})


def _analysis(ctx: RunContext, ledgers, orderflow, selected: tuple[str, ...]) -> None:
    days = stages.load_day_data(ctx, ledgers, orderflow)
    if "stats" in selected:
        stages.stats_stage(ctx, days)
    if "network" in selected:
        stages.network_stage(ctx, days)
    if "fit" in selected:
        stages.fit_stage(ctx, days)
    if "profiles" in selected:
        stages.profiles_stage(ctx, days)
    click.echo(f"analyzed {len(days)} days: {', '.join(selected)}")


def _analysis_command(name: str, selected: tuple[str, ...], help_text: str) -> click.Command:
    @run_options
    @analysis_inputs
    @cli_errors
    def command(manifest_path, output, seed, jobs, significance, replicas, ledgers, orderflow) -> None:
        @with_context
        def run(ctx: RunContext) -> None:
            chosen = selected or tuple(s for s in ANALYSIS_STAGES if s in ctx.manifest.stages)
            _analysis(ctx, ledgers, orderflow, chosen)

        run(manifest_path, output, seed, jobs, significance, replicas)

    return click.command(name, help=help_text)(command)


cli.add_command(_analysis_command("analyze", (), "Every statistics artifact the manifest's stages select."))
cli.add_command(_analysis_command("network", ("network",), "Daily edge lists and network size metrics."))
cli.add_command(_analysis_command("fit", ("fit",), "Power-law fits of trade sizes and degrees."))
cli.add_command(_analysis_command("knn", ("profiles",), "Neighbor-degree and size-degree profiles."))
cli.add_command(_analysis_command("corr", ("stats",), "Daily series and their correlations."))


@cli.command()
@run_options
@analysis_inputs
@click.option("--pool-mode", type=click.Choice(["executed", "submitted"]), default=None,
              help="Fitness pools from executed or submitted shares.")
@cli_errors
def fitness(manifest_path, output, seed, jobs, significance, replicas, ledgers, orderflow, pool_mode) -> None:
    """Fitness-model ensembles against each day's real degree distributions."""
    @with_context
    def run(ctx: RunContext) -> None:
        days = stages.load_day_data(ctx, ledgers, orderflow)
        reports = stages.fitness_stage(ctx, days, pool_mode)
        click.echo(f"ran {len(reports)} ensembles of {ctx.manifest.replicas} replicas")

    run(manifest_path, output, seed, jobs, significance, replicas)


@cli.command(name="run")
@run_options
@cli_errors
def run_pipeline(manifest_path, output, seed, jobs, significance, replicas) -> None:
    """Run the manifest's stages end to end."""
    @with_context
    def run(ctx: RunContext) -> None:
        selected = ctx.manifest.stages
        if "synth" in selected:
            stages.synth_stage(ctx)
        if "replay" in selected:
            stages.replay_stage(ctx)
        analysis = tuple(s for s in ANALYSIS_STAGES if s in selected)
        if analysis or "fitness" in selected:
            days = stages.load_day_data(ctx)
            for name, stage in (("stats", stages.stats_stage), ("network", stages.network_stage),
                                ("fit", stages.fit_stage), ("profiles", stages.profiles_stage)):
                if name in analysis:
                    stage(ctx, days)
            if "fitness" in selected:
                stages.fitness_stage(ctx, days)
        click.echo(f"ran stages {', '.join(s for s in PIPELINE_STAGES if s in selected)}")

    run(manifest_path, output, seed, jobs, significance, replicas)


@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False, path_type=Path))
@cli_errors
def report(directory: Path) -> None:
    """Print a JSON summary of an artifact directory."""
    summary = stages.summarize_artifacts(directory)
    click.echo(json.dumps(json.loads(canonical_json(summary)), indent=2, sort_keys=True))


if __name__ == "__main__":
    cli()
