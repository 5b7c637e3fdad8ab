"""Command-line client over the core library.

Exit codes: 0 success, 2 configuration/certificate failure, 1 runtime error.
"""
from __future__ import annotations

import json
import sys

import click

from .config import ConfigError, ExperimentSpec, SweepParameter, load_config, load_experiment
from .engine import PlacementError, Simulation, validate_config
from .harness import read_trace, run_experiment, write_metrics, write_trace
from .render import render_trajectories


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Swarm target-encapsulation simulator and analysis tools."""


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="machine-readable report")
def validate(config_path, as_json):
    """Check every guarantee condition for a configuration."""
    try:
        config = load_config(config_path)
        report = validate_config(config)
    except (ConfigError, PlacementError, ValueError) as exc:
        _fail(str(exc), 2)
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2))
    else:
        for c in report.checks:
            status = "pass" if c.passed else "FAIL"
            click.echo(f"[{status}] {c.guarantee}/{c.name}: {c.detail} (margin {c.margin:.6g})")
        click.echo("certificate: " + ("all conditions hold" if report.passed else "FAILED"))
    if not report.passed:
        sys.exit(2)


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="override the run seed")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None)
@click.option("--render", "render_path", type=click.Path(dir_okay=False), default=None)
@click.option("--force", is_flag=True, help="run even if the certificate fails")
def run(config_path, seed, trace_path, render_path, force):
    """Execute one run and print its outcome."""
    try:
        config = load_config(config_path)
        report = validate_config(config)
        if not report.passed and not (force or config.allow_bound_violation):
            for c in report.failures():
                click.echo(f"[FAIL] {c.guarantee}/{c.name}: {c.detail}", err=True)
            _fail("certificate failed; use --force to run anyway", 2)
        collect = trace_path is not None or render_path is not None
        result = Simulation(config, run_seed=seed).run(collect_trace=collect)
    except ConfigError as exc:
        _fail(str(exc), 2)
    except Exception as exc:  # noqa: BLE001 - surfaced as exit code 1
        _fail(str(exc), 1)
    click.echo(json.dumps(result.to_dict()))
    if trace_path:
        write_trace(config, result, trace_path)
    if render_path:
        from .harness import trace_meta

        render_trajectories(
            trace_meta(config), [r.to_dict() for r in result.trace], render_path
        )


@main.command()
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="metrics file")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--seed", type=int, default=None, help="override the master seed")
@click.option("--workers", type=int, default=None)
def batch(spec_path, out, fmt, seed, workers):
    """Run a full experiment specification."""
    try:
        spec = load_experiment(spec_path)
        if seed is not None:
            spec = spec.model_copy(update={"master_seed": seed})
        summary = run_experiment(spec, workers=workers)
    except ConfigError as exc:
        _fail(str(exc), 2)
    except Exception as exc:  # noqa: BLE001
        _fail(str(exc), 1)
    _emit_metrics(summary, out, fmt)


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--param", required=True, help="config path to sweep, e.g. noise.level")
@click.option("--values", required=True, help="comma-separated sweep values")
@click.option("--runs", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=None, help="override the master seed")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--workers", type=int, default=None)
@click.option("--allow-bound-violation", is_flag=True)
def sweep(config_path, param, values, runs, seed, out, fmt, workers, allow_bound_violation):
    """Sweep one parameter over a base configuration (inline batch)."""
    import yaml

    try:
        config = load_config(config_path)
        parsed = [yaml.safe_load(v) for v in values.split(",")]
        spec = ExperimentSpec(
            base_config=config,
            sweep=[SweepParameter(path=param, values=parsed)],
            runs_per_point=runs,
            master_seed=seed,
            allow_bound_violation=allow_bound_violation,
        )
        summary = run_experiment(spec, workers=workers)
    except ConfigError as exc:
        _fail(str(exc), 2)
    except Exception as exc:  # noqa: BLE001
        _fail(str(exc), 1)
    _emit_metrics(summary, out, fmt)


@main.command()
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_path", type=click.Path(dir_okay=False))
def render(trace_path, out_path):
    """Render a recorded trace to an SVG image."""
    try:
        meta, records = read_trace(trace_path)
        render_trajectories(meta, records, out_path)
    except Exception as exc:  # noqa: BLE001
        _fail(str(exc), 1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Start the HTTP API service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


def _emit_metrics(summary, out, fmt):
    if out:
        write_metrics(summary, out, fmt)
        click.echo(f"wrote {out}")
    else:
        from .harness import metrics_csv

        if fmt == "csv":
            click.echo(metrics_csv(summary), nl=False)
        else:
            click.echo(json.dumps(summary.to_dict(), indent=2))


if __name__ == "__main__":
    main()
