"""Batch experimentation: sweeps, seeded runs, metrics aggregation, trace I/O.

Runs inside a batch are embarrassingly parallel. Every run's seed is assigned
up front (master seed XOR run index) and results are aggregated in run-index
order, so the emitted metrics are byte-identical at any worker-pool size.
"""
from __future__ import annotations

import csv
import io
import json
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentSpec, SimConfig
from .engine import RunResult, Simulation, validate_config

_PATH_ALIASES = {
    "robotParams.p": "robots.sensors",
    "robots.p": "robots.sensors",
    "targets[*].requiredRobots": "targets[*].required_robots",
}

CSV_COLUMNS = [
    "sweep_param",
    "sweep_value",
    "runs",
    "successes",
    "success_prob",
    "ticks_median",
    "ticks_q1",
    "ticks_q3",
    "ticks_min",
    "ticks_max",
    "path_median",
    "path_q1",
    "path_q3",
    "collisions_static",
    "collisions_dynamic",
    "seed",
]


def set_config_value(config: SimConfig, path: str, value) -> SimConfig:
    """Return a copy of ``config`` with the dotted ``path`` replaced.

    ``targets[*]`` fans out over all targets; ``targets[2]`` picks one.
    """
    path = _PATH_ALIASES.get(path, path)
    data = config.model_dump()
    parts = path.split(".")
    nodes = [data]
    for part in parts[:-1]:
        nodes = _descend(nodes, part)
    leaf = parts[-1]
    m = re.fullmatch(r"(\w+)\[(\*|\d+)\]", leaf)
    if m:
        raise ConfigError(f"sweep path {path!r} must end in a field name")
    for node in nodes:
        if not isinstance(node, dict) or leaf not in node:
            raise ConfigError(f"sweep path {path!r} does not exist in the config schema")
        node[leaf] = value
    try:
        return SimConfig.model_validate(data)
    except Exception as exc:
        raise ConfigError(f"sweep value {value!r} at {path!r} is invalid: {exc}") from exc


def _descend(nodes: list, part: str) -> list:
    m = re.fullmatch(r"(\w+)\[(\*|\d+)\]", part)
    out = []
    for node in nodes:
        if m:
            name, index = m.group(1), m.group(2)
            seq = node.get(name) if isinstance(node, dict) else None
            if not isinstance(seq, list):
                raise ConfigError(f"sweep path segment {part!r} is not a list")
            out.extend(seq if index == "*" else [seq[int(index)]])
        else:
            child = node.get(part) if isinstance(node, dict) else None
            if child is None:
                raise ConfigError(f"sweep path segment {part!r} does not exist")
            out.append(child)
    return out


@dataclass(frozen=True)
class RunStats:
    """The per-run numbers a batch aggregates."""

    success: bool
    ticks: int
    path_diameters: float
    collisions_static: int
    collisions_dynamic: int
    stalled_ticks: int


@dataclass
class MetricsRow:
    sweep_param: str
    sweep_value: str
    runs: int
    successes: int
    success_prob: float
    ticks_median: float
    ticks_q1: float
    ticks_q3: float
    ticks_min: float
    ticks_max: float
    path_median: float
    path_q1: float
    path_q3: float
    collisions_static: int
    collisions_dynamic: int
    seed: int
    valid_bounds: bool = True
    run_stats: list[RunStats] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS} | {
            "valid_bounds": self.valid_bounds
        }


@dataclass
class MetricsSummary:
    rows: list[MetricsRow]

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows]}


def _run_one(payload: tuple[str, int]) -> RunStats:
    config_json, seed = payload
    config = SimConfig.model_validate_json(config_json)
    result = Simulation(config, run_seed=seed).run()
    return RunStats(
        success=result.success,
        ticks=result.ticks,
        path_diameters=result.path_length / (2.0 * config.robots.body_radius),
        collisions_static=result.collisions_static,
        collisions_dynamic=result.collisions_dynamic,
        stalled_ticks=result.stalled_ticks,
    )


def _quartiles(values: list[float]) -> tuple[float, float, float, float, float]:
    """Median, quartiles, and extremes with the inclusive (linear) convention."""
    arr = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    return float(med), float(q1), float(q3), float(arr.min()), float(arr.max())


def _sweep_points(spec: ExperimentSpec):
    """Cartesian product of sweep values; a sweepless spec is one point."""
    if not spec.sweep:
        yield "", "", spec.base_config
        return

    def rec(i, config, names, values):
        if i == len(spec.sweep):
            yield ";".join(names), ";".join(values), config
            return
        param = spec.sweep[i]
        for v in param.values:
            yield from rec(
                i + 1,
                set_config_value(config, param.path, v),
                names + [param.path],
                values + [str(v)],
            )

    yield from rec(0, spec.base_config, [], [])


def run_experiment(
    spec: ExperimentSpec, workers: int | None = None, keep_run_stats: bool = False
) -> MetricsSummary:
    """Execute every sweep point with seeded, order-independent runs.

    With ``same_initial`` every run of a point keeps the base configuration
    seed (hence the identical placement); per-run variation enters only
    through the control/noise streams keyed by master_seed XOR run index.
    """
    master = spec.seed()
    rows = []
    if workers is None:
        workers = os.cpu_count() or 1
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for param, value, config in _sweep_points(spec):
            report = validate_config(config)
            valid = report.passed
            if not valid and not (
                spec.allow_bound_violation or config.allow_bound_violation
            ):
                raise ConfigError(
                    f"sweep point {param}={value} fails validation: "
                    + "; ".join(c.detail for c in report.failures())
                )
            if spec.same_initial:
                payloads = [
                    (config.model_dump_json(), master ^ run_index)
                    for run_index in range(spec.runs_per_point)
                ]
            else:
                payloads = [
                    (
                        config.model_copy(update={"seed": master ^ run_index}).model_dump_json(),
                        master ^ run_index,
                    )
                    for run_index in range(spec.runs_per_point)
                ]
            if pool is None:
                stats = [_run_one(p) for p in payloads]
            else:
                stats = list(pool.map(_run_one, payloads, chunksize=4))
            rows.append(_aggregate(param, value, stats, master, valid, keep_run_stats))
    finally:
        if pool is not None:
            pool.shutdown()
    return MetricsSummary(rows=rows)


def _aggregate(param, value, stats: list[RunStats], seed, valid, keep) -> MetricsRow:
    ticks = [float(s.ticks) for s in stats]
    paths = [s.path_diameters for s in stats]
    t_med, t_q1, t_q3, t_min, t_max = _quartiles(ticks)
    p_med, p_q1, p_q3, _, _ = _quartiles(paths)
    successes = sum(1 for s in stats if s.success)
    return MetricsRow(
        sweep_param=param,
        sweep_value=value,
        runs=len(stats),
        successes=successes,
        success_prob=successes / len(stats),
        ticks_median=t_med,
        ticks_q1=t_q1,
        ticks_q3=t_q3,
        ticks_min=t_min,
        ticks_max=t_max,
        path_median=p_med,
        path_q1=p_q1,
        path_q3=p_q3,
        collisions_static=sum(s.collisions_static for s in stats),
        collisions_dynamic=sum(s.collisions_dynamic for s in stats),
        seed=seed,
        valid_bounds=valid,
        run_stats=list(stats) if keep else [],
    )


def metrics_csv(summary: MetricsSummary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in summary.rows:
        writer.writerow([getattr(row, c) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_metrics(summary: MetricsSummary, path: str | Path, fmt: str = "csv") -> None:
    """Persist a summary as CSV (fixed, documented columns) or JSON."""
    path = Path(path)
    if fmt == "csv":
        path.write_text(metrics_csv(summary))
    elif fmt == "json":
        path.write_text(json.dumps(summary.to_dict(), indent=2) + "\n")
    else:
        raise ValueError(f"unknown metrics format {fmt!r}")


def read_metrics(path: str | Path) -> MetricsSummary:
    """Round-trip loader for the JSON metrics format."""
    data = json.loads(Path(path).read_text())
    rows = []
    for r in data["rows"]:
        rows.append(
            MetricsRow(
                sweep_param=r["sweep_param"],
                sweep_value=r["sweep_value"],
                runs=r["runs"],
                successes=r["successes"],
                success_prob=r["success_prob"],
                ticks_median=r["ticks_median"],
                ticks_q1=r["ticks_q1"],
                ticks_q3=r["ticks_q3"],
                ticks_min=r["ticks_min"],
                ticks_max=r["ticks_max"],
                path_median=r["path_median"],
                path_q1=r["path_q1"],
                path_q3=r["path_q3"],
                collisions_static=r["collisions_static"],
                collisions_dynamic=r["collisions_dynamic"],
                seed=r["seed"],
                valid_bounds=r.get("valid_bounds", True),
            )
        )
    return MetricsSummary(rows=rows)


def trace_meta(config: SimConfig) -> dict:
    b = config.environment.boundary
    env = (
        {"kind": "circle", "center": list(b.center), "radius": b.radius}
        if b.kind == "circle"
        else {"kind": "polygon", "vertices": [list(v) for v in b.vertices]}
    )
    return {
        "type": "meta",
        "schema_version": 1,
        "environment": env,
        "targets": [
            {
                "center": list(t.center),
                "body_radius": t.body_radius,
                "safe_radius": t.safe_radius,
                "encap_radius": t.encap_radius,
                "required_robots": t.required_robots,
            }
            for t in config.targets
        ],
        "body_radius": config.robots.body_radius,
        "robots": config.robots.count,
    }


def write_trace(config: SimConfig, result: RunResult, path: str | Path) -> None:
    """Line-delimited JSON: one meta line, then one record per tick."""
    if result.trace is None:
        raise ValueError("run was executed without trace collection")
    with open(path, "w") as fh:
        fh.write(json.dumps(trace_meta(config)) + "\n")
        for rec in result.trace:
            fh.write(json.dumps(rec.to_dict()) + "\n")


def read_trace(path: str | Path) -> tuple[dict, list[dict]]:
    meta = None
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if obj.get("type") == "meta":
                meta = obj
            else:
                records.append(obj)
    if meta is None:
        raise ValueError(f"{path}: trace stream has no meta line")
    return meta, records
