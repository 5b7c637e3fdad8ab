"""Request/response models for the HTTP API."""
from __future__ import annotations

from pydantic import BaseModel

from ..config import ExperimentSpec, SimConfig  # noqa: F401  (request bodies)


class HealthResponse(BaseModel):
    status: str
    version: str


class CheckModel(BaseModel):
    guarantee: str
    name: str
    passed: bool
    margin: float
    detail: str


class BoundsReportModel(BaseModel):
    passed: bool
    thresholds: dict[str, float | None]
    step_cap: float | None
    influence_window: list[float] | None
    capacity: float | None
    min_encap_radius: float
    checks: list[CheckModel]


class RunRequest(BaseModel):
    config: SimConfig
    seed: int | None = None
    include_trace: bool = False
    force: bool = False  # run even when the certificate fails


class RunResponse(BaseModel):
    outcome: str
    ticks: int
    path_length: float
    collisions_static: int
    collisions_dynamic: int
    stalled_ticks: int
    encap_ticks: dict[str, int]
    trace: list[dict] | None = None


class MetricsRowModel(BaseModel):
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
    valid_bounds: bool


class BatchResponse(BaseModel):
    rows: list[MetricsRowModel]
