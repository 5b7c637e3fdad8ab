"""Declarative run configuration: schema, defaults, and YAML loading."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Literal, Union

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from .geometry import TWO_PI, Vec2
from .signals import NoiseModel, SignalKernel
from .world import (
    CircleBoundary,
    Environment,
    PolygonBoundary,
    Target,
)


class ConfigError(ValueError):
    """A configuration file failed to parse or validate."""


class KernelConfig(BaseModel):
    kind: Literal["linear", "inverse-square"] = "linear"
    peak: float = Field(default=1.0, gt=0.0)
    influence: float = Field(gt=0.0)

    def build(self) -> SignalKernel:
        return SignalKernel(kind=self.kind, peak=self.peak, influence=self.influence)


class KernelsConfig(BaseModel):
    target: KernelConfig
    robot: KernelConfig
    boundary: KernelConfig


class CircleConfig(BaseModel):
    kind: Literal["circle"] = "circle"
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = Field(gt=0.0)


class PolygonConfig(BaseModel):
    kind: Literal["polygon"] = "polygon"
    vertices: list[tuple[float, float]] = Field(min_length=3)


class EnvironmentConfig(BaseModel):
    boundary: Union[CircleConfig, PolygonConfig] = Field(discriminator="kind")

    def build(self) -> Environment:
        b = self.boundary
        if isinstance(b, CircleConfig):
            return Environment(CircleBoundary(Vec2(*b.center), b.radius))
        return Environment(PolygonBoundary(tuple(Vec2(*v) for v in b.vertices)))


class SafeDistancesConfig(BaseModel):
    target: float = Field(gt=0.0)
    robot: float = Field(gt=0.0)
    boundary: float = Field(gt=0.0)


class RobotsConfig(BaseModel):
    count: int = Field(ge=1)
    body_radius: float = Field(gt=0.0)
    sensors: int | None = Field(default=None, ge=3)
    sensor_angles: list[float] | None = None
    max_step: float = Field(gt=0.0)
    placement: list[tuple[float, float]] | None = None
    headings: list[float] | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.sensors is None and self.sensor_angles is None:
            raise ValueError("give either a sensor count or explicit sensor angles")
        if self.sensor_angles is not None:
            a = self.sensor_angles
            if len(a) < 3:
                raise ValueError("need at least 3 sensor angles")
            if any(not (0.0 <= x < TWO_PI) for x in a):
                raise ValueError("sensor angles must lie in [0, 2*pi)")
            if any(y <= x for x, y in zip(a, a[1:])):
                raise ValueError("sensor angles must be strictly increasing")
        if self.placement is not None and len(self.placement) != self.count:
            raise ValueError("explicit placement must list one position per robot")
        if self.headings is not None and (
            self.placement is None or len(self.headings) != self.count
        ):
            raise ValueError("explicit headings require matching explicit placement")
        return self


class TargetSpecConfig(BaseModel):
    center: tuple[float, float]
    body_radius: float = Field(default=0.0, ge=0.0)
    safe_radius: float = Field(gt=0.0)
    encap_radius: float = Field(gt=0.0)
    required_robots: int = Field(ge=1)

    @model_validator(mode="after")
    def _check(self):
        if not (self.encap_radius > self.safe_radius > self.body_radius):
            raise ValueError("target radii must satisfy encap > safe > body")
        return self

    def build(self) -> Target:
        return Target(
            center=Vec2(*self.center),
            body_radius=self.body_radius,
            safe_radius=self.safe_radius,
            encap_radius=self.encap_radius,
            required_robots=self.required_robots,
        )


class NoiseConfig(BaseModel):
    level: float = Field(default=0.0, ge=0.0)
    sharing: Literal["per-sensor", "per-robot", "per-swarm"] = "per-sensor"
    truncation: float = Field(default=1.0, gt=0.0, le=1.0)
    static_truncation: float = Field(default=1.0, gt=0.0, le=1.0)

    def build(self) -> NoiseModel:
        return NoiseModel(
            level=self.level,
            sharing=self.sharing,
            truncation=self.truncation,
            static_truncation=self.static_truncation,
        )


class ScheduleConfig(BaseModel):
    mode: Literal["sync", "async-period", "async-offset"] = "sync"
    period: int = Field(default=1, ge=1)
    periods: list[int] | None = None  # pool (or per-robot list) for async-period
    offsets: list[int] | None = None  # pool (or per-robot list) for async-offset

    @model_validator(mode="after")
    def _check(self):
        if self.mode == "async-period" and not self.periods:
            raise ValueError("async-period mode needs a periods pool")
        if self.mode == "async-offset" and not self.offsets:
            raise ValueError("async-offset mode needs an offsets pool")
        if self.periods and any(p < 1 for p in self.periods):
            raise ValueError("periods must be >= 1")
        if self.offsets and any(o < 0 for o in self.offsets):
            raise ValueError("offsets must be >= 0")
        return self


class ControllerConfig(BaseModel):
    direction_samples: int = Field(default=32, ge=8)
    # Experiment mode for bounded static-signal noise: rescale the static
    # thresholds by (1 - static_truncation) so worst-case draws cannot hide
    # a safe-ring crossing.
    adjust_static_thresholds: bool = False


class SimConfig(BaseModel):
    schema_version: int = 1
    seed: int = 0
    max_ticks: int = Field(default=3000, ge=1)
    separation_margin: float = Field(default=1e-6, gt=0.0)
    allow_bound_violation: bool = False
    placement_attempts: int = Field(default=100_000, ge=1)
    environment: EnvironmentConfig
    kernels: KernelsConfig
    safe_distances: SafeDistancesConfig
    robots: RobotsConfig
    targets: list[TargetSpecConfig] = Field(default_factory=list)
    noise: NoiseConfig = NoiseConfig()
    schedule: ScheduleConfig = ScheduleConfig()
    controller: ControllerConfig = ControllerConfig()

    def sensor_angle_list(self) -> list[float]:
        if self.robots.sensor_angles is not None:
            return list(self.robots.sensor_angles)
        p = self.robots.sensors
        return [k * TWO_PI / p for k in range(p)]

    def max_half_gap(self) -> float:
        angles = self.sensor_angle_list()
        gaps = [
            (b - a) % TWO_PI
            for a, b in zip(angles, angles[1:] + [angles[0] + TWO_PI])
        ]
        return max(gaps) / 2.0


class SweepParameter(BaseModel):
    path: str
    values: list

    @field_validator("values")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("a sweep needs at least one value")
        return v


class ExperimentSpec(BaseModel):
    """A batch: one base configuration, optional sweeps, many seeded runs."""

    schema_version: int = 1
    base_config: SimConfig
    sweep: list[SweepParameter] = Field(default_factory=list)
    runs_per_point: int = Field(default=100, ge=1)
    master_seed: int | None = None
    same_initial: bool = True
    allow_bound_violation: bool = False

    def seed(self) -> int:
        return self.master_seed if self.master_seed is not None else self.base_config.seed


def _load_yaml(path: str | Path) -> dict:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at the top level")
    return data


def _format_errors(path, exc) -> str:
    lines = [f"{path}: invalid configuration"]
    for err in exc.errors():
        loc = ".".join(str(part) for part in err["loc"])
        lines.append(f"  {loc}: {err['msg']}")
    return "\n".join(lines)


def load_config(path: str | Path) -> SimConfig:
    """Parse a YAML run configuration, reporting offending fields by path."""
    data = _load_yaml(path)
    try:
        return SimConfig.model_validate(data)
    except Exception as exc:
        if hasattr(exc, "errors"):
            raise ConfigError(_format_errors(path, exc)) from exc
        raise ConfigError(f"{path}: {exc}") from exc


def load_experiment(path: str | Path) -> ExperimentSpec:
    """Parse a YAML experiment specification."""
    data = _load_yaml(path)
    try:
        return ExperimentSpec.model_validate(data)
    except Exception as exc:
        if hasattr(exc, "errors"):
            raise ConfigError(_format_errors(path, exc)) from exc
        raise ConfigError(f"{path}: {exc}") from exc
