"""Signal emission, aggregation, and sensor noise: the forward model behind Z."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .world import RobotState, World, boundary_clearance_many

LINEAR = "linear"
INVERSE_SQUARE = "inverse-square"


@dataclass(frozen=True)
class SignalKernel:
    """Strictly decreasing intensity-vs-distance law, zero at and past ``influence``."""

    kind: str
    peak: float
    influence: float

    def __post_init__(self):
        if self.kind not in (LINEAR, INVERSE_SQUARE):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.peak <= 0.0 or self.influence <= 0.0:
            raise ValueError("kernel peak and influence must be positive")


def kernel_value(kernel: SignalKernel, distance):
    """Intensity at ``distance``; accepts scalars or arrays."""
    d = np.asarray(distance, dtype=float)
    beta, peak = kernel.influence, kernel.peak
    if kernel.kind == LINEAR:
        out = peak * (1.0 - d / beta)
    else:
        # scaled so the value is peak at d=0 and exactly 0 at d=influence
        out = peak * (4.0 / 3.0) * beta * beta * ((d + beta) ** -2 - (2.0 * beta) ** -2)
    out = np.where(d < beta, out, 0.0)
    return float(out) if np.ndim(distance) == 0 else out


def kernel_inverse(kernel: SignalKernel, reading: float) -> float | None:
    """Distance whose intensity equals ``reading``.

    Readings above the peak (possible when several sources aggregate) clamp to
    distance 0, keeping the estimate an underestimate. Nonpositive readings
    return None: the sensor is outside every influence region.
    """
    if reading <= 0.0:
        return None
    if reading >= kernel.peak:
        return 0.0
    beta, peak = kernel.influence, kernel.peak
    if kernel.kind == LINEAR:
        return beta * (1.0 - reading / peak)
    inner = reading * 3.0 / (peak * 4.0 * beta * beta) + (2.0 * beta) ** -2
    return 1.0 / math.sqrt(inner) - beta


def inverse_distances(kernel: SignalKernel, readings: np.ndarray) -> np.ndarray:
    """Vectorized inverse; nonpositive readings map to +inf (no signal)."""
    z = np.asarray(readings, dtype=float)
    beta, peak = kernel.influence, kernel.peak
    if kernel.kind == LINEAR:
        d = beta * (1.0 - z / peak)
    else:
        inner = np.maximum(z, 1e-300) * 3.0 / (peak * 4.0 * beta * beta) + (2.0 * beta) ** -2
        d = 1.0 / np.sqrt(inner) - beta
    d = np.clip(d, 0.0, None)
    return np.where(z > 0.0, d, np.inf)


@dataclass(frozen=True)
class NoiseModel:
    """Multiplicative (1 - n) sensor noise with truncated-normal n.

    ``truncation`` bounds draws applied to robot signals; ``static_truncation``
    bounds draws applied to target and boundary signals.
    """

    level: float = 0.0
    sharing: str = "per-sensor"  # per-sensor | per-robot | per-swarm
    truncation: float = 1.0
    static_truncation: float = 1.0

    def __post_init__(self):
        if self.level < 0.0:
            raise ValueError("noise level must be >= 0")
        if not (0.0 < self.truncation <= 1.0 and 0.0 < self.static_truncation <= 1.0):
            raise ValueError("truncations must lie in (0, 1]")
        if self.sharing not in ("per-sensor", "per-robot", "per-swarm"):
            raise ValueError(f"unknown sharing mode {self.sharing!r}")


def draw_noise(noise: NoiseModel, rng: np.random.Generator, static: bool = False) -> float:
    """One noise fraction, rejection-sampled into the applicable bound."""
    if noise.level == 0.0:
        return 0.0
    bound = noise.static_truncation if static else noise.truncation
    while True:
        n = rng.normal(0.0, noise.level)
        if abs(n) <= bound:
            return float(n)


def _draw_many(noise: NoiseModel, rng: np.random.Generator, count: int, static: bool) -> np.ndarray:
    return np.array([draw_noise(noise, rng, static) for _ in range(count)])


class SensorReadings(NamedTuple):
    """Per-sensor aggregated intensities for one robot at one tick."""

    target: np.ndarray
    robot: np.ndarray
    boundary: np.ndarray


def sensor_positions(robot: RobotState) -> np.ndarray:
    """World positions of the sensors, shape (p, 2)."""
    angles = robot.heading + np.asarray(robot.sensor_angles)
    return np.asarray(robot.center) + robot.body_radius * np.stack(
        [np.cos(angles), np.sin(angles)], axis=-1
    )


def source_distances(sensor_pos: np.ndarray, sources: np.ndarray) -> np.ndarray:
    """Distances from sensor positions (..., 2) to source points (s, 2)."""
    diff = sensor_pos[..., None, :] - sources[None, :, :]
    return np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2)


def noise_factors(
    noise: NoiseModel,
    rng: np.random.Generator,
    p: int,
    shared: tuple[float, float, float] | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(1 - n) multipliers for the target/robot/boundary readings of one robot."""
    if noise.level == 0.0:
        ones = np.ones(p)
        return ones, ones, ones
    if noise.sharing == "per-swarm":
        if shared is None:
            raise ValueError("per-swarm noise needs the tick's shared draws")
        ng, nr, ne = shared
        return (
            np.full(p, 1.0 - ng),
            np.full(p, 1.0 - nr),
            np.full(p, 1.0 - ne),
        )
    if noise.sharing == "per-robot":
        return (
            np.full(p, 1.0 - draw_noise(noise, rng, static=True)),
            np.full(p, 1.0 - draw_noise(noise, rng, static=False)),
            np.full(p, 1.0 - draw_noise(noise, rng, static=True)),
        )
    return (
        1.0 - _draw_many(noise, rng, p, static=True),
        1.0 - _draw_many(noise, rng, p, static=False),
        1.0 - _draw_many(noise, rng, p, static=True),
    )


def shared_noise_draws(
    noise: NoiseModel, rng: np.random.Generator
) -> tuple[float, float, float] | None:
    """The per-swarm draws for one tick (target, robot, boundary), if applicable."""
    if noise.level == 0.0 or noise.sharing != "per-swarm":
        return None
    return (
        draw_noise(noise, rng, static=True),
        draw_noise(noise, rng, static=False),
        draw_noise(noise, rng, static=True),
    )


def sense(
    robot: RobotState,
    world: World,
    kernels: tuple[SignalKernel, SignalKernel, SignalKernel],
    noise: NoiseModel,
    rng: np.random.Generator,
    shared: tuple[float, float, float] | None = None,
) -> SensorReadings:
    """Readings for one robot against the current world.

    Emitting targets and every *other* robot (frozen ones included) are point
    sources at their centers; the boundary reads through the clearance of each
    sensor position. ``kernels`` is the (target, robot, boundary) triple.
    """
    pos = sensor_positions(robot)
    p = len(pos)
    kg, kr, ke = kernels

    zg = np.zeros(p)
    emitting = [t.center for t in world.targets if t.emitting]
    if emitting:
        d = source_distances(pos, np.asarray(emitting))
        zg = kernel_value(kg, d).sum(axis=1)

    zr = np.zeros(p)
    others = [r.center for r in world.robots if r is not robot]
    if others:
        d = source_distances(pos, np.asarray(others))
        zr = kernel_value(kr, d).sum(axis=1)

    ze = kernel_value(ke, boundary_clearance_many(pos, world.environment))

    if noise.level == 0.0:
        return SensorReadings(target=zg, robot=zr, boundary=ze)
    fg, fr, fe = noise_factors(noise, rng, p, shared)
    return SensorReadings(
        target=np.maximum(zg * fg, 0.0),
        robot=np.maximum(zr * fr, 0.0),
        boundary=np.maximum(ze * fe, 0.0),
    )
