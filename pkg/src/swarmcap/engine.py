"""Discrete-time engine: clock, scheduling, sense-control-move loop, monitoring.

Within a tick every due robot senses the same start-of-tick snapshot, all
commands are computed against it, and all moves commit simultaneously; there
is no hidden update order. Determinism comes from named RNG streams derived
from a single seed: placement and schedules draw from the configuration seed,
per-robot control and noise draw from the run seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .config import SimConfig
from .controller import ControllerParams, control_step
from .geometry import TWO_PI, Vec2, dist, wrap_angle
from .signals import (
    NoiseModel,
    SensorReadings,
    SignalKernel,
    kernel_value,
    noise_factors,
    shared_noise_draws,
    source_distances,
)
from .world import Environment, RobotState, Target, World, check_encapsulation, in_annulus


class PlacementError(RuntimeError):
    """No initial placement satisfying the start margins could be produced."""


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def placement_stream(config_seed: int) -> np.random.Generator:
    return _stream(config_seed, 0)


def build_kernels(config: SimConfig) -> tuple[SignalKernel, SignalKernel, SignalKernel]:
    return (
        config.kernels.target.build(),
        config.kernels.robot.build(),
        config.kernels.boundary.build(),
    )


def build_params(config: SimConfig) -> ControllerParams:
    """Controller parameters with thresholds derived from the safe distances."""
    kg, kr, ke = build_kernels(config)
    body = config.robots.body_radius
    step = config.robots.max_step
    gap = config.max_half_gap()
    thr_g = bounds.safe_threshold(kg, config.safe_distances.target, body, gap, step)
    thr_r = bounds.safe_threshold(kr, config.safe_distances.robot, body, gap, step)
    thr_e = bounds.safe_threshold(ke, config.safe_distances.boundary, body, gap, step)
    if config.controller.adjust_static_thresholds:
        trunc = config.noise.static_truncation
        if not trunc < 1.0:
            raise ValueError(
                "adjust_static_thresholds needs a static truncation below 1"
            )
        thr_g *= 1.0 - trunc
        thr_e *= 1.0 - trunc
    return ControllerParams(
        max_step=step,
        safe_target=config.safe_distances.target,
        safe_robot=config.safe_distances.robot,
        safe_boundary=config.safe_distances.boundary,
        thr_target=thr_g,
        thr_robot=thr_r,
        thr_boundary=thr_e,
        kernel_target=kg,
        kernel_robot=kr,
        kernel_boundary=ke,
        body_radius=body,
        sensor_angles=np.asarray(config.sensor_angle_list()),
        direction_samples=config.controller.direction_samples,
    )


def _assign_schedules(config: SimConfig, n: int, rng: np.random.Generator):
    """Per-robot (period, offset). A pool list of length n is taken as explicit."""
    s = config.schedule
    if s.mode == "sync":
        return [s.period] * n, [0] * n
    if s.mode == "async-period":
        pool = s.periods
        if len(pool) == n:
            return list(pool), [0] * n
        return [int(pool[rng.integers(0, len(pool))]) for _ in range(n)], [0] * n
    pool = s.offsets
    if len(pool) == n:
        return [s.period] * n, list(pool)
    return [s.period] * n, [int(pool[rng.integers(0, len(pool))]) for _ in range(n)]


def place_robots(
    config: SimConfig, env: Environment, targets: list[Target], rng: np.random.Generator
) -> tuple[list[Vec2], list[float]]:
    """Initial centers and headings honoring every start margin.

    Margins: pairwise at least (robot influence + body radius), at least the
    target safe distance from every target center, at least the boundary safe
    distance of clearance.
    """
    rc = config.robots
    spacing = config.kernels.robot.influence + rc.body_radius
    safe_t = config.safe_distances.target
    safe_e = config.safe_distances.boundary

    def violation(pos, placed) -> str | None:
        if env.boundary.signed_distance(pos) < safe_e:
            return "boundary clearance"
        for t in targets:
            if dist(pos, t.center) < safe_t:
                return "target clearance"
        for q in placed:
            if dist(pos, q) < spacing:
                return "pairwise spacing"
        return None

    if rc.placement is not None:
        centers = [Vec2(*p) for p in rc.placement]
        for i, pos in enumerate(centers):
            why = violation(pos, centers[:i])
            if why:
                raise PlacementError(
                    f"explicit placement violates the {why} margin at robot {i}"
                )
        if rc.headings is not None:
            headings = [wrap_angle(h) for h in rc.headings]
        else:
            headings = [float(h) for h in rng.uniform(0.0, TWO_PI, rc.count)]
        return centers, headings

    xmin, ymin, xmax, ymax = env.boundary.bbox()
    centers = []
    attempts = 0
    for _ in range(rc.count):
        while True:
            attempts += 1
            if attempts > config.placement_attempts:
                raise PlacementError(
                    "infeasible initial placement: attempt budget exhausted"
                )
            pos = Vec2(float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax)))
            if violation(pos, centers) is None:
                centers.append(pos)
                break
    headings = [float(h) for h in rng.uniform(0.0, TWO_PI, rc.count)]
    return centers, headings


def build_world(config: SimConfig) -> World:
    """Environment, targets, and placed robots; placement draws from the config seed."""
    env = config.environment.build()
    targets = [t.build() for t in config.targets]
    for i, t in enumerate(targets):
        if env.boundary.signed_distance(t.center) <= 0.0:
            raise ValueError(f"target {i} lies outside the environment")
    rng = placement_stream(config.seed)
    centers, headings = place_robots(config, env, targets, rng)
    periods, offsets = _assign_schedules(config, config.robots.count, rng)
    angles = tuple(config.sensor_angle_list())
    robots = [
        RobotState(
            center=c,
            heading=h,
            body_radius=config.robots.body_radius,
            sensor_angles=angles,
            period=periods[i],
            offset=offsets[i],
        )
        for i, (c, h) in enumerate(zip(centers, headings))
    ]
    return World(environment=env, targets=targets, robots=robots)


def validate_config(config: SimConfig) -> bounds.BoundsReport:
    """Build the initial world and evaluate the full guarantee certificate."""
    return bounds.validate_world(config, build_world(config))


@dataclass
class TickRecord:
    tick: int
    due: list[int]
    commands: list[tuple[float, float] | None]   # (turn, applied distance)
    positions: list[tuple[float, float]]
    headings: list[float]
    frozen: list[bool]
    annulus_counts: list[int]
    emitting: list[bool]
    violations: list[tuple[str, int, int, float]]
    moved: bool
    cum_path: float

    def to_dict(self) -> dict:
        return {
            "type": "tick",
            "tick": self.tick,
            "due": self.due,
            "commands": [list(c) if c else None for c in self.commands],
            "positions": [list(p) for p in self.positions],
            "headings": self.headings,
            "frozen": self.frozen,
            "annulus_counts": self.annulus_counts,
            "emitting": self.emitting,
            "violations": [list(v) for v in self.violations],
            "moved": self.moved,
            "cum_path": self.cum_path,
        }


@dataclass
class RunResult:
    outcome: str                 # all-encapsulated | timeout
    ticks: int
    path_length: float
    collisions_static: int
    collisions_dynamic: int
    stalled_ticks: int
    encap_ticks: dict[int, int] = field(default_factory=dict)
    trace: list[TickRecord] | None = None

    @property
    def success(self) -> bool:
        return self.outcome == "all-encapsulated"

    def to_dict(self, with_trace: bool = False) -> dict:
        out = {
            "outcome": self.outcome,
            "ticks": self.ticks,
            "path_length": self.path_length,
            "collisions_static": self.collisions_static,
            "collisions_dynamic": self.collisions_dynamic,
            "stalled_ticks": self.stalled_ticks,
            "encap_ticks": {str(k): v for k, v in self.encap_ticks.items()},
        }
        if with_trace and self.trace is not None:
            out["trace"] = [t.to_dict() for t in self.trace]
        return out


class Simulation:
    """One run in progress; deterministic for a fixed (config, run seed) pair."""

    def __init__(self, config: SimConfig, run_seed: int | None = None):
        self.config = config
        self.world = build_world(config)
        self.params = build_params(config)
        self.kernels = build_kernels(config)
        self.noise: NoiseModel = config.noise.build()
        seed = config.seed if run_seed is None else run_seed
        n = config.robots.count
        self._control = [_stream(seed, 2, i) for i in range(n)]
        self._noise = [_stream(seed, 3, i) for i in range(n)]
        self._swarm_noise = _stream(seed, 1)
        self.tick = 0
        self.path_length = 0.0
        self.collisions_static = 0
        self.collisions_dynamic = 0
        self.stalled_ticks = 0
        self.encap_ticks: dict[int, int] = {}
        self._angles = np.asarray(config.sensor_angle_list())
        self._margin = config.separation_margin
        self._pair_idx = np.triu_indices(n, k=1)

    def done(self) -> bool:
        targets = self.world.targets
        return bool(targets) and all(t.encapsulated for t in targets)

    def _due_robots(self) -> list[int]:
        t = self.tick
        return [
            i
            for i, r in enumerate(self.world.robots)
            if not r.frozen and t >= r.offset and (t - r.offset) % r.period == 0
        ]

    def _sense_due(self, due: list[int], centers: np.ndarray) -> list[SensorReadings]:
        """Batched sensing for the due robots against the current snapshot.

        Sums include a zeroed self column, which leaves IEEE results identical
        to the per-robot reference path in signals.sense.
        """
        robots = self.world.robots
        headings = np.array([r.heading for r in robots], dtype=float)
        body = self.config.robots.body_radius
        kg, kr, ke = self.kernels

        idx = np.asarray(due, dtype=int)
        ang = headings[idx][:, None] + self._angles[None, :]
        pos = centers[idx][:, None, :] + body * np.stack(
            [np.cos(ang), np.sin(ang)], axis=-1
        )  # (m, p, 2)
        m, p = pos.shape[0], pos.shape[1]

        emitting = [t.center for t in self.world.targets if t.emitting]
        if emitting:
            d = source_distances(pos, np.asarray(emitting))
            zg = kernel_value(kg, d).sum(axis=2)
        else:
            zg = np.zeros((m, p))

        vals = kernel_value(kr, source_distances(pos, centers))
        vals[np.arange(m), :, idx] = 0.0
        zr = vals.sum(axis=2)

        clearance = np.maximum(
            self.world.environment.boundary.signed_distance_many(pos.reshape(-1, 2)),
            0.0,
        ).reshape(m, p)
        ze = kernel_value(ke, clearance)

        if self.noise.level == 0.0:
            return [
                SensorReadings(target=zg[row], robot=zr[row], boundary=ze[row])
                for row in range(m)
            ]
        shared = shared_noise_draws(self.noise, self._swarm_noise)
        out = []
        for row, i in enumerate(due):
            fg, fr, fe = noise_factors(self.noise, self._noise[i], p, shared)
            out.append(
                SensorReadings(
                    target=np.maximum(zg[row] * fg, 0.0),
                    robot=np.maximum(zr[row] * fr, 0.0),
                    boundary=np.maximum(ze[row] * fe, 0.0),
                )
            )
        return out

    def step(self, record: bool = False) -> TickRecord | None:
        """Advance one tick: sense, decide, move simultaneously, then monitor."""
        world = self.world
        pre_done = self.done()
        due = self._due_robots()
        centers = np.array([r.center for r in world.robots], dtype=float)
        readings = self._sense_due(due, centers)
        commands = [
            control_step(z, self.params, self._control[i]) for i, z in zip(due, readings)
        ]

        applied: list[tuple[float, float] | None] = [None] * len(world.robots)
        moved = False
        boundary = world.environment.boundary
        for i, cmd in zip(due, commands):
            robot = world.robots[i]
            heading = wrap_angle(robot.heading + cmd.turn)
            if cmd.distance > 0.0:
                step = boundary.max_step(robot.center, heading, cmd.distance, self._margin)
            else:
                step = 0.0
            robot.heading = heading
            if step > 0.0:
                robot.center = Vec2(
                    robot.center.x + step * math.cos(heading),
                    robot.center.y + step * math.sin(heading),
                )
                centers[i] = robot.center
                moved = True
            self.path_length += step
            applied[i] = (cmd.turn, step)

        if due and not moved and not pre_done and world.targets:
            self.stalled_ticks += 1

        for t in check_encapsulation(world):
            for ti, existing in enumerate(world.targets):
                if existing is t:
                    self.encap_ticks[ti] = self.tick

        violations = self._monitor(centers)
        self.tick += 1

        if not record:
            return None
        counts = [sum(1 for r in world.robots if in_annulus(r, t)) for t in world.targets]
        return TickRecord(
            tick=self.tick - 1,
            due=due,
            commands=applied,
            positions=[(r.center.x, r.center.y) for r in world.robots],
            headings=[r.heading for r in world.robots],
            frozen=[r.frozen for r in world.robots],
            annulus_counts=counts,
            emitting=[t.emitting for t in world.targets],
            violations=violations,
            moved=moved,
            cum_path=self.path_length,
        )

    def _monitor(self, centers: np.ndarray) -> list[tuple[str, int, int, float]]:
        """Record every entity pair strictly inside its safe distance."""
        world = self.world
        cfg = self.config.safe_distances
        out: list[tuple[str, int, int, float]] = []

        ii, jj = self._pair_idx
        diff = centers[ii] - centers[jj]
        d2 = diff[:, 0] ** 2 + diff[:, 1] ** 2
        close = np.nonzero(d2 < cfg.robot * cfg.robot)[0]
        for c in close:
            out.append(
                ("robot-robot", int(ii[c]), int(jj[c]), float(math.sqrt(d2[c])))
            )
        self.collisions_dynamic += len(close)

        for ti, t in enumerate(world.targets):
            if not t.emitting:
                continue
            diff = centers - np.asarray(t.center)
            d2 = diff[:, 0] ** 2 + diff[:, 1] ** 2
            hit = np.nonzero(d2 < cfg.target * cfg.target)[0]
            for a in hit:
                out.append(("robot-target", int(a), ti, float(math.sqrt(d2[a]))))
            self.collisions_static += len(hit)

        clear = world.environment.boundary.signed_distance_many(centers)
        hit = np.nonzero(clear < cfg.boundary)[0]
        for a in hit:
            out.append(("robot-boundary", int(a), -1, float(clear[a])))
        self.collisions_static += len(hit)
        return out

    def run(self, collect_trace: bool = False) -> RunResult:
        trace: list[TickRecord] | None = [] if collect_trace else None
        while self.tick < self.config.max_ticks and not self.done():
            rec = self.step(record=collect_trace)
            if collect_trace:
                trace.append(rec)
        return RunResult(
            outcome="all-encapsulated" if self.done() else "timeout",
            ticks=self.tick,
            path_length=self.path_length,
            collisions_static=self.collisions_static,
            collisions_dynamic=self.collisions_dynamic,
            stalled_ticks=self.stalled_ticks,
            encap_ticks=dict(self.encap_ticks),
            trace=trace,
        )


def run(config: SimConfig, seed: int | None = None, collect_trace: bool = False) -> RunResult:
    """Execute one complete run; a pure function of (config, seed)."""
    return Simulation(config, run_seed=seed).run(collect_trace=collect_trace)
