"""Closed-form guarantee parameters and the configuration certificate report.

Every closed form here has a corresponding geometric construction in the test
suite; the report lists each guarantee condition with its pass/fail margin so
a failing configuration explains exactly which requirement broke.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import dist
from .signals import SignalKernel, kernel_inverse, kernel_value
from .world import World, check_target_separation


class InfeasibleParameterError(ValueError):
    """A guarantee parameter cannot be realized with the given geometry."""


def worst_sensor_distance(r_safe: float, body_radius: float, max_half_gap: float) -> float:
    """Sensor-to-source distance when the source sits at ``r_safe`` from the
    center, at the worst bearing relative to the nearest sensor."""
    return math.sqrt(
        r_safe * r_safe
        + body_radius * body_radius
        - 2.0 * body_radius * r_safe * math.cos(max_half_gap)
    )


def safe_threshold(
    kernel: SignalKernel,
    r_safe: float,
    body_radius: float,
    max_half_gap: float,
    max_step: float,
) -> float:
    """Intensity at which avoidance must trigger to keep ``r_safe`` clearance.

    The trigger distance adds one maximum step to the worst-bearing sensor
    distance, so a robot crossing the threshold this tick is still safe after
    moving.
    """
    arg = max_step + worst_sensor_distance(r_safe, body_radius, max_half_gap)
    if arg >= kernel.influence:
        raise InfeasibleParameterError(
            "influence distance too small: the safe ring lies outside the "
            f"signal's reach ({arg:.6g} >= {kernel.influence:.6g})"
        )
    return float(kernel_value(kernel, arg))


def max_step_bound(r_safe_robot: float, body_radius: float, max_half_gap: float) -> float:
    """Upper bound on the per-tick step that keeps mutual avoidance deadlock-free."""
    rad = worst_sensor_distance(r_safe_robot, body_radius, max_half_gap)
    bound = (r_safe_robot + body_radius * math.cos(max_half_gap)) / 2.0 - rad / 2.0
    if bound <= 0.0:
        raise InfeasibleParameterError(
            "no feasible step size: too few sensors for this body/safe-distance ratio"
        )
    return bound


def robot_influence_window(
    thr_robot: float,
    kernel: SignalKernel,
    max_step: float,
    r_safe_robot: float,
    body_radius: float,
    max_half_gap: float,
) -> tuple[float, float]:
    """Open interval of robot-signal influence distances that avoid deadlock.

    Below the window a robot could blunder inside the safe ring between
    updates; above it two robots at safe distance would jam each other's
    sensors on every side.
    """
    trigger = kernel_inverse(kernel, thr_robot)
    if trigger is None:
        raise InfeasibleParameterError("robot threshold is not a positive intensity")
    lower = trigger + max_step
    upper = r_safe_robot + body_radius * math.cos(max_half_gap)
    if lower >= upper:
        raise InfeasibleParameterError(
            f"no feasible robot influence distance: window ({lower:.6g}, {upper:.6g}) is empty"
        )
    return lower, upper


def annulus_capacity(robot_influence: float, body_radius: float, encap_radius: float) -> float:
    """How many robots fit on the encapsulation ring without mutual interference.

    Robots must sit at least (influence + body radius) apart; the capacity is
    the full turn divided by the angle one such chord subtends.
    """
    spacing = robot_influence + body_radius
    if spacing > 2.0 * encap_radius:
        raise InfeasibleParameterError(
            "annulus cannot hold two robots: required spacing exceeds its diameter"
        )
    angle = math.acos(1.0 - spacing * spacing / (2.0 * encap_radius * encap_radius))
    return 2.0 * math.pi / angle


def effective_safe_distance(
    kernel: SignalKernel,
    threshold: float,
    body_radius: float,
    max_half_gap: float,
    max_step: float,
) -> float:
    """Center distance at which a noiseless reading first reaches ``threshold``.

    Inverts the threshold construction; useful to see how far out a rescaled
    threshold actually pushes the avoidance ring.
    """
    trigger = kernel_inverse(kernel, threshold)
    if trigger is None:
        raise InfeasibleParameterError("threshold is not a positive intensity")
    reach = trigger - max_step
    swing = body_radius * math.sin(max_half_gap)
    if reach < swing:
        return 0.0
    return body_radius * math.cos(max_half_gap) + math.sqrt(reach * reach - swing * swing)


@dataclass(frozen=True)
class AdjustedThresholds:
    """Static-source thresholds rescaled for bounded multiplicative noise."""

    thr_target: float
    thr_boundary: float
    thr_robot: float
    effective_safe_target: float
    effective_safe_boundary: float
    min_encap_radius: float
    capacity: float


def noise_adjusted_thresholds(
    thr_target: float,
    thr_boundary: float,
    thr_robot: float,
    static_truncation: float,
    *,
    kernel_target: SignalKernel,
    kernel_boundary: SignalKernel,
    robot_influence: float,
    body_radius: float,
    max_half_gap: float,
    max_step: float,
) -> AdjustedThresholds:
    """Scale static thresholds by (1 - truncation) so the worst noise draw
    cannot hide a safe-ring crossing; robot thresholds stay untouched.

    The rescale pushes the effective avoidance rings outward, so the
    encapsulation ring and its capacity are recomputed to match.
    """
    if not (0.0 < static_truncation < 1.0):
        raise ValueError("static truncation must lie in (0, 1)")
    scale = 1.0 - static_truncation
    new_target = thr_target * scale
    new_boundary = thr_boundary * scale
    eff_target = effective_safe_distance(
        kernel_target, new_target, body_radius, max_half_gap, max_step
    )
    eff_boundary = effective_safe_distance(
        kernel_boundary, new_boundary, body_radius, max_half_gap, max_step
    )
    min_encap = eff_target + 2.0 * max_step
    return AdjustedThresholds(
        thr_target=new_target,
        thr_boundary=new_boundary,
        thr_robot=thr_robot,
        effective_safe_target=eff_target,
        effective_safe_boundary=eff_boundary,
        min_encap_radius=min_encap,
        capacity=annulus_capacity(robot_influence, body_radius, min_encap),
    )


@dataclass(frozen=True)
class BoundsCheck:
    guarantee: str   # safety | deadlock-freedom | liveness | separation | sizing
    name: str
    passed: bool
    margin: float
    detail: str

    def to_dict(self) -> dict:
        return {
            "guarantee": self.guarantee,
            "name": self.name,
            "passed": self.passed,
            "margin": self.margin,
            "detail": self.detail,
        }


@dataclass
class BoundsReport:
    thresholds: dict[str, float | None]
    step_cap: float | None
    influence_window: tuple[float, float] | None
    capacity: float | None
    min_encap_radius: float
    checks: list[BoundsCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[BoundsCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "thresholds": self.thresholds,
            "step_cap": self.step_cap,
            "influence_window": list(self.influence_window) if self.influence_window else None,
            "capacity": self.capacity,
            "min_encap_radius": self.min_encap_radius,
            "checks": [c.to_dict() for c in self.checks],
        }


def _check(checks, guarantee, name, passed, margin, detail):
    checks.append(BoundsCheck(guarantee, name, bool(passed), float(margin), detail))


def validate_world(config, world: World) -> BoundsReport:
    """Evaluate every guarantee condition against a built world.

    The report never raises on a failed condition; callers decide whether a
    failing certificate is fatal (it is, unless a run is explicitly flagged
    as a bound-violation experiment).
    """
    robots = config.robots
    body = robots.body_radius
    max_step = robots.max_step
    angles = np.asarray(config.sensor_angle_list())
    p = len(angles)
    gaps = np.mod(np.roll(angles, -1) - angles, 2.0 * math.pi)
    max_half_gap = float(gaps.max() / 2.0) if p > 1 else math.pi

    kernels = {
        "target": config.kernels.target.build(),
        "robot": config.kernels.robot.build(),
        "boundary": config.kernels.boundary.build(),
    }
    safes = {
        "target": config.safe_distances.target,
        "robot": config.safe_distances.robot,
        "boundary": config.safe_distances.boundary,
    }

    checks: list[BoundsCheck] = []
    thresholds: dict[str, float | None] = {}
    for name in ("target", "robot", "boundary"):
        kern = kernels[name]
        arg = max_step + worst_sensor_distance(safes[name], body, max_half_gap)
        ok = kern.influence > arg
        thresholds[name] = float(kernel_value(kern, arg)) if ok else None
        _check(
            checks, "safety", f"influence-{name}", ok, kern.influence - arg,
            f"{name} signal must reach the triggering ring: influence "
            f"{kern.influence:.6g} vs required {arg:.6g}",
        )

    # robot-robot and robot-target/boundary start clearances, each vs its own
    # safe distance
    positions = [r.center for r in world.robots]
    margin_rr = min(
        (dist(a, b) for i, a in enumerate(positions) for b in positions[i + 1:]),
        default=math.inf,
    )
    margin_rt = min(
        (dist(a, t.center) for a in positions for t in world.targets),
        default=math.inf,
    )
    margin_re = min(
        (world.environment.boundary.signed_distance(a) for a in positions),
        default=math.inf,
    )
    start_margin = min(
        margin_rr - safes["robot"],
        margin_rt - safes["target"],
        margin_re - safes["boundary"],
    )
    _check(
        checks, "safety", "initial-separation", start_margin >= 0.0, start_margin,
        "every robot starts at least its safe distance from every source",
    )

    influence_r = kernels["robot"].influence
    spacing_margin = margin_rr - (influence_r + body)
    _check(
        checks, "deadlock-freedom", "initial-spacing", spacing_margin >= 0.0,
        spacing_margin,
        "robots start outside each other's influence "
        f"(pairwise >= {influence_r + body:.6g})",
    )

    window = None
    if thresholds["robot"] is not None:
        try:
            window = robot_influence_window(
                thresholds["robot"], kernels["robot"], max_step,
                safes["robot"], body, max_half_gap,
            )
            in_window = window[0] < influence_r < window[1]
            margin = min(influence_r - window[0], window[1] - influence_r)
        except InfeasibleParameterError:
            in_window, margin = False, -math.inf
        _check(
            checks, "deadlock-freedom", "influence-window", in_window, margin,
            f"robot influence {influence_r:.6g} must lie strictly inside "
            f"{window if window else '(empty window)'}",
        )

    try:
        cap_bound = max_step_bound(safes["robot"], body, max_half_gap)
        step_margin = cap_bound - max_step
        _check(
            checks, "deadlock-freedom", "step-cap", max_step < cap_bound, step_margin,
            f"max step {max_step:.6g} must stay strictly below {cap_bound:.6g}",
        )
    except InfeasibleParameterError as exc:
        cap_bound = None
        _check(checks, "deadlock-freedom", "step-cap", False, -math.inf, str(exc))

    _check(
        checks, "deadlock-freedom", "sensor-count", p >= 3, float(p - 3),
        f"robots carry {p} sensors; at least 3 are required",
    )

    capacity = None
    min_encap = safes["target"] + 2.0 * max_step
    for i, t in enumerate(world.targets):
        try:
            cap = annulus_capacity(influence_r, body, t.encap_radius)
        except InfeasibleParameterError as exc:
            _check(checks, "liveness", f"annulus-capacity[{i}]", False, -math.inf, str(exc))
            continue
        if capacity is None or cap < capacity:
            capacity = cap
        _check(
            checks, "liveness", f"annulus-capacity[{i}]",
            t.required_robots <= cap, cap - t.required_robots,
            f"target {i} needs {t.required_robots} robots; the ring holds {cap:.6g}",
        )
        _check(
            checks, "liveness", f"annulus-width[{i}]",
            t.encap_radius >= min_encap, t.encap_radius - min_encap,
            f"target {i} encapsulation radius {t.encap_radius:.6g} vs "
            f"minimum {min_encap:.6g}",
        )

    sep_slack = check_target_separation(
        world.targets, kernels["target"].influence, body, config.separation_margin
    )
    _check(
        checks, "separation", "target-pairs",
        sep_slack >= 0.0, sep_slack if math.isfinite(sep_slack) else math.inf,
        "targets must be far enough apart that a robot senses at most one",
    )

    needed = sum(t.required_robots for t in world.targets)
    _check(
        checks, "sizing", "swarm-size", len(world.robots) >= needed,
        float(len(world.robots) - needed),
        f"{len(world.robots)} robots vs {needed} required across all targets",
    )

    return BoundsReport(
        thresholds=thresholds,
        step_cap=cap_bound,
        influence_window=window,
        capacity=capacity,
        min_encap_radius=min_encap,
        checks=checks,
    )
