"""Per-robot reactive policy: one readings tuple in, one turn-then-move command out.

The policy is memoryless. Behavior is selected by intensity thresholds:
avoid a static source read at or above its threshold, approach a target read
below it, otherwise random-walk. In every mode the step length is capped by
the flank-sensor geometry so a neighbor robot can never be approached past
its safe distance even if it simultaneously moves its own maximum step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import TWO_PI, AngularInterval, circ_dist_array, interval, wrap_angle
from .perception import half_gaps, strongest_sensor, virtual_source_distance
from .signals import SensorReadings, SignalKernel, inverse_distances, kernel_inverse
from .world import ControlCommand


def attraction_arc(sensor_index: int, sensor_angles) -> AngularInterval:
    """Motion directions guaranteed to close in on a source seen at this sensor.

    The arc keeps the worst-case angle to the true bearing at or below a
    quarter turn; its width is pi minus the two adjacent half-gaps.
    """
    left, right = half_gaps(sensor_angles)
    phi = float(sensor_angles[sensor_index])
    return interval(
        phi + right[sensor_index] + 1.5 * math.pi,
        phi - left[sensor_index] + 0.5 * math.pi,
    )


def avoidance_arc(sensor_index: int, sensor_angles) -> AngularInterval:
    """Motion directions guaranteed not to close in on a source at this sensor."""
    left, right = half_gaps(sensor_angles)
    phi = float(sensor_angles[sensor_index])
    return interval(
        phi + right[sensor_index] + 0.5 * math.pi,
        phi - left[sensor_index] + 1.5 * math.pi,
    )


@dataclass(frozen=True, eq=False)
class _ArcTable:
    """Sampled direction grid for one arc family, one row per sensor index."""

    thetas: np.ndarray      # (p, n) candidate directions
    flank_left: np.ndarray  # (p, n) flanking sensor indices around each direction
    flank_right: np.ndarray
    cos_left: np.ndarray    # trig of (sensor angle - direction), per flank
    sin_left: np.ndarray    # absolute value
    cos_right: np.ndarray
    sin_right: np.ndarray
    tie_rank: np.ndarray    # (p, n) angular distance to the arc midpoint


@dataclass(frozen=True, eq=False)
class ControllerParams:
    max_step: float
    safe_target: float
    safe_robot: float
    safe_boundary: float
    thr_target: float
    thr_robot: float
    thr_boundary: float
    kernel_target: SignalKernel
    kernel_robot: SignalKernel
    kernel_boundary: SignalKernel
    body_radius: float
    sensor_angles: np.ndarray
    direction_samples: int = 32
    _attract: _ArcTable = field(init=False, repr=False)
    _avoid: _ArcTable = field(init=False, repr=False)
    _half_left: np.ndarray = field(init=False, repr=False)
    _half_right: np.ndarray = field(init=False, repr=False)
    _max_half_gap: np.ndarray = field(init=False, repr=False)
    _bearing_lo: np.ndarray = field(init=False, repr=False)
    _bearing_hi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.direction_samples < 8:
            raise ValueError("direction_samples must be >= 8")
        if self.thr_target <= 0.0 or self.thr_robot <= 0.0 or self.thr_boundary <= 0.0:
            raise ValueError("thresholds must be positive")
        phi = np.asarray(self.sensor_angles, dtype=float)
        if len(phi) < 3:
            raise ValueError("need at least 3 sensors")
        left, right = half_gaps(phi)
        object.__setattr__(self, "sensor_angles", phi)
        object.__setattr__(self, "_half_left", left)
        object.__setattr__(self, "_half_right", right)
        object.__setattr__(self, "_max_half_gap", np.maximum(left, right))
        object.__setattr__(self, "_bearing_lo", (phi - left) % TWO_PI)
        object.__setattr__(self, "_bearing_hi", (phi + right) % TWO_PI)
        object.__setattr__(self, "_attract", self._build_table(attraction_arc))
        object.__setattr__(self, "_avoid", self._build_table(avoidance_arc))

    def _build_table(self, arc_fn) -> _ArcTable:
        phi = self.sensor_angles
        p, n = len(phi), self.direction_samples
        thetas = np.empty((p, n))
        rank = np.empty((p, n))
        for k in range(p):
            arc = arc_fn(k, phi)
            thetas[k] = arc.sample(n)
            rank[k] = circ_dist_array(thetas[k], arc.midpoint)
        fl, fr, dl, dr = _flanks(phi, thetas.ravel())
        shape = (p, n)
        return _ArcTable(
            thetas,
            fl.reshape(shape),
            fr.reshape(shape),
            np.cos(dl).reshape(shape),
            np.abs(np.sin(dl)).reshape(shape),
            np.cos(dr).reshape(shape),
            np.abs(np.sin(dr)).reshape(shape),
            rank,
        )

    @property
    def max_half_gap(self) -> float:
        return float(self._max_half_gap.max())


def _flanks(phi: np.ndarray, thetas: np.ndarray):
    """Flanking sensor indices and signed angular offsets for each direction.

    A direction exactly equal to a sensor angle uses that sensor as both
    flanks (pure radial case).
    """
    p = len(phi)
    idx = np.searchsorted(phi, thetas)
    right = idx % p
    left = (idx - 1) % p
    exact = phi[right] == thetas
    left = np.where(exact, right, left)
    dl = np.mod(phi[left] - thetas + math.pi, TWO_PI) - math.pi
    dr = np.mod(phi[right] - thetas + math.pi, TWO_PI) - math.pi
    return left, right, dl, dr


def _grid_caps(table: _ArcTable, k: int, dist_robot: np.ndarray, params: ControllerParams):
    """Safe step per grid direction of arc row ``k`` (vectorized)."""
    dl = dist_robot[table.flank_left[k]]
    dr = dist_robot[table.flank_right[k]]
    use_left = dl <= dr
    d_near = np.where(use_left, dl, dr)
    cos_t = np.where(use_left, table.cos_left[k], table.cos_right[k])
    sin_t = np.where(use_left, table.sin_left[k], table.sin_right[k])

    r = params.body_radius
    slack = d_near - params.safe_robot - params.max_step   # +inf when unseen
    swing = r * sin_t
    root = slack * slack - swing * swing
    bound = r * cos_t + np.sqrt(np.maximum(root, 0.0))
    caps = np.where(slack >= swing, np.clip(bound, 0.0, params.max_step), 0.0)
    return caps


def _cap_scalar(d_near: float, dphi: float, params: ControllerParams) -> float:
    if math.isinf(d_near):
        return params.max_step
    slack = d_near - params.safe_robot - params.max_step
    swing = params.body_radius * abs(math.sin(dphi))
    if slack < swing:
        return 0.0
    bound = params.body_radius * math.cos(dphi) + math.sqrt(slack * slack - swing * swing)
    return min(max(bound, 0.0), params.max_step)


def _cap_at(theta: float, dist_robot: np.ndarray, params: ControllerParams) -> float:
    """Safe step along one direction; scalar fast path."""
    phi = params.sensor_angles
    p = len(phi)
    idx = int(np.searchsorted(phi, theta))
    right = idx % p
    if phi[right] == theta:
        return _cap_scalar(float(dist_robot[right]), 0.0, params)
    left = (idx - 1) % p
    d_l, d_r = float(dist_robot[left]), float(dist_robot[right])
    if d_l <= d_r:
        j, d_near = left, d_l
    else:
        j, d_near = right, d_r
    dphi = math.remainder(phi[j] - theta, TWO_PI)
    return _cap_scalar(d_near, dphi, params)


def dist_avoid_dynamic(robot_readings, theta: float, params: ControllerParams) -> float:
    """Safe step length along ``theta`` against the robots the flanks can see."""
    dist_robot = inverse_distances(params.kernel_robot, np.asarray(robot_readings, dtype=float))
    return _cap_at(wrap_angle(theta), dist_robot, params)


def _attract_cap(z_max: float, k: int, theta: float, params: ControllerParams) -> float:
    sensor_distance = kernel_inverse(params.kernel_target, z_max)
    d_target = virtual_source_distance(
        sensor_distance, params.body_radius, float(params._max_half_gap[k])
    )
    # worst angle between theta and the true bearing: attained at an arc edge
    lo = (theta - params._bearing_lo[k]) % TWO_PI
    lo = min(lo, TWO_PI - lo)
    hi = (params._bearing_hi[k] - theta) % TWO_PI
    hi = min(hi, TWO_PI - hi)
    cap = 2.0 * d_target * math.cos(max(lo, hi))
    return min(max(cap, 0.0), params.max_step)


def dist_attract_target(target_readings, theta: float, params: ControllerParams) -> float:
    """Largest step along ``theta`` that cannot overshoot the sensed target."""
    k = strongest_sensor(target_readings)
    if k is None:
        raise ValueError("not sensing any target")
    return _attract_cap(float(np.max(target_readings)), k, wrap_angle(theta), params)


def _best_direction(
    table: _ArcTable, k: int, dist_robot: np.ndarray, params: ControllerParams
) -> tuple[float, float]:
    """Argmax of the safe step over the sampled arc; ties prefer the midpoint."""
    caps = _grid_caps(table, k, dist_robot, params)
    best = caps.max()
    rank = np.where(caps == best, table.tie_rank[k], np.inf)
    i = int(np.argmin(rank))
    return float(table.thetas[k, i]), float(caps[i])


def _escape(robot_readings, dist_robot: np.ndarray, params: ControllerParams):
    """Head for the quietest robot-signal sensor; the safest direction left."""
    j = int(np.argmin(robot_readings))
    return float(params.sensor_angles[j]), _cap_scalar(float(dist_robot[j]), 0.0, params)


def control_step(
    readings: SensorReadings, params: ControllerParams, rng: np.random.Generator
) -> ControlCommand:
    """One decision: avoid a hot static source, else approach, else wander."""
    zg = readings.target
    ze = readings.boundary
    dist_robot = inverse_distances(params.kernel_robot, readings.robot)

    zg_max = float(np.max(zg))
    ze_max = float(np.max(ze))
    ratio_target = zg_max / params.thr_target
    ratio_boundary = ze_max / params.thr_boundary

    if ratio_target >= 1.0 or ratio_boundary >= 1.0:
        # the relatively hotter hazard wins; equal ratios defer to the target
        source = zg if ratio_target >= ratio_boundary else ze
        k = int(np.argmax(source))
        theta, d = _best_direction(params._avoid, k, dist_robot, params)
        return ControlCommand(theta, d)

    if zg_max > 0.0:
        k = int(np.argmax(zg))
        theta, d = _best_direction(params._attract, k, dist_robot, params)
        d = min(d, _attract_cap(zg_max, k, theta, params))
        if d <= 0.0:
            theta, d = _escape(readings.robot, dist_robot, params)
        return ControlCommand(theta, d)

    theta = float(rng.uniform(0.0, TWO_PI))
    d = _cap_at(theta, dist_robot, params)
    if d <= 0.0:
        theta, d = _escape(readings.robot, dist_robot, params)
    return ControlCommand(theta, d)
