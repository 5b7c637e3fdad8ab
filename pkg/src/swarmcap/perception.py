"""Robot-side estimation: virtual-source distances and bearing arcs.

A sensor only knows an aggregated intensity. Inverting the kernel gives the
distance to a fictitious single source producing the same reading; converting
that to a robot-center distance at the worst-case bearing yields a guaranteed
underestimate of the distance to the nearest real source.
"""
from __future__ import annotations

import math

import numpy as np

from .geometry import TWO_PI, AngularInterval, interval, wrap_angle


def half_gaps(sensor_angles) -> tuple[np.ndarray, np.ndarray]:
    """Per-sensor half-angles to the previous and next sensor (wrap-aware)."""
    phi = np.asarray(sensor_angles, dtype=float)
    gaps = np.mod(np.roll(phi, -1) - phi, TWO_PI)
    if len(phi) == 1:
        gaps = np.array([TWO_PI])
    right = gaps / 2.0
    left = np.roll(gaps, 1) / 2.0
    return left, right


def virtual_source_distance(sensor_distance: float, body_radius: float, half_gap: float) -> float:
    """Shortest center-to-source distance consistent with a sensor-level distance.

    The source can sit anywhere within ``half_gap`` of the sensor's ray; the
    closest placement is at the edge of that wedge. Sensor distances too small
    for the geometry collapse to 0: treat the source as at the robot surface.
    """
    s = body_radius * math.sin(half_gap)
    if sensor_distance < abs(s):
        return 0.0
    return max(
        0.0,
        body_radius * math.cos(half_gap)
        + math.sqrt(sensor_distance * sensor_distance - s * s),
    )


def strongest_sensor(readings) -> int | None:
    """Index of the strictly largest positive reading; ties pick the lowest index."""
    z = np.asarray(readings, dtype=float)
    k = int(np.argmax(z))
    if z[k] <= 0.0:
        return None
    return k


def bearing_arc(sensor_index: int, sensor_angles) -> AngularInterval:
    """Body-frame arc guaranteed to contain the source seen strongest at this sensor."""
    left, right = half_gaps(sensor_angles)
    phi = float(sensor_angles[sensor_index])
    return interval(phi - left[sensor_index], phi + right[sensor_index])


def worst_bearing_offset(theta: float, sensor_index: int, sensor_angles) -> float:
    """Largest possible angle between motion ``theta`` and the true source bearing."""
    arc = bearing_arc(sensor_index, sensor_angles)
    lo = wrap_angle(theta - arc.start)
    hi = wrap_angle(arc.end - theta)
    lo = min(lo, TWO_PI - lo)
    hi = min(hi, TWO_PI - hi)
    return max(lo, hi)
