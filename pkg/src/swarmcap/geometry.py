"""Wrap-aware angle arithmetic and counterclockwise angular intervals."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other):  # type: ignore[override]
        return Vec2(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Vec2(self.x - other[0], self.y - other[1])


def dist(a, b) -> float:
    """Euclidean distance between two points."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


def unit(angle: float) -> Vec2:
    return Vec2(math.cos(angle), math.sin(angle))


def wrap_angle(a: float) -> float:
    """Map an angle to [0, 2*pi)."""
    a = math.fmod(a, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    return a if a < TWO_PI else 0.0


def wrap_array(a: np.ndarray) -> np.ndarray:
    """Vectorized wrap to [0, 2*pi)."""
    out = np.mod(a, TWO_PI)
    out[out >= TWO_PI] = 0.0
    return out


def circ_dist(a: float, b: float) -> float:
    """Smallest absolute angular separation, in [0, pi]."""
    d = wrap_angle(a - b)
    return d if d <= math.pi else TWO_PI - d


def circ_dist_array(a: np.ndarray, b: float) -> np.ndarray:
    d = np.mod(a - b, TWO_PI)
    return np.minimum(d, TWO_PI - d)


class AngularInterval(NamedTuple):
    """Counterclockwise arc from ``start`` to ``end``, possibly wrapping 0.

    A zero-width interval contains only its start angle; start == end is
    treated as empty width, not a full turn.
    """

    start: float
    end: float

    @property
    def width(self) -> float:
        return wrap_angle(self.end - self.start)

    @property
    def midpoint(self) -> float:
        return wrap_angle(self.start + 0.5 * self.width)

    def contains(self, angle: float) -> bool:
        return wrap_angle(angle - self.start) <= self.width

    def sample(self, n: int) -> np.ndarray:
        """n angles spanning the arc, endpoints included (n >= 2)."""
        if n < 2:
            raise ValueError("need at least 2 samples to cover both endpoints")
        return wrap_array(self.start + self.width * np.linspace(0.0, 1.0, n))


def interval(start: float, end: float) -> AngularInterval:
    return AngularInterval(wrap_angle(start), wrap_angle(end))
