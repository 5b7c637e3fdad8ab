"""Geometric ground truth: environment, targets, robots, kinematics, encapsulation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Vec2, dist, unit, wrap_angle


class ContainmentError(RuntimeError):
    """A point that must lie inside the environment does not."""


@dataclass(frozen=True)
class CircleBoundary:
    center: Vec2
    radius: float

    def signed_distance(self, point) -> float:
        """Distance to the boundary curve; positive inside, negative outside."""
        return self.radius - dist(point, self.center)

    def signed_distance_many(self, points: np.ndarray) -> np.ndarray:
        dx = points[..., 0] - self.center[0]
        dy = points[..., 1] - self.center[1]
        return self.radius - np.sqrt(dx * dx + dy * dy)

    def max_step(self, start, direction: float, distance: float, margin: float) -> float:
        """Largest move along ``direction`` keeping at least ``margin`` clearance."""
        r = self.radius - margin
        px = start[0] - self.center[0]
        py = start[1] - self.center[1]
        c = px * px + py * py - r * r
        if c >= 0.0:  # already at or past the margin shell
            return 0.0
        b = px * math.cos(direction) + py * math.sin(direction)
        t_exit = -b + math.sqrt(b * b - c)
        return max(0.0, min(distance, t_exit))

    def bbox(self) -> tuple[float, float, float, float]:
        cx, cy = self.center
        return (cx - self.radius, cy - self.radius, cx + self.radius, cy + self.radius)


@dataclass(frozen=True)
class PolygonBoundary:
    """Convex polygon, vertices counterclockwise."""

    vertices: tuple[Vec2, ...]
    _normals: np.ndarray = field(init=False, repr=False, compare=False)
    _offsets: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float)
        if len(verts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        edges = np.roll(verts, -1, axis=0) - verts
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(
            edges, -1, axis=0
        )[:, 0]
        if np.any(cross <= 0.0):
            raise ValueError("polygon must be strictly convex and counterclockwise")
        # outward normals for a ccw polygon
        lengths = np.linalg.norm(edges, axis=1)
        normals = np.column_stack([edges[:, 1], -edges[:, 0]]) / lengths[:, None]
        object.__setattr__(self, "_normals", normals)
        object.__setattr__(self, "_offsets", np.einsum("ij,ij->i", normals, verts))

    def signed_distance(self, point) -> float:
        return float(self.signed_distance_many(np.asarray(point, dtype=float)[None, :])[0])

    def signed_distance_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        verts = np.asarray(self.vertices, dtype=float)
        nxt = np.roll(verts, -1, axis=0)
        edge = nxt - verts
        len2 = np.einsum("ij,ij->i", edge, edge)
        rel = pts[:, None, :] - verts[None, :, :]
        t = np.clip(np.einsum("pev,ev->pe", rel, edge) / len2, 0.0, 1.0)
        closest = verts[None, :, :] + t[:, :, None] * edge[None, :, :]
        seg_d = np.linalg.norm(pts[:, None, :] - closest, axis=2).min(axis=1)
        inside = np.all(
            pts @ self._normals.T - self._offsets[None, :] <= 0.0, axis=1
        )
        return np.where(inside, seg_d, -seg_d)

    def max_step(self, start, direction: float, distance: float, margin: float) -> float:
        p = np.asarray(start, dtype=float)
        u = np.array([math.cos(direction), math.sin(direction)])
        nu = self._normals @ u
        slack = self._offsets - margin - self._normals @ p
        if np.any(slack < 0.0):
            return 0.0
        with np.errstate(divide="ignore"):
            limits = np.where(nu > 0.0, slack / np.maximum(nu, 1e-300), np.inf)
        return max(0.0, min(distance, float(limits.min())))

    def bbox(self) -> tuple[float, float, float, float]:
        verts = np.asarray(self.vertices, dtype=float)
        return (
            float(verts[:, 0].min()),
            float(verts[:, 1].min()),
            float(verts[:, 0].max()),
            float(verts[:, 1].max()),
        )


Boundary = CircleBoundary | PolygonBoundary


@dataclass
class Environment:
    boundary: Boundary

    def contains(self, point, margin: float = 0.0) -> bool:
        return self.boundary.signed_distance(point) >= margin


def distance_to_boundary(point, env: Environment) -> float:
    """Distance from an interior point to the nearest boundary point.

    Raises ContainmentError for points outside the boundary: an entity center
    ending up there is an engine bug, not a robot decision.
    """
    d = env.boundary.signed_distance(point)
    if d < 0.0:
        raise ContainmentError(f"point {tuple(point)} lies outside the environment")
    return d


def boundary_clearance_many(points: np.ndarray, env: Environment) -> np.ndarray:
    """Clearance for sensor positions; points past the wall read as distance 0."""
    return np.maximum(env.boundary.signed_distance_many(points), 0.0)


@dataclass
class Target:
    center: Vec2
    body_radius: float
    safe_radius: float
    encap_radius: float
    required_robots: int
    encapsulated: bool = False
    emitting: bool = True

    def __post_init__(self):
        if not (self.encap_radius > self.safe_radius > self.body_radius >= 0.0):
            raise ValueError("target radii must satisfy encap > safe > body >= 0")
        if self.required_robots < 1:
            raise ValueError("required_robots must be >= 1")


@dataclass
class RobotState:
    center: Vec2
    heading: float
    body_radius: float
    sensor_angles: tuple[float, ...]
    frozen: bool = False
    period: int = 1
    offset: int = 0

    def __post_init__(self):
        angles = self.sensor_angles
        if len(angles) < 3:
            raise ValueError("need at least 3 sensors")
        if any(not (0.0 <= a < 2.0 * math.pi) for a in angles):
            raise ValueError("sensor angles must lie in [0, 2*pi)")
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise ValueError("sensor angles must be strictly increasing")


class ControlCommand:
    """Turn-then-move command: rotate by ``turn``, then advance ``distance``."""

    __slots__ = ("turn", "distance")

    def __init__(self, turn: float, distance: float):
        if distance < 0.0:
            raise ValueError("distance must be nonnegative")
        self.turn = turn
        self.distance = distance

    def __repr__(self):
        return f"ControlCommand(turn={self.turn!r}, distance={self.distance!r})"

    def __eq__(self, other):
        return (
            isinstance(other, ControlCommand)
            and self.turn == other.turn
            and self.distance == other.distance
        )


def apply_command(robot: RobotState, cmd: ControlCommand) -> RobotState:
    """Pure turn-then-move kinematics; safety is the controller's job."""
    if robot.frozen:
        raise ValueError("frozen robots do not accept commands")
    heading = wrap_angle(robot.heading + cmd.turn)
    step = unit(heading)
    center = Vec2(
        robot.center.x + cmd.distance * step.x,
        robot.center.y + cmd.distance * step.y,
    )
    return replace(robot, center=center, heading=heading)


def in_annulus(robot: RobotState, target: Target) -> bool:
    """Strictly outside the safe circle, at or inside the encapsulation circle."""
    d = dist(robot.center, target.center)
    return target.safe_radius < d <= target.encap_radius


@dataclass
class World:
    environment: Environment
    targets: list[Target]
    robots: list[RobotState]


def annulus_count(world: World, target: Target) -> int:
    return sum(1 for r in world.robots if in_annulus(r, target))


def check_encapsulation(world: World) -> list[Target]:
    """Trip encapsulation for emitting targets whose annulus holds enough robots.

    Triggering on count >= required covers simultaneous over-fill; every robot
    currently in the annulus freezes (it keeps emitting its robot signal).
    """
    done: list[Target] = []
    for target in world.targets:
        if not target.emitting:
            continue
        inside = [r for r in world.robots if in_annulus(r, target)]
        if len(inside) >= target.required_robots:
            target.emitting = False
            target.encapsulated = True
            for robot in inside:
                robot.frozen = True
            done.append(target)
    return done


def check_target_separation(targets: list[Target], influence: float,
                            body_radius: float, margin: float) -> float:
    """Smallest slack of the pairwise target-separation requirement.

    Any two targets must be at least (2*influence + 2*body_radius + margin)
    apart so a robot ever senses at most one target. Returns +inf when fewer
    than two targets exist.
    """
    required = 2.0 * influence + 2.0 * body_radius + margin
    slack = math.inf
    for i, a in enumerate(targets):
        for b in targets[i + 1:]:
            slack = min(slack, dist(a.center, b.center) - required)
    return slack
