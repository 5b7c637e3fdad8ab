import math

import numpy as np
import pytest

from swarmcap import bounds
from swarmcap.controller import (
    ControllerParams,
    attraction_arc,
    avoidance_arc,
    control_step,
    dist_attract_target,
    dist_avoid_dynamic,
)
from swarmcap.geometry import TWO_PI, wrap_angle
from swarmcap.signals import SensorReadings, SignalKernel, kernel_value

TARGET_K = SignalKernel("linear", 1.0, 8.0)
ROBOT_K = SignalKernel("linear", 1.0, 8.0)
BOUND_K = SignalKernel("linear", 1.0, 8.0)


def make_params(p=8, body=0.5, max_step=0.3, safe=2.0, samples=32,
                robot_kernel=ROBOT_K, angles=None):
    if angles is None:
        angles = np.array([k * TWO_PI / p for k in range(p)])
    gap = float(np.max(np.mod(np.roll(angles, -1) - angles, TWO_PI))) / 2.0
    thr = {
        name: bounds.safe_threshold(kern, safe, body, gap, max_step)
        for name, kern in (("g", TARGET_K), ("r", robot_kernel), ("e", BOUND_K))
    }
    return ControllerParams(
        max_step=max_step,
        safe_target=safe,
        safe_robot=safe,
        safe_boundary=safe,
        thr_target=thr["g"],
        thr_robot=thr["r"],
        thr_boundary=thr["e"],
        kernel_target=TARGET_K,
        kernel_robot=robot_kernel,
        kernel_boundary=BOUND_K,
        body_radius=body,
        sensor_angles=angles,
        direction_samples=samples,
    )


def readings(p=8, target=None, robot=None, boundary=None):
    def arr(v):
        out = np.zeros(p)
        if v:
            for k, z in v.items():
                out[k] = z
        return out

    return SensorReadings(arr(target), arr(robot), arr(boundary))


SYM4 = [0.0, math.pi / 2, math.pi, 3 * math.pi / 2]


class TestArcs:
    def test_attraction_p4_front_sensor(self):
        arc = attraction_arc(0, SYM4)
        assert arc.start == pytest.approx(7 * math.pi / 4)
        assert arc.end == pytest.approx(math.pi / 4)
        assert arc.width == pytest.approx(math.pi / 2)

    def test_attraction_p4_rear_sensor(self):
        arc = attraction_arc(2, SYM4)
        assert arc.start == pytest.approx(3 * math.pi / 4)
        assert arc.end == pytest.approx(5 * math.pi / 4)

    def test_avoidance_p4_front_sensor(self):
        arc = avoidance_arc(0, SYM4)
        assert arc.start == pytest.approx(3 * math.pi / 4)
        assert arc.end == pytest.approx(5 * math.pi / 4)

    def test_arcs_are_antipodal(self):
        for p in (3, 5, 8):
            angles = [k * TWO_PI / p for k in range(p)]
            for k in range(p):
                att = attraction_arc(k, angles)
                avo = avoidance_arc(k, angles)
                assert wrap_angle(att.start + math.pi) == pytest.approx(avo.start)
                assert wrap_angle(att.end + math.pi) == pytest.approx(avo.end)

    def test_width_shrinks_with_fewer_sensors(self):
        for p in (3, 4, 6, 12):
            angles = [k * TWO_PI / p for k in range(p)]
            assert attraction_arc(0, angles).width == pytest.approx(
                math.pi - 2 * math.pi / p
            )

    def test_near_continuum_limit_is_half_plane(self):
        p = 2000
        angles = [k * TWO_PI / p for k in range(p)]
        arc = attraction_arc(0, angles)
        assert arc.start == pytest.approx(3 * math.pi / 2, abs=0.01)
        assert arc.end == pytest.approx(math.pi / 2, abs=0.01)


class TestDistAttract:
    def test_worst_case_angle_at_sensor_direction(self):
        # point robot, 3 sensors: half-gap pi/3; virtual distance 4
        params = make_params(p=3, body=0.0, max_step=10.0)
        z = readings(p=3, target={0: kernel_value(TARGET_K, 4.0)})
        d = dist_attract_target(z.target, 0.0, params)
        assert d == pytest.approx(2.0 * 4.0 * math.cos(math.pi / 3), rel=1e-12)

    def test_step_cap_binds(self):
        params = make_params(p=3, body=0.0, max_step=0.1)
        z = readings(p=3, target={0: kernel_value(TARGET_K, 4.0)})
        assert dist_attract_target(z.target, 0.0, params) == pytest.approx(0.1)

    def test_zero_at_arc_edge(self):
        # theta at the attraction-arc edge makes the worst-case angle pi/2
        params = make_params(p=4, body=0.0, max_step=10.0)
        z = readings(p=4, target={0: kernel_value(TARGET_K, 4.0)})
        assert dist_attract_target(z.target, math.pi / 4, params) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_no_target_reading_is_an_error(self):
        params = make_params(p=4)
        with pytest.raises(ValueError):
            dist_attract_target(np.zeros(4), 0.0, params)


class TestDistAvoidDynamic:
    def test_no_neighbors_gives_full_step(self):
        params = make_params(p=3)
        assert dist_avoid_dynamic(np.zeros(3), 1.234, params) == params.max_step

    def test_capped_bound(self):
        # flank source at distance 5, offset pi/6: raw bound 3.020966, then cap
        params = make_params(p=3, body=0.5, max_step=0.4, safe=2.0)
        theta = wrap_angle(-math.pi / 6)
        z = np.array([1.0 - 5.0 / 8.0, 0.0, 0.0])
        assert dist_avoid_dynamic(z, theta, params) == pytest.approx(0.4)

    def test_imaginary_root_blocks_motion(self):
        # distance 2.5: slack 0.1 below the swing 0.25
        params = make_params(p=3, body=0.5, max_step=0.4, safe=2.0)
        theta = wrap_angle(-math.pi / 6)
        z = np.array([1.0 - 2.5 / 8.0, 0.0, 0.0])
        assert dist_avoid_dynamic(z, theta, params) == 0.0

    def test_binding_bound_value(self):
        # distance 2.9 at offset 1.2 rad: the geometric bound is the binding cap
        params = make_params(p=3, body=0.5, max_step=0.4, safe=2.0)
        theta = wrap_angle(-1.2)
        z = np.array([1.0 - 2.9 / 8.0, 0.0, 0.0])
        assert dist_avoid_dynamic(z, theta, params) == pytest.approx(
            0.36235775447667334, rel=1e-9
        )

    def test_closer_flank_wins(self):
        # both flanks read; the nearer virtual source constrains
        params = make_params(p=4, body=0.5, max_step=0.4, safe=2.0)
        theta = math.pi / 4
        near = 1.0 - 2.5 / 8.0   # distance 2.5 at sensor 1
        far = 1.0 - 6.0 / 8.0    # distance 6.0 at sensor 0
        z = np.array([far, near, 0.0, 0.0])
        assert dist_avoid_dynamic(z, theta, params) == 0.0

    def test_exact_sensor_direction_radial_case(self):
        params = make_params(p=4, body=0.5, max_step=0.4, safe=2.0)
        z = np.array([1.0 - 2.9 / 8.0, 0.0, 0.0, 0.0])
        # moving exactly along the sensor ray: bound = body + slack
        assert dist_avoid_dynamic(z, 0.0, params) == pytest.approx(0.4)
        tight = np.array([1.0 - 2.5 / 8.0, 0.0, 0.0, 0.0])
        # slack 0.1: bound body + 0.1 = 0.6, still capped; shrink slack below 0
        assert dist_avoid_dynamic(tight, 0.0, params) == pytest.approx(0.4)
        blocked = np.array([1.0 - 2.3 / 8.0, 0.0, 0.0, 0.0])
        assert dist_avoid_dynamic(blocked, 0.0, params) == 0.0


class TestControlStep:
    def test_empty_world_random_walk_full_step(self):
        params = make_params(p=8)
        rng = np.random.default_rng(5)
        cmd = control_step(readings(p=8), params, rng)
        assert cmd.distance == params.max_step
        # exactly one uniform draw was consumed
        twin = np.random.default_rng(5)
        assert cmd.turn == pytest.approx(float(twin.uniform(0.0, TWO_PI)))

    def test_attraction_aims_at_strongest_sensor(self):
        # all flank caps tie at max_step, so the tie-break picks the arc
        # midpoint, which is the sensed direction
        params = make_params(p=8)
        below = 0.5 * params.thr_target
        cmd = control_step(readings(p=8, target={2: below}), params,
                           np.random.default_rng(0))
        assert cmd.turn == pytest.approx(float(params.sensor_angles[2]))
        assert 0.0 < cmd.distance <= params.max_step

    def test_static_avoidance_turns_away(self):
        params = make_params(p=8)
        hot = 1.1 * params.thr_boundary
        cmd = control_step(readings(p=8, boundary={0: hot}), params,
                           np.random.default_rng(0))
        assert cmd.turn == pytest.approx(math.pi)
        assert cmd.distance == params.max_step

    def test_target_over_threshold_triggers_avoidance(self):
        params = make_params(p=8)
        hot = 1.05 * params.thr_target
        cmd = control_step(readings(p=8, target={3: hot}), params,
                           np.random.default_rng(0))
        assert cmd.turn == pytest.approx(
            wrap_angle(float(params.sensor_angles[3]) + math.pi)
        )

    def test_hotter_ratio_dominates(self):
        params = make_params(p=8)
        z = readings(
            p=8,
            target={0: 1.2 * params.thr_target},
            boundary={2: 1.5 * params.thr_boundary},
        )
        cmd = control_step(z, params, np.random.default_rng(0))
        # boundary is relatively hotter: avoid sensor 2's direction
        assert cmd.turn == pytest.approx(
            wrap_angle(float(params.sensor_angles[2]) + math.pi)
        )

    def test_blocked_attraction_escapes_toward_quietest_sensor(self):
        # surround the robot so每 every flank reads too close to move
        params = make_params(p=4, body=0.5, max_step=0.4, safe=2.0)
        near = kernel_value(ROBOT_K, 2.4)  # slack 2.4-2.4 = -0.4 < 0 everywhere
        z = readings(
            p=4,
            target={0: 0.5 * params.thr_target},
            robot={0: near, 1: near, 2: near, 3: 0.9 * near},
        )
        cmd = control_step(z, params, np.random.default_rng(0))
        assert cmd.turn == pytest.approx(float(params.sensor_angles[3]))
        assert cmd.distance == 0.0  # even the quietest direction is blocked

    def test_memoryless_determinism(self):
        params = make_params(p=8)
        z = readings(p=8, target={1: 0.3}, robot={4: 0.2}, boundary={6: 0.1})
        a = control_step(z, params, np.random.default_rng(123))
        b = control_step(z, params, np.random.default_rng(123))
        assert a == b

    def test_output_always_within_step_cap(self):
        params = make_params(p=5, max_step=0.25)
        rng = np.random.default_rng(9)
        for _ in range(300):
            z = SensorReadings(
                target=rng.uniform(0.0, 1.2, 5) * (rng.random() < 0.7),
                robot=rng.uniform(0.0, 1.2, 5) * (rng.random() < 0.7),
                boundary=rng.uniform(0.0, 1.2, 5) * (rng.random() < 0.7),
            )
            cmd = control_step(z, params, rng)
            assert 0.0 <= cmd.distance <= params.max_step + 1e-15
