import numpy as np
import pytest

from proxops import quat
from proxops.dynamics import (
    DisturbanceConfig,
    SpacecraftState,
    Wrench,
    angular_acceleration,
    compute_wrench,
    integrate_step,
    sample_disturbance,
)
from proxops.errors import ValidationError

from conftest import make_morphology


def brute_force_wrench(action, morphology):
    """Independent oracle: plain python summation of the two defining sums."""
    force = [0.0, 0.0, 0.0]
    torque = [0.0, 0.0, 0.0]
    for a, th in zip(action, morphology.thrusters):
        fx = a * th.max_thrust * th.direction[0]
        fy = a * th.max_thrust * th.direction[1]
        fz = a * th.max_thrust * th.direction[2]
        rx, ry, rz = th.offset
        force[0] += fx
        force[1] += fy
        force[2] += fz
        torque[0] += ry * fz - rz * fy
        torque[1] += rz * fx - rx * fz
        torque[2] += rx * fy - ry * fx
    return np.array(force), np.array(torque)


def random_morphology(rng):
    n = 8
    dirs = rng.normal(size=(n, 3))
    offsets = rng.uniform(-0.3, 0.3, size=(n, 3))
    powers = rng.uniform(0.2, 2.0, size=n)
    inertia = rng.uniform(0.1, 2.0, size=3)
    return make_morphology(dirs, offsets, powers, mass=rng.uniform(1.0, 30.0),
                           inertia=inertia)


class TestComputeWrench:
    def test_zero_action(self, mk1):
        w = compute_wrench(np.zeros(8), mk1)
        assert np.all(w.force == 0.0) and np.all(w.torque == 0.0)

    def test_single_thruster_no_lever_arm(self):
        morph = make_morphology(dirs=np.array([[1.0, 0, 0]] * 8))
        action = np.array([1.0] + [0.0] * 7)
        w = compute_wrench(action, morph)
        np.testing.assert_allclose(w.force, [1.0, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(w.torque, [0.0, 0.0, 0.0], atol=1e-15)

    def test_single_thruster_offset_lever_arm(self):
        # r = (0,1,0), f = (1,0,0): torque = r x f = (0, 0, -1)
        offsets = np.zeros((8, 3))
        offsets[0] = [0.0, 1.0, 0.0]
        morph = make_morphology(dirs=np.array([[1.0, 0, 0]] * 8), offsets=offsets)
        w = compute_wrench(np.array([1.0] + [0.0] * 7), morph)
        np.testing.assert_allclose(w.force, [1.0, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(w.torque, [0.0, 0.0, -1.0], atol=1e-15)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(123)
        for _ in range(200):
            morph = random_morphology(rng)
            action = rng.uniform(0.0, 1.0, size=8)
            w = compute_wrench(action, morph)
            f_ref, t_ref = brute_force_wrench(action, morph)
            scale = max(np.abs(f_ref).max(), np.abs(t_ref).max(), 1e-30)
            assert np.abs(w.force - f_ref).max() <= 1e-12 * scale
            assert np.abs(w.torque - t_ref).max() <= 1e-12 * scale

    def test_linearity_and_additivity(self, mk1):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a = rng.uniform(0.0, 1.0, size=8)
            alpha = rng.uniform(0.0, 1.0)
            w_full = compute_wrench(a, mk1)
            w_scaled = compute_wrench(alpha * a, mk1)
            np.testing.assert_allclose(w_scaled.force, alpha * w_full.force, rtol=1e-12, atol=1e-15)
            np.testing.assert_allclose(w_scaled.torque, alpha * w_full.torque, rtol=1e-12, atol=1e-15)
            # additivity across disjoint activations
            mask = rng.uniform(size=8) < 0.5
            a1, a2 = a * mask, a * (~mask)
            w1, w2 = compute_wrench(a1, mk1), compute_wrench(a2, mk1)
            np.testing.assert_allclose(w1.force + w2.force, w_full.force, rtol=1e-12, atol=1e-15)
            np.testing.assert_allclose(w1.torque + w2.torque, w_full.torque, rtol=1e-12, atol=1e-15)

    def test_wrong_action_length(self, mk1):
        with pytest.raises(ValidationError):
            compute_wrench(np.zeros(7), mk1)


class TestIntegrateStep:
    def test_free_drift(self, mk1):
        state = SpacecraftState(
            position=np.zeros(3), orientation=quat.IDENTITY,
            lin_velocity=np.array([1.0, 0.0, 0.0]), ang_velocity=np.zeros(3),
        )
        out = integrate_step(state, Wrench.zero(), None, mk1, dt=0.1)
        np.testing.assert_allclose(out.position, [0.1, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(out.lin_velocity, [1.0, 0.0, 0.0], atol=1e-15)

    def test_torque_free_spherical_inertia(self):
        morph = make_morphology(np.eye(3).repeat(3, axis=0)[:8].reshape(8, 3) + 1e-9,
                                inertia=(1.0, 1.0, 1.0))
        state = SpacecraftState(
            position=np.zeros(3), orientation=quat.IDENTITY,
            lin_velocity=np.zeros(3), ang_velocity=np.array([0.0, 0.0, 1.0]),
        )
        for _ in range(200):
            state = integrate_step(state, Wrench.zero(), None, morph, dt=0.05)
            np.testing.assert_allclose(state.ang_velocity, [0.0, 0.0, 1.0], atol=1e-12)

    def test_instantaneous_angular_acceleration(self):
        # I = diag(1,2,3), w = (1,1,1): I^-1(-w x Iw) = (-1, 1, -1/3)
        inertia = np.diag([1.0, 2.0, 3.0])
        wdot = angular_acceleration([1.0, 1.0, 1.0], np.zeros(3), inertia)
        np.testing.assert_allclose(wdot, [-1.0, 1.0, -1.0 / 3.0], rtol=1e-15)

    def test_step_consistent_with_eulers_equation(self):
        morph = make_morphology(np.tile([1.0, 0, 0], (8, 1)), inertia=(1.0, 2.0, 3.0))
        state = SpacecraftState(
            position=np.zeros(3), orientation=quat.IDENTITY,
            lin_velocity=np.zeros(3), ang_velocity=np.array([1.0, 1.0, 1.0]),
        )
        h = 1e-6
        out = integrate_step(state, Wrench.zero(), None, morph, dt=h)
        wdot_fd = (out.ang_velocity - state.ang_velocity) / h
        np.testing.assert_allclose(wdot_fd, [-1.0, 1.0, -1.0 / 3.0], atol=1e-4)

    def test_linear_momentum_conserved(self, mk1):
        state = SpacecraftState(
            position=np.zeros(3), orientation=quat.from_axis_angle([0.3, 1.0, -0.2], 0.8),
            lin_velocity=np.array([0.4, -0.2, 0.1]), ang_velocity=np.array([0.5, -1.0, 0.7]),
        )
        p0 = mk1.mass * state.lin_velocity
        for _ in range(1000):
            state = integrate_step(state, Wrench.zero(), None, mk1, dt=0.05)
            p = mk1.mass * state.lin_velocity
            assert np.abs(p - p0).max() <= 1e-12 * np.abs(p0).max()

    def test_world_angular_momentum_conserved(self):
        morph = make_morphology(np.tile([1.0, 0, 0], (8, 1)), inertia=(1.0, 2.0, 3.0))
        state = SpacecraftState(
            position=np.zeros(3), orientation=quat.IDENTITY,
            lin_velocity=np.zeros(3), ang_velocity=np.array([1.0, 1.0, 1.0]),
        )
        L0 = state.rotation() @ (morph.inertia @ state.ang_velocity)
        for _ in range(1000):
            state = integrate_step(state, Wrench.zero(), None, morph, dt=0.05)
        L = state.rotation() @ (morph.inertia @ state.ang_velocity)
        assert np.linalg.norm(L - L0) / np.linalg.norm(L0) < 1e-4

    def test_quaternion_norm_every_step(self, mk1):
        rng = np.random.default_rng(5)
        state = SpacecraftState(
            position=np.zeros(3), orientation=quat.IDENTITY,
            lin_velocity=np.zeros(3), ang_velocity=rng.normal(size=3),
        )
        for k in range(500):
            action = rng.uniform(0.0, 1.0, size=8)
            state = integrate_step(state, compute_wrench(action, mk1), None, mk1, dt=0.05)
            assert abs(np.linalg.norm(state.orientation) - 1.0) <= 1e-9

    def test_deterministic_trajectories(self, mk1):
        def run():
            rng = np.random.default_rng(42)
            state = SpacecraftState.at_rest()
            out = []
            for _ in range(100):
                action = rng.uniform(0.0, 1.0, size=8)
                state = integrate_step(state, compute_wrench(action, mk1), None, mk1, dt=0.05)
                out.append(np.concatenate([state.position, state.orientation,
                                           state.lin_velocity, state.ang_velocity]))
            return np.array(out)

        a, b = run(), run()
        assert np.array_equal(a, b)

    def test_rejects_bad_dt(self, mk1):
        with pytest.raises(ValidationError):
            integrate_step(SpacecraftState.at_rest(), Wrench.zero(), None, mk1, dt=0.0)


class TestSampleDisturbance:
    def test_disabled_config_is_zero(self):
        d = sample_disturbance(DisturbanceConfig(), np.random.default_rng(0))
        assert not d.active
        assert np.all(d.force == 0.0) and np.all(d.torque == 0.0)

    def test_zero_max_force_is_zero(self):
        cfg = DisturbanceConfig(enabled=True, max_force=0.0, max_torque=0.0)
        d = sample_disturbance(cfg, np.random.default_rng(3))
        assert np.all(d.force == 0.0) and np.all(d.torque == 0.0)

    def test_samples_bounded(self):
        cfg = DisturbanceConfig(enabled=True, max_force=0.1, max_torque=0.02)
        rng = np.random.default_rng(11)
        for _ in range(10_000):
            d = sample_disturbance(cfg, rng)
            assert np.abs(d.force).max() <= 0.1
            assert np.abs(d.torque).max() <= 0.02

    def test_deterministic_per_seed(self):
        cfg = DisturbanceConfig(enabled=True, max_force=0.5, max_torque=0.1)
        d1 = sample_disturbance(cfg, np.random.default_rng(9))
        d2 = sample_disturbance(cfg, np.random.default_rng(9))
        assert np.array_equal(d1.force, d2.force)
        assert np.array_equal(d1.torque, d2.torque)

    def test_negative_ranges_rejected(self):
        with pytest.raises(ValidationError):
            DisturbanceConfig(enabled=True, max_force=-1.0)
