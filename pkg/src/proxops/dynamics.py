"""Rigid-body 6-DOF propagation under thruster wrenches.

State convention:
    - position, linear velocity: world frame
    - orientation quaternion: scalar-first, world <- body
    - angular velocity: body frame

The translational update is semi-implicit Euler (velocity first, then
position from the new velocity). The rotational update integrates the
angular-momentum form of Euler's equation,

    dL_world/dt = R @ torque_body,

advancing the world-frame angular momentum first, rotating the pose by the
updated body rate, and recovering omega from the new attitude. This is
first-order consistent with

    omega_dot = I^-1 (tau - omega x I omega)

and, unlike an explicit update of omega itself, conserves world-frame
angular momentum exactly under zero torque instead of spiraling outward.
"""

from dataclasses import dataclass, field

import numpy as np

from . import quat
from .errors import PropagationError, ValidationError

QUAT_NORM_TOL = 1e-9


@dataclass(frozen=True)
class SpacecraftState:
    """Pose and twist of the free-flyer."""

    position: np.ndarray
    orientation: np.ndarray
    lin_velocity: np.ndarray
    ang_velocity: np.ndarray

    def __post_init__(self):
        for name in ("position", "orientation", "lin_velocity", "ang_velocity"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.orientation.shape != (4,):
            raise ValidationError("orientation must be a scalar-first quaternion")
        if abs(np.linalg.norm(self.orientation) - 1.0) > QUAT_NORM_TOL:
            raise ValidationError(
                f"orientation quaternion must be unit norm, |q|={np.linalg.norm(self.orientation):.12f}"
            )
        if not all(
            np.isfinite(v).all()
            for v in (self.position, self.orientation, self.lin_velocity, self.ang_velocity)
        ):
            raise ValidationError("state components must be finite")

    @classmethod
    def at_rest(cls, position=(0.0, 0.0, 0.0), orientation=None):
        q = quat.IDENTITY.copy() if orientation is None else np.asarray(orientation, float)
        return cls(
            position=np.asarray(position, float),
            orientation=q,
            lin_velocity=np.zeros(3),
            ang_velocity=np.zeros(3),
        )

    def rotation(self):
        return quat.to_matrix(self.orientation)


@dataclass(frozen=True)
class Wrench:
    """Force and torque acting on the body, both in the body frame."""

    force: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float))
        object.__setattr__(self, "torque", np.asarray(self.torque, dtype=float))
        if not (np.isfinite(self.force).all() and np.isfinite(self.torque).all()):
            raise ValidationError("wrench components must be finite")

    @classmethod
    def zero(cls):
        return cls(force=np.zeros(3), torque=np.zeros(3))


@dataclass(frozen=True)
class Disturbance:
    """External perturbation: force in the world frame, torque in the body frame."""

    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))
    active: bool = False

    def __post_init__(self):
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float))
        object.__setattr__(self, "torque", np.asarray(self.torque, dtype=float))

    @classmethod
    def none(cls):
        return cls()


@dataclass(frozen=True)
class DisturbanceConfig:
    """Uniform bounds for random perturbations; disabled by default."""

    enabled: bool = False
    max_force: float = 0.0
    max_torque: float = 0.0

    def __post_init__(self):
        if self.max_force < 0.0 or self.max_torque < 0.0:
            raise ValidationError("disturbance maxima must be non-negative")


def compute_wrench(action, morphology):
    """Total body-frame wrench from normalized thruster activations.

    force  = sum_i a_i P_i d_i
    torque = sum_i r_i x (a_i P_i d_i)

    The action must already be clamped to [0, 1] and have one entry per
    thruster. Linear in the action by construction.
    """
    action = np.asarray(action, dtype=float)
    n = len(morphology.thrusters)
    if action.shape != (n,):
        raise ValidationError(f"action must have {n} components, got shape {action.shape}")
    w = morphology.wrench_matrix() @ action
    return Wrench(force=w[:3], torque=w[3:])


def angular_acceleration(ang_velocity, torque, inertia):
    """Instantaneous body rate derivative from Euler's rotational equation."""
    w = np.asarray(ang_velocity, dtype=float)
    return np.linalg.solve(inertia, np.asarray(torque, float) - np.cross(w, inertia @ w))


def integrate_step(state, wrench, disturbance, morphology, dt, step=None):
    """Advance the state by one fixed timestep.

    Raises PropagationError (with step context) if any result component is
    non-finite. The returned quaternion is renormalized every step.
    """
    if not dt > 0.0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    if disturbance is None:
        disturbance = Disturbance.none()

    R = state.rotation()

    # translational semi-implicit Euler
    force_world = R @ wrench.force + disturbance.force
    vel = state.lin_velocity + (dt / morphology.mass) * force_world
    pos = state.position + dt * vel

    # rotational update in angular-momentum form
    inertia = morphology.inertia
    torque_body = wrench.torque + disturbance.torque
    ang_mom_world = R @ (inertia @ state.ang_velocity) + dt * (R @ torque_body)
    omega_est = np.linalg.solve(inertia, R.T @ ang_mom_world)
    q = quat.mul(state.orientation, quat.from_rotation_vector(dt * omega_est))
    q = q / np.linalg.norm(q)
    omega = np.linalg.solve(inertia, quat.to_matrix(q).T @ ang_mom_world)

    if not (
        np.isfinite(pos).all()
        and np.isfinite(vel).all()
        and np.isfinite(q).all()
        and np.isfinite(omega).all()
    ):
        raise PropagationError(
            f"non-finite state after integration step {step if step is not None else '?'}",
            step=step,
            dt=dt,
        )
    return SpacecraftState(position=pos, orientation=q, lin_velocity=vel, ang_velocity=omega)


def sample_disturbance(config, rng):
    """Draw a uniform disturbance within the configured bounds.

    A disabled config (or zero maxima) yields an exact zero disturbance.
    Deterministic given the generator state.
    """
    if not config.enabled or (config.max_force == 0.0 and config.max_torque == 0.0):
        return Disturbance.none()
    force = rng.uniform(-config.max_force, config.max_force, size=3)
    torque = rng.uniform(-config.max_torque, config.max_torque, size=3)
    return Disturbance(force=force, torque=torque, active=True)
