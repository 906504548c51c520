"""Episodic proximity-operations environment.

One episode: a free-flyer is spawned at a randomized pose near a reference
(either a geometric inspection path or a virtual point driven by a streamed
goal velocity) and must track it using 8 one-sided thrusters.

Observations are fully relative and body-frame, so they are invariant under
any rotation of the world frame:

    [prev_action (8), v_body (3), omega_body (3), delta_p_body (3), delta_R6 (6)]

for a total of 23 components. ``delta_R6`` stacks the first two columns of
the body-to-reference rotation matrix, a continuous 6-number orientation
encoding.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import quat
from .dynamics import (
    Disturbance,
    DisturbanceConfig,
    SpacecraftState,
    compute_wrench,
    integrate_step,
    sample_disturbance,
)
from .errors import ConfigError, LifecycleError, ValidationError
from .morphology import randomize_morphology
from .trajectories import (
    TrajectorySpec,
    VelocityStreamSpec,
    integrate_reference,
    sample_reference,
)

OBS_DIM = 23
ACTION_DIM = 8

REGIMES = ("velocity_stream", "fixed_trajectory")

# fixed per-step info keys, also mirrored over the wire protocol
INFO_KEYS = ("dist_err_m", "ang_err_frob", "r_track", "r_align", "r_stable", "p_mag", "p_rate")


@dataclass(frozen=True)
class Observation:
    """Structured view of the flat observation vector."""

    prev_action: np.ndarray
    lin_velocity: np.ndarray
    ang_velocity: np.ndarray
    delta_p: np.ndarray
    delta_r6: np.ndarray

    def as_vector(self):
        return np.concatenate(
            [self.prev_action, self.lin_velocity, self.ang_velocity, self.delta_p, self.delta_r6]
        )

    @classmethod
    def from_vector(cls, vec):
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (OBS_DIM,):
            raise ValidationError(f"observation must have {OBS_DIM} components, got {vec.shape}")
        return cls(
            prev_action=vec[0:8],
            lin_velocity=vec[8:11],
            ang_velocity=vec[11:14],
            delta_p=vec[14:17],
            delta_r6=vec[17:23],
        )


@dataclass(frozen=True)
class RewardConfig:
    """Weights, length scales and gates of the shaped tracking reward.

    Gating is a hard threshold: the alignment bonus only applies within
    ``gate_radius`` of the reference, the stability bonus additionally
    requires the orientation error (Frobenius norm of delta_R - I) to be
    below ``gate_align``.
    """

    weight_track: float = 1.0
    weight_align: float = 0.5
    weight_stable: float = 0.25
    weight_mag: float = 0.01
    weight_rate: float = 0.05
    track_scale: float = 0.5       # m
    align_scale: float = 1.0       # dimensionless
    stability_scale: float = 0.5   # dimensionless
    quad_coeff: float = 0.01       # 1/m^2
    gate_radius: float = 0.5       # m
    gate_align: float = 0.5        # Frobenius threshold

    def __post_init__(self):
        if not (self.track_scale > 0.0 and self.align_scale > 0.0 and self.stability_scale > 0.0):
            raise ValidationError("reward length scales must be > 0")
        if not (self.gate_radius > 0.0 and self.gate_align > 0.0):
            raise ValidationError("reward gates must be > 0")


@dataclass(frozen=True)
class InitRanges:
    """Initial pose dispersion relative to the reference start pose."""

    position_low: np.ndarray = field(default_factory=lambda: np.array([-1.0, -1.0, -1.0]))
    position_high: np.ndarray = field(default_factory=lambda: np.array([1.0, 1.0, 1.0]))
    attitude_dispersion: float = 0.5  # rad

    def __post_init__(self):
        object.__setattr__(self, "position_low", np.asarray(self.position_low, dtype=float))
        object.__setattr__(self, "position_high", np.asarray(self.position_high, dtype=float))
        if np.any(self.position_low > self.position_high):
            raise ValidationError("init position box must satisfy low <= high")
        if self.attitude_dispersion < 0.0:
            raise ValidationError("attitude dispersion must be >= 0")


@dataclass(frozen=True)
class EpisodeConfig:
    """Everything an episode needs: timestep, horizon, regime, morphology pool."""

    morphologies: tuple
    dt: float = 0.05
    horizon: int = 1000
    discount: float = 0.99
    regime: str = "velocity_stream"
    init: InitRanges = field(default_factory=InitRanges)
    randomize: object = None  # RandomizationRanges or None
    stream: VelocityStreamSpec = field(default_factory=VelocityStreamSpec)
    stream_origin: np.ndarray = field(default_factory=lambda: np.array([2.0, 0.0, 0.0]))
    trajectory: TrajectorySpec = None
    asset_center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    disturbance: DisturbanceConfig = field(default_factory=DisturbanceConfig)
    out_of_bounds: float = 20.0
    reward: RewardConfig = field(default_factory=RewardConfig)

    def __post_init__(self):
        object.__setattr__(self, "morphologies", tuple(self.morphologies))
        object.__setattr__(self, "stream_origin", np.asarray(self.stream_origin, dtype=float))
        object.__setattr__(self, "asset_center", np.asarray(self.asset_center, dtype=float))
        if not self.dt > 0.0:
            raise ConfigError("dt must be > 0")
        if self.horizon <= 0:
            raise ConfigError("horizon must be > 0")
        if not 0.0 < self.discount < 1.0:
            raise ConfigError("discount must lie in (0, 1)")
        if self.regime not in REGIMES:
            raise ConfigError(f"regime must be one of {REGIMES}, got '{self.regime}'")
        if self.regime == "fixed_trajectory" and self.trajectory is None:
            raise ConfigError("fixed_trajectory regime requires a trajectory spec")
        if not self.morphologies:
            raise ConfigError("at least one morphology is required")
        if not self.out_of_bounds > 0.0:
            raise ConfigError("out-of-bounds radius must be > 0")


def rotation_to_6d(R):
    """First two columns of a rotation matrix, stacked into 6 numbers."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValidationError("rotation matrix must be 3x3")
    if np.abs(R.T @ R - np.eye(3)).max() > 1e-6:
        raise ValidationError("matrix is not orthonormal within 1e-6")
    return np.concatenate([R[:, 0], R[:, 1]])


def compute_reward(delta_p, delta_R, action, prev_action, config):
    """Shaped tracking reward and its per-term breakdown.

    Terms: a tanh-shaped position bonus with a quadratic distance penalty,
    a proximity-gated orientation bonus on the Frobenius error of delta_R,
    a doubly-gated stillness bonus on the action rate, and quadratic
    magnitude/rate penalties. All bonuses peak at 1 for a perfectly parked,
    aligned, and quiet spacecraft, so with non-negative weights the reward
    is maximized exactly there.
    """
    dist = float(np.linalg.norm(delta_p))
    frob = float(np.linalg.norm(delta_R - np.eye(3)))
    rate = float(np.linalg.norm(np.asarray(action) - np.asarray(prev_action)))

    r_track = (1.0 - math.tanh(dist / config.track_scale)) - config.quad_coeff * dist * dist
    in_gate = dist <= config.gate_radius
    r_align = (1.0 - math.tanh(frob / config.align_scale)) if in_gate else 0.0
    r_stable = (
        (1.0 - math.tanh(rate / config.stability_scale))
        if (in_gate and frob <= config.gate_align)
        else 0.0
    )
    p_mag = -float(np.dot(action, action))
    p_rate = -rate * rate

    terms = {
        "r_track": r_track,
        "r_align": r_align,
        "r_stable": r_stable,
        "p_mag": p_mag,
        "p_rate": p_rate,
    }
    reward = (
        config.weight_track * r_track
        + config.weight_align * r_align
        + config.weight_stable * r_stable
        + config.weight_mag * p_mag
        + config.weight_rate * p_rate
    )
    return reward, terms


def config_hash(config):
    """Stable short hash of an episode config (used to tag rollout logs)."""
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if hasattr(o, "__dict__"):
            return {k: v for k, v in vars(o).items()}
        if isinstance(o, tuple):
            return list(o)
        return str(o)

    blob = json.dumps(config, default=default, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


class InspectionEnv:
    """Single-owner episodic environment around one spacecraft.

    The de-facto episodic API: ``reset(seed)`` -> observation,
    ``step(action)`` -> (observation, reward, terminated, truncated, info).
    Identical seeds reproduce bit-identical episodes on one platform.
    """

    def __init__(self, config):
        self.config = config
        self.config_id = config_hash(config)
        self._state = None
        self._morphology = None
        self._prev_action = None
        self._step_count = 0
        self._done = False
        self._started = False
        self._stream_seed = 0
        self._rng = None
        self._last_seed = None

    # -- episode lifecycle ---------------------------------------------------

    def reset(self, seed=None):
        cfg = self.config
        self._rng = np.random.default_rng(seed)
        self._last_seed = seed
        # independent stream seed so trajectory noise and init noise decouple
        self._stream_seed = int(self._rng.integers(0, 2**32))

        idx = int(self._rng.integers(0, len(cfg.morphologies)))
        morph = cfg.morphologies[idx]
        if cfg.randomize is not None:
            morph = randomize_morphology(morph, cfg.randomize, self._rng)
        self._morphology = morph

        ref = self._reference(0.0)
        offset = self._rng.uniform(cfg.init.position_low, cfg.init.position_high)
        axis = self._rng.normal(size=3)
        angle = self._rng.uniform(0.0, cfg.init.attitude_dispersion)
        if np.linalg.norm(axis) < 1e-12:
            axis = np.array([1.0, 0.0, 0.0])
        q0 = quat.mul(ref.orientation, quat.from_axis_angle(axis, angle))
        q0 = q0 / np.linalg.norm(q0)

        self._state = SpacecraftState(
            position=ref.position + offset,
            orientation=q0,
            lin_velocity=np.zeros(3),
            ang_velocity=np.zeros(3),
        )
        self._prev_action = np.zeros(ACTION_DIM)
        self._step_count = 0
        self._done = False
        self._started = True
        return self._observe(ref)

    def step(self, action):
        if not self._started:
            raise LifecycleError("step() before reset()")
        if self._done:
            raise LifecycleError("step() after the episode ended; call reset()")
        cfg = self.config
        action = np.clip(np.asarray(action, dtype=float), 0.0, 1.0)
        if action.shape != (ACTION_DIM,):
            raise ValidationError(f"action must have {ACTION_DIM} components")

        wrench = compute_wrench(action, self._morphology)
        disturbance = (
            sample_disturbance(cfg.disturbance, self._rng)
            if cfg.disturbance.enabled
            else Disturbance.none()
        )
        self._state = integrate_step(
            self._state, wrench, disturbance, self._morphology, cfg.dt, step=self._step_count
        )
        self._step_count += 1
        t = self._step_count * cfg.dt
        ref = self._reference(t)

        delta_p_body, delta_R = self._relative_pose(ref)
        reward, terms = compute_reward(delta_p_body, delta_R, action, self._prev_action, cfg.reward)

        dist = float(np.linalg.norm(delta_p_body))
        terminated = dist > cfg.out_of_bounds
        truncated = self._step_count >= cfg.horizon
        self._done = terminated or truncated

        obs = self._observe(ref, action)
        self._prev_action = action
        info = {
            "dist_err_m": dist,
            "ang_err_frob": float(np.linalg.norm(delta_R - np.eye(3))),
            **terms,
        }
        return obs, reward, terminated, truncated, info

    # -- helpers ---------------------------------------------------------------

    @property
    def state(self):
        return self._state

    @property
    def morphology(self):
        return self._morphology

    @property
    def time(self):
        return self._step_count * self.config.dt

    def current_reference(self):
        return self._reference(self.time)

    def _reference(self, t):
        cfg = self.config
        if cfg.regime == "fixed_trajectory":
            return sample_reference(cfg.trajectory, t)
        return integrate_reference(
            cfg.stream, t, cfg.stream_origin, self._stream_seed, asset_center=cfg.asset_center
        )

    def _relative_pose(self, ref):
        R_body = self._state.rotation()
        delta_p_body = R_body.T @ (ref.position - self._state.position)
        delta_R = R_body.T @ quat.to_matrix(ref.orientation)
        return delta_p_body, delta_R

    def _observe(self, ref, action=None):
        R_body = self._state.rotation()
        delta_p_body, delta_R = self._relative_pose(ref)
        obs = Observation(
            prev_action=(self._prev_action if action is None else np.asarray(action, float)),
            lin_velocity=R_body.T @ self._state.lin_velocity,
            ang_velocity=self._state.ang_velocity.copy(),
            delta_p=delta_p_body,
            delta_r6=rotation_to_6d(delta_R),
        )
        return obs.as_vector()
