"""YAML config documents -> validated runtime objects.

Three document kinds share the same format: morphologies, episodes, and
training runs. Keys carry their SI unit as a suffix (``dt_s``,
``out_of_bounds_m``). Bundled defaults live under ``proxops/configs`` and
can be referenced by bare name (e.g. ``episode: hover``).
"""

import math
from pathlib import Path

import numpy as np
import yaml

from .dynamics import DisturbanceConfig
from .env import EpisodeConfig, InitRanges, RewardConfig
from .errors import ConfigError
from .morphology import RandomizationRanges, load_morphology
from .rl.ppo import PPOHyper
from .rl.td3 import TD3Hyper
from .rl.train import TrainConfig
from .trajectories import TrajectorySpec, VelocityStreamSpec

CONFIG_DIR = Path(__file__).parent / "configs"


def bundled_config_path(name):
    path = CONFIG_DIR / f"{name}.yaml"
    if not path.exists():
        raise ConfigError(f"no bundled config named '{name}'")
    return path


def load_yaml(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return doc


def _vec3(value, key):
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ConfigError(f"'{key}' must be a 3-vector")
    return arr


def reward_config_from_dict(d):
    d = d or {}
    return RewardConfig(
        weight_track=float(d.get("weight_track", 1.0)),
        weight_align=float(d.get("weight_align", 0.5)),
        weight_stable=float(d.get("weight_stable", 0.25)),
        weight_mag=float(d.get("weight_mag", 0.01)),
        weight_rate=float(d.get("weight_rate", 0.05)),
        track_scale=float(d.get("track_scale_m", 0.5)),
        align_scale=float(d.get("align_scale", 1.0)),
        stability_scale=float(d.get("stability_scale", 0.5)),
        quad_coeff=float(d.get("quad_coeff", 0.01)),
        gate_radius=float(d.get("gate_radius_m", 0.5)),
        gate_align=float(d.get("gate_align", 0.5)),
    )


def trajectory_spec_from_dict(d):
    if not isinstance(d, dict) or "shape" not in d:
        raise ConfigError("trajectory spec needs at least a 'shape' key")
    return TrajectorySpec(
        shape=str(d["shape"]),
        speed=float(d.get("speed_mps", 0.1)),
        center=_vec3(d.get("center_m", (0.0, 0.0, 0.0)), "center_m"),
        plane_quat=np.asarray(d.get("plane_quat_wxyz", (1.0, 0.0, 0.0, 0.0)), dtype=float),
        radius=float(d.get("radius_m", 1.0)),
        length=float(d.get("length_m", 1.0)),
        width=float(d.get("width_m", 2.0)),
        height=float(d.get("height_m", 1.0)),
        amplitude=float(d.get("amplitude_m", 1.0)),
        amp_x=float(d.get("amp_x_m", 1.0)),
        amp_y=float(d.get("amp_y_m", 1.0)),
        freq_x=int(d.get("freq_x", 2)),
        freq_y=int(d.get("freq_y", 3)),
        phase=float(d.get("phase_rad", math.pi / 4)),
        radial_rate=float(d.get("radial_rate_m_per_rad", 0.05)),
    )


def stream_spec_from_dict(d):
    d = d or {}
    return VelocityStreamSpec(
        speed_bounds=tuple(d.get("speed_bounds_mps", (0.05, 0.15))),
        hold=float(d.get("hold_s", 5.0)),
        component_bounds=tuple(d.get("component_bounds_mps", (0.15, 0.15, 0.15))),
    )


def _morphologies_from(d, base_dir):
    d = d or {}
    sources = d.get("sources", ["mk1"])
    morphs = []
    for src in sources:
        if isinstance(src, dict):
            morphs.append(load_morphology(src))
            continue
        path = Path(src)
        if not path.suffix:
            path = bundled_config_path(str(src))
        elif not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        morphs.append(load_morphology(path))
    randomize = None
    if "randomize" in d and d["randomize"]:
        r = d["randomize"]
        randomize = RandomizationRanges(
            mass=tuple(r.get("mass", (1.0, 1.0))),
            inertia=tuple(r.get("inertia", (1.0, 1.0))),
            power=tuple(r.get("power", (1.0, 1.0))),
        )
    return morphs, randomize


def episode_config_from_dict(d, base_dir=None):
    morphs, randomize = _morphologies_from(d.get("morphology"), base_dir)
    init_d = d.get("init", {})
    box = init_d.get("position_box_m", [[-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]])
    init = InitRanges(
        position_low=_vec3(box[0], "position_box_m[0]"),
        position_high=_vec3(box[1], "position_box_m[1]"),
        attitude_dispersion=float(init_d.get("attitude_dispersion_rad", 0.5)),
    )
    dist_d = d.get("disturbance", {})
    disturbance = DisturbanceConfig(
        enabled=bool(dist_d.get("enabled", False)),
        max_force=float(dist_d.get("max_force_n", 0.0)),
        max_torque=float(dist_d.get("max_torque_nm", 0.0)),
    )
    stream_d = d.get("stream", {})
    trajectory = None
    if d.get("trajectory"):
        trajectory = trajectory_spec_from_dict(d["trajectory"])
    return EpisodeConfig(
        morphologies=morphs,
        dt=float(d.get("dt_s", 0.05)),
        horizon=int(d.get("horizon", 1000)),
        discount=float(d.get("discount", 0.99)),
        regime=str(d.get("regime", "velocity_stream")),
        init=init,
        randomize=randomize,
        stream=stream_spec_from_dict(stream_d),
        stream_origin=_vec3(stream_d.get("origin_m", (2.0, 0.0, 0.0)), "origin_m"),
        trajectory=trajectory,
        asset_center=_vec3(d.get("asset_center_m", (0.0, 0.0, 0.0)), "asset_center_m"),
        disturbance=disturbance,
        out_of_bounds=float(d.get("out_of_bounds_m", 20.0)),
        reward=reward_config_from_dict(d.get("reward")),
    )


def episode_config_from_source(source, base_dir=None):
    """Resolve an episode config given a dict, a path, or a bundled name."""
    if isinstance(source, dict):
        return episode_config_from_dict(source, base_dir)
    path = Path(source)
    if not path.suffix:
        path = bundled_config_path(str(source))
    elif not path.is_absolute() and base_dir is not None:
        path = Path(base_dir) / path
    return episode_config_from_dict(load_yaml(path), base_dir=path.parent)


def _hyper_from(d, cls, **renames):
    d = dict(d or {})
    kwargs = {}
    for key, value in d.items():
        field = renames.get(key, key)
        kwargs[field] = tuple(value) if field == "hidden" else value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad hyperparameter block: {exc}") from exc


def train_config_from_dict(d, base_dir=None):
    """Parse a training document into (TrainConfig, EpisodeConfig)."""
    if "episode" not in d:
        raise ConfigError("training config needs an 'episode' key (name, path, or inline)")
    episode = episode_config_from_source(d["episode"], base_dir)
    gamma = d.get("gamma")
    train = TrainConfig(
        algorithm=str(d.get("algorithm", "td3")),
        seed=int(d.get("seed", 0)),
        env_count=int(d.get("env_count", 1)),
        total_steps=int(d.get("total_steps", 20_000)),
        eval_every=int(d.get("eval_every", 5_000)),
        eval_seeds=tuple(int(s) for s in d.get("eval_seeds", (1001, 1002, 1003))),
        gamma=None if gamma is None else float(gamma),
        td3=_hyper_from(d.get("td3"), TD3Hyper),
        ppo=_hyper_from(d.get("ppo"), PPOHyper),
    )
    return train, episode
