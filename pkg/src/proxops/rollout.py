"""Scripted and policy-driven rollouts recorded into RolloutLog objects."""

import numpy as np

from .env import ACTION_DIM, InspectionEnv
from .errors import ConfigError
from .metrics import RolloutLog, RolloutStep


def zero_source(obs, step, rng):
    return np.zeros(ACTION_DIM)


def random_source(obs, step, rng):
    return rng.uniform(0.0, 1.0, size=ACTION_DIM)


def constant_source(values):
    action = np.asarray(values, dtype=float)
    if action.shape != (ACTION_DIM,):
        raise ConfigError(f"constant action needs {ACTION_DIM} values")

    def source(obs, step, rng):
        return action

    return source


def policy_source(policy):
    def source(obs, step, rng):
        return policy.act(obs, rng=rng)

    return source


def parse_script(text):
    """Action source from a CLI token: zero | random | constant:v1,...,v8.

    The random script draws one uniform action per step from
    ``default_rng(seed)``, so a session is reproducible from the seed alone.
    """
    if text == "zero":
        return zero_source
    if text == "random":
        return random_source
    if text.startswith("constant:"):
        return constant_source([float(v) for v in text.split(":", 1)[1].split(",")])
    raise ConfigError(f"unknown action script '{text}'")


def run_rollout(episode_cfg, action_source, seed, max_steps=None):
    """Run one episode and record every step.

    ``action_source`` is a callable (obs, step_index, rng) -> action. The
    rollout ends at termination, truncation, or ``max_steps``.
    """
    env = InspectionEnv(episode_cfg)
    rng = np.random.default_rng(seed)
    obs = env.reset(seed=seed)
    log = RolloutLog(
        dt=episode_cfg.dt,
        seed=seed,
        morphology_name=env.morphology.name,
        regime=episode_cfg.regime,
        config_id=env.config_id,
    )
    limit = max_steps if max_steps is not None else episode_cfg.horizon
    for k in range(limit):
        action = np.clip(np.asarray(action_source(obs, k, rng), dtype=float), 0.0, 1.0)
        obs, reward, terminated, truncated, info = env.step(action)
        log.append(
            RolloutStep(
                t=env.time,
                state=env.state,
                reference=env.current_reference(),
                action=action,
                reward=reward,
                terms={k2: info[k2] for k2 in ("r_track", "r_align", "r_stable", "p_mag", "p_rate")},
            )
        )
        if terminated or truncated:
            break
    return log
