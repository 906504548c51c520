"""Training and evaluation harness over parallel environments.

Collection is round-robin over ``env_count`` independent environments, so a
run is a pure function of its configuration and seed. Every evaluation
appends one JSON line to ``metrics.jsonl``:

    {"step", "mean_return", "std_return", "dist_err_m", "ang_err_frob", "action_rate"}

and drops a checkpoint next to it.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..env import ACTION_DIM, OBS_DIM, InspectionEnv
from ..errors import ConfigError
from .buffer import ReplayBuffer, Transition
from .checkpoint import save_policy
from .ppo import PPOHyper, PPOLearner, gae_advantages
from .td3 import TD3Hyper, TD3Learner

ALGORITHMS = ("td3", "ppo")


@dataclass(frozen=True)
class TrainConfig:
    algorithm: str = "td3"
    seed: int = 0
    env_count: int = 1
    total_steps: int = 20_000
    eval_every: int = 5_000
    eval_seeds: tuple = (1001, 1002, 1003)
    gamma: float = None  # falls back to the episode discount
    td3: TD3Hyper = field(default_factory=TD3Hyper)
    ppo: PPOHyper = field(default_factory=PPOHyper)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if self.env_count < 1 or self.total_steps < 0 or self.eval_every < 1:
            raise ConfigError("env_count >= 1, total_steps >= 0, eval_every >= 1 required")
        if self.gamma is not None and not 0.0 < self.gamma < 1.0:
            raise ConfigError("gamma must lie in (0, 1)")


@dataclass(frozen=True)
class EvalSummary:
    mean_return: float
    std_return: float
    dist_err_m: float
    ang_err_frob: float
    action_rate: float
    returns: tuple

    def record(self, step):
        return {
            "step": step,
            "mean_return": self.mean_return,
            "std_return": self.std_return,
            "dist_err_m": self.dist_err_m,
            "ang_err_frob": self.ang_err_frob,
            "action_rate": self.action_rate,
        }


@dataclass
class TrainResult:
    checkpoint_path: Path
    metrics_path: Path
    records: list
    policy: object


def evaluate_policy(policy, episode_cfg, seeds):
    """Deterministic rollouts (no exploration noise) over a fixed seed set."""
    returns = []
    dist_errs = []
    ang_errs = []
    rates = []
    env = InspectionEnv(episode_cfg)
    for seed in seeds:
        rng = np.random.default_rng(int(seed))
        obs = env.reset(seed=int(seed))
        prev_action = np.zeros(ACTION_DIM)
        total = 0.0
        while True:
            action = policy.act(obs, rng=rng)
            obs, reward, terminated, truncated, info = env.step(action)
            total += reward
            dist_errs.append(info["dist_err_m"])
            ang_errs.append(info["ang_err_frob"])
            rates.append(float(np.linalg.norm(action - prev_action)))
            prev_action = action
            if terminated or truncated:
                break
        returns.append(total)
    return EvalSummary(
        mean_return=float(np.mean(returns)),
        std_return=float(np.std(returns)),
        dist_err_m=float(np.mean(dist_errs)),
        ang_err_frob=float(np.mean(ang_errs)),
        action_rate=float(np.mean(rates)),
        returns=tuple(returns),
    )


class _MetricsLog:
    def __init__(self, path):
        self.path = Path(path)
        self.records = []
        self.path.write_text("")

    def append(self, record):
        self.records.append(record)
        with open(self.path, "a") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def _episode_seeder(seed_seq):
    rng = np.random.default_rng(seed_seq)
    while True:
        yield int(rng.integers(0, 2**63 - 1))


def train(train_cfg, episode_cfg, out_dir):
    """Run one seeded training job; returns paths to its artifacts."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    gamma = train_cfg.gamma if train_cfg.gamma is not None else episode_cfg.discount

    root = np.random.SeedSequence(train_cfg.seed)
    net_seq, expl_seq, batch_seq, *env_seqs = root.spawn(3 + train_cfg.env_count)
    net_rng = np.random.default_rng(net_seq)
    expl_rng = np.random.default_rng(expl_seq)
    batch_rng = np.random.default_rng(batch_seq)
    seeders = [_episode_seeder(s) for s in env_seqs]

    if train_cfg.algorithm == "td3":
        learner = TD3Learner(OBS_DIM, ACTION_DIM, train_cfg.td3, gamma, net_rng)
    else:
        learner = PPOLearner(OBS_DIM, ACTION_DIM, train_cfg.ppo, gamma, net_rng)

    metrics = _MetricsLog(out_dir / "metrics.jsonl")

    def checkpoint(step):
        path = out_dir / f"checkpoint_{step:08d}.ckpt"
        save_policy(path, learner.policy, train_cfg.algorithm,
                    extra_meta={"step": step, "seed": train_cfg.seed})
        return path

    def evaluate(step):
        summary = evaluate_policy(learner.policy, episode_cfg, train_cfg.eval_seeds)
        metrics.append(summary.record(step))
        print(f"[{train_cfg.algorithm} seed {train_cfg.seed}] step {step}: "
              f"return {summary.mean_return:.2f} +- {summary.std_return:.2f}, "
              f"dist {summary.dist_err_m:.3f} m")
        return summary

    evaluate(0)
    last_ckpt = checkpoint(0)

    if train_cfg.total_steps > 0:
        if train_cfg.algorithm == "td3":
            last_ckpt = _train_td3(train_cfg, episode_cfg, learner, seeders,
                                    expl_rng, batch_rng, evaluate, checkpoint)
        else:
            last_ckpt = _train_ppo(train_cfg, episode_cfg, learner, seeders,
                                    expl_rng, batch_rng, evaluate, checkpoint)

    return TrainResult(
        checkpoint_path=last_ckpt,
        metrics_path=metrics.path,
        records=metrics.records,
        policy=learner.policy,
    )


def _train_td3(cfg, episode_cfg, learner, seeders, expl_rng, batch_rng, evaluate, checkpoint):
    h = cfg.td3
    buffer = ReplayBuffer(h.buffer_capacity, OBS_DIM, ACTION_DIM)
    envs = [InspectionEnv(episode_cfg) for _ in range(cfg.env_count)]
    obs = []
    for env, seeder in zip(envs, seeders):
        o = env.reset(seed=next(seeder))
        learner.normalizer.update(o)
        obs.append(o)

    last_ckpt = None
    for step in range(1, cfg.total_steps + 1):
        i = (step - 1) % cfg.env_count
        if step <= h.start_steps:
            action = expl_rng.uniform(0.0, 1.0, size=ACTION_DIM)
        else:
            action = learner.policy.act(obs[i], rng=expl_rng, noise_scale=h.expl_noise)
        next_obs, reward, terminated, truncated, _ = envs[i].step(action)
        learner.normalizer.update(next_obs)
        buffer.add(Transition(obs[i], action, reward, next_obs, terminated))
        if terminated or truncated:
            obs[i] = envs[i].reset(seed=next(seeders[i]))
            learner.normalizer.update(obs[i])
        else:
            obs[i] = next_obs

        if step > h.start_steps and len(buffer) >= h.batch_size:
            learner.update(buffer.sample(h.batch_size, batch_rng), batch_rng)

        if step % cfg.eval_every == 0 or step == cfg.total_steps:
            evaluate(step)
            last_ckpt = checkpoint(step)
    return last_ckpt


def _train_ppo(cfg, episode_cfg, learner, seeders, expl_rng, batch_rng, evaluate, checkpoint):
    h = cfg.ppo
    envs = [InspectionEnv(episode_cfg) for _ in range(cfg.env_count)]
    obs = []
    for env, seeder in zip(envs, seeders):
        o = env.reset(seed=next(seeder))
        learner.normalizer.update(o)
        obs.append(o)

    global_step = 0
    next_eval = cfg.eval_every
    last_ckpt = None
    while global_step < cfg.total_steps:
        segment = {i: {"obs": [], "action": [], "logp": [], "value": [],
                       "reward": [], "done": []} for i in range(cfg.env_count)}
        steps_this_round = min(h.rollout_steps, max(1, cfg.total_steps - global_step))
        for _ in range(steps_this_round):
            for i, env in enumerate(envs):
                action, logp, value = learner.policy.sample(obs[i], expl_rng)
                next_obs, reward, terminated, truncated, _ = env.step(action)
                learner.normalizer.update(next_obs)
                done = terminated or truncated
                if truncated and not terminated:
                    # bootstrap through time-limit truncation
                    reward = reward + learner.gamma * learner.policy.value(next_obs)
                seg = segment[i]
                seg["obs"].append(obs[i])
                seg["action"].append(action)
                seg["logp"].append(logp)
                seg["value"].append(value)
                seg["reward"].append(reward)
                seg["done"].append(float(done))
                if done:
                    obs[i] = env.reset(seed=next(seeders[i]))
                    learner.normalizer.update(obs[i])
                else:
                    obs[i] = next_obs
                global_step += 1

        batch = {"obs": [], "action": [], "logp": [], "advantage": [], "return": []}
        for i in range(cfg.env_count):
            seg = segment[i]
            values = np.array(seg["value"] + [learner.policy.value(obs[i])])
            adv = gae_advantages(seg["reward"], values, learner.gamma, h.gae_lambda, seg["done"])
            batch["obs"].extend(seg["obs"])
            batch["action"].extend(seg["action"])
            batch["logp"].extend(seg["logp"])
            batch["advantage"].extend(adv)
            batch["return"].extend(adv + values[:-1])
        batch = {k: np.asarray(v) for k, v in batch.items()}
        learner.update(batch, batch_rng)

        if global_step >= next_eval or global_step >= cfg.total_steps:
            evaluate(global_step)
            last_ckpt = checkpoint(global_step)
            while next_eval <= global_step:
                next_eval += cfg.eval_every
    return last_ckpt
