"""Policy wrappers shared by training, evaluation, and the CLI."""

import numpy as np

from .nets import squash

ACTION_DIM = 8


class ObsNormalizer:
    """Running mean/std normalization of observations (Welford over batches)."""

    def __init__(self, dim, clip=10.0):
        self.mean = np.zeros(dim)
        self.var = np.ones(dim)
        self.count = 1e-4
        self.clip = clip

    def update(self, batch):
        batch = np.atleast_2d(np.asarray(batch, dtype=float))
        b_mean = batch.mean(axis=0)
        b_var = batch.var(axis=0)
        b_count = batch.shape[0]
        delta = b_mean - self.mean
        total = self.count + b_count
        self.mean = self.mean + delta * (b_count / total)
        m_a = self.var * self.count
        m_b = b_var * b_count
        self.var = (m_a + m_b + delta * delta * self.count * b_count / total) / total
        self.count = total

    def normalize(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / np.sqrt(self.var + 1e-8)
        return np.clip(z, -self.clip, self.clip)

    def to_dict(self):
        return {
            "mean": self.mean.tolist(),
            "var": self.var.tolist(),
            "count": float(self.count),
            "clip": self.clip,
        }

    @classmethod
    def from_dict(cls, d):
        norm = cls(len(d["mean"]), clip=d.get("clip", 10.0))
        norm.mean = np.asarray(d["mean"], dtype=float)
        norm.var = np.asarray(d["var"], dtype=float)
        norm.count = d["count"]
        return norm


class TD3Policy:
    """Deterministic actor with optional clipped Gaussian exploration noise."""

    def __init__(self, actor, normalizer):
        self.actor = actor
        self.normalizer = normalizer

    def act(self, obs, rng=None, noise_scale=0.0):
        z = self.normalizer.normalize(obs)
        action = squash(self.actor.forward(z)[0])
        if noise_scale > 0.0 and rng is not None:
            action = action + rng.normal(0.0, noise_scale, size=action.shape)
        return np.clip(action, 0.0, 1.0)


class PPOPolicy:
    """Squashed-mean Gaussian policy with a separate value head.

    ``act`` is the deterministic (mean) path used for evaluation;
    ``sample`` draws an action and returns its log-probability and the
    state value for rollout collection.
    """

    def __init__(self, mean_mlp, log_std, value_mlp, normalizer):
        self.mean_mlp = mean_mlp
        self.log_std = np.asarray(log_std, dtype=float)
        self.value_mlp = value_mlp
        self.normalizer = normalizer

    def act(self, obs, rng=None, noise_scale=0.0):
        z = self.normalizer.normalize(obs)
        return np.clip(squash(self.mean_mlp.forward(z)[0]), 0.0, 1.0)

    def sample(self, obs, rng):
        z = self.normalizer.normalize(obs)
        mean = squash(self.mean_mlp.forward(z)[0])
        std = np.exp(self.log_std)
        action = mean + std * rng.standard_normal(mean.shape)
        logp = float(
            np.sum(-0.5 * ((action - mean) / std) ** 2 - self.log_std - 0.5 * np.log(2.0 * np.pi))
        )
        value = float(self.value_mlp.forward(z)[0, 0])
        return action, logp, value

    def value(self, obs):
        z = self.normalizer.normalize(obs)
        return float(self.value_mlp.forward(z)[0, 0])


class RandomPolicy:
    """Uniform random activations; the untrained baseline."""

    def act(self, obs, rng=None, noise_scale=0.0):
        if rng is None:
            raise ValueError("RandomPolicy.act needs a generator")
        return rng.uniform(0.0, 1.0, size=ACTION_DIM)


class ZeroPolicy:
    """All thrusters off; free drift."""

    def act(self, obs, rng=None, noise_scale=0.0):
        return np.zeros(ACTION_DIM)
