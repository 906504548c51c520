"""Proximal policy optimization with generalized advantage estimation.

The policy is a squashed-mean Gaussian with a state-independent learned
log-std. Gradients of the clipped surrogate, value regression, and entropy
bonus are derived by hand and flow through the same flat-parameter
networks used everywhere else.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from .nets import Adam, Mlp, squash, squash_grad
from .policies import ObsNormalizer, PPOPolicy


def gae_advantages(rewards, values, gamma, lam, dones):
    """Exponentially weighted TD advantages.

    ``values`` must hold one more entry than ``rewards`` (the bootstrap
    value of the state after the last transition). ``dones`` marks
    transitions that ended an episode; they zero the bootstrap and cut the
    accumulation.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=float)
    T = len(rewards)
    if len(values) != T + 1 or len(dones) != T:
        raise ValueError(
            f"length mismatch: rewards {T}, values {len(values)} (want {T + 1}), "
            f"dones {len(dones)} (want {T})"
        )
    advantages = np.zeros(T)
    acc = 0.0
    for t in reversed(range(T)):
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * values[t + 1] * nonterminal - values[t]
        acc = delta + gamma * lam * nonterminal * acc
        advantages[t] = acc
    return advantages


def clipped_surrogate(ratio, advantage, clip_eps):
    """Per-sample clipped objective min(r*A, clip(r)*A)."""
    ratio = np.asarray(ratio, dtype=float)
    advantage = np.asarray(advantage, dtype=float)
    return np.minimum(
        ratio * advantage,
        np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantage,
    )


@dataclass(frozen=True)
class PPOHyper:
    hidden: tuple = (128, 128)
    lr: float = 3e-4
    clip_eps: float = 0.2
    gae_lambda: float = 0.95
    epochs: int = 10
    minibatch_size: int = 64
    entropy_coef: float = 0.0
    value_coef: float = 0.5
    max_grad_norm: float = 0.5
    rollout_steps: int = 512
    init_log_std: float = math.log(0.15)

    def __post_init__(self):
        if not (self.lr > 0 and self.clip_eps > 0 and self.epochs >= 1):
            raise ValueError("PPO rates must be positive")


def _clip_grad(grad, max_norm):
    if max_norm <= 0:
        return grad
    norm = np.linalg.norm(grad)
    if norm > max_norm:
        grad = grad * (max_norm / norm)
    return grad


class PPOLearner:
    def __init__(self, obs_dim, action_dim, hyper, gamma, rng):
        self.hyper = hyper
        self.gamma = gamma
        self.mean_mlp = Mlp((obs_dim, *hyper.hidden, action_dim), rng=rng)
        # start with thrusters mostly off (squashed mean near 0.12)
        self.mean_mlp.params[-action_dim:] = -1.0
        self.log_std = np.full(action_dim, hyper.init_log_std)
        self.value_mlp = Mlp((obs_dim, *hyper.hidden, 1), rng=rng)
        self.opt_mean = Adam(self.mean_mlp.n_params, lr=hyper.lr)
        self.opt_log_std = Adam(action_dim, lr=hyper.lr)
        self.opt_value = Adam(self.value_mlp.n_params, lr=hyper.lr)
        self.normalizer = ObsNormalizer(obs_dim)
        self.policy = PPOPolicy(self.mean_mlp, self.log_std, self.value_mlp, self.normalizer)

    def _losses_and_grads(self, obs, actions, old_logp, advantages, returns):
        """Total loss and flat gradients for one minibatch.

        Loss = -mean(clipped surrogate) + value_coef * value MSE
               - entropy_coef * Gaussian entropy.
        """
        h = self.hyper
        n = len(obs)
        z = self.normalizer.normalize(obs)
        pre = self.mean_mlp.forward(z)
        mean = squash(pre)
        std = np.exp(self.log_std)
        inv_var = 1.0 / (std * std)

        diff = actions - mean
        logp = np.sum(-0.5 * diff * diff * inv_var - self.log_std, axis=1) \
            - 0.5 * actions.shape[1] * math.log(2.0 * math.pi)
        ratio = np.exp(logp - old_logp)
        surr1 = ratio * advantages
        surr2 = np.clip(ratio, 1.0 - h.clip_eps, 1.0 + h.clip_eps) * advantages
        policy_loss = -float(np.mean(np.minimum(surr1, surr2)))

        v = self.value_mlp.forward(z)[:, 0]
        value_loss = float(np.mean((v - returns) ** 2))

        entropy = float(np.sum(self.log_std) + 0.5 * len(std) * math.log(2.0 * math.pi * math.e))
        total = policy_loss + h.value_coef * value_loss - h.entropy_coef * entropy
        if not np.isfinite(total):
            raise TrainingError(
                f"non-finite PPO loss (policy {policy_loss}, value {value_loss})"
            )

        # gradient through the surrogate: only the unclipped branch carries
        pass_through = (surr1 <= surr2).astype(float)
        g_logp = -(pass_through * advantages * ratio) / n
        g_mean = g_logp[:, None] * (diff * inv_var)
        grad_mean_params, _ = self.mean_mlp.backward(g_mean * squash_grad(pre))
        grad_log_std = (g_logp[:, None] * (diff * diff * inv_var - 1.0)).sum(axis=0)
        grad_log_std = grad_log_std - h.entropy_coef
        grad_value_params, _ = self.value_mlp.backward(
            (h.value_coef * 2.0 * (v - returns) / n)[:, None]
        )
        diag = {
            "policy_loss": policy_loss,
            "value_loss": value_loss,
            "entropy": entropy,
            "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > h.clip_eps)),
            "approx_kl": float(np.mean(old_logp - logp)),
        }
        return total, grad_mean_params, grad_log_std, grad_value_params, diag

    def update(self, batch, rng):
        """Multiple epochs of shuffled minibatch ascent on the batch."""
        h = self.hyper
        obs = np.asarray(batch["obs"], dtype=float)
        actions = np.asarray(batch["action"], dtype=float)
        old_logp = np.asarray(batch["logp"], dtype=float)
        advantages = np.asarray(batch["advantage"], dtype=float)
        returns = np.asarray(batch["return"], dtype=float)
        advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)

        n = len(obs)
        last_diag = {}
        for _ in range(h.epochs):
            order = rng.permutation(n)
            for start in range(0, n, h.minibatch_size):
                idx = order[start:start + h.minibatch_size]
                total, g_mean, g_log_std, g_value, diag = self._losses_and_grads(
                    obs[idx], actions[idx], old_logp[idx], advantages[idx], returns[idx]
                )
                self.opt_mean.step(self.mean_mlp.params, _clip_grad(g_mean, h.max_grad_norm))
                self.opt_log_std.step(self.log_std, g_log_std)
                self.opt_value.step(self.value_mlp.params, _clip_grad(g_value, h.max_grad_norm))
                last_diag = diag
        self.policy.log_std = self.log_std
        return last_diag
