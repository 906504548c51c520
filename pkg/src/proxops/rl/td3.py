"""Twin-delayed deterministic policy gradient learner.

Clipped double-Q targets with smoothing noise on the target action, both
critics regressed to the same target, the actor updated every
``policy_delay`` updates, and Polyak-averaged target networks. Actions live
in [0, 1]; the actor output is squashed into that box and noise is applied
on the squashed action.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from .nets import Adam, Mlp, squash, squash_grad
from .policies import ObsNormalizer, TD3Policy


@dataclass(frozen=True)
class TD3Hyper:
    hidden: tuple = (128, 128)
    lr: float = 1e-3
    tau: float = 0.005
    policy_delay: int = 2
    target_noise: float = 0.1
    noise_clip: float = 0.25
    expl_noise: float = 0.1
    buffer_capacity: int = 100_000
    batch_size: int = 128
    start_steps: int = 1000

    def __post_init__(self):
        if not (self.lr > 0 and self.tau > 0 and self.policy_delay >= 1):
            raise ValueError("TD3 rates must be positive and policy delay >= 1")


class TD3Learner:
    def __init__(self, obs_dim, action_dim, hyper, gamma, rng):
        self.hyper = hyper
        self.gamma = gamma
        self.action_dim = action_dim
        actor_widths = (obs_dim, *hyper.hidden, action_dim)
        critic_widths = (obs_dim + action_dim, *hyper.hidden, 1)
        self.actor = Mlp(actor_widths, rng=rng)
        # bias the squashed output toward thrusters-off at init: a fresh
        # policy that fires everything at 50% just blasts away from the target
        self.actor.params[-action_dim:] = -1.0
        self.critic1 = Mlp(critic_widths, rng=rng)
        self.critic2 = Mlp(critic_widths, rng=rng)
        self.target_actor = self.actor.copy()
        self.target_critic1 = self.critic1.copy()
        self.target_critic2 = self.critic2.copy()
        self.opt_actor = Adam(self.actor.n_params, lr=hyper.lr)
        self.opt_critic1 = Adam(self.critic1.n_params, lr=hyper.lr)
        self.opt_critic2 = Adam(self.critic2.n_params, lr=hyper.lr)
        self.normalizer = ObsNormalizer(obs_dim)
        self.policy = TD3Policy(self.actor, self.normalizer)
        self.updates = 0

    def compute_targets(self, batch, rng):
        """Bellman targets y = r + gamma * (1 - done) * min(Q1', Q2').

        Built exclusively from the target networks; smoothing noise on the
        squashed target action is clipped, then the action re-clipped into
        the box. With zero noise the targets are a deterministic function
        of the batch.
        """
        h = self.hyper
        z_next = self.normalizer.normalize(batch["next_obs"])
        a_next = squash(self.target_actor.forward(z_next))
        if h.target_noise > 0.0:
            noise = np.clip(
                rng.normal(0.0, h.target_noise, size=a_next.shape),
                -h.noise_clip,
                h.noise_clip,
            )
            a_next = a_next + noise
        a_next = np.clip(a_next, 0.0, 1.0)
        x_next = np.concatenate([z_next, a_next], axis=1)
        q1 = self.target_critic1.forward(x_next)[:, 0]
        q2 = self.target_critic2.forward(x_next)[:, 0]
        return batch["reward"] + self.gamma * (1.0 - batch["done"]) * np.minimum(q1, q2)

    def critic_loss_and_grad(self, critic, x, y):
        """Mean squared Bellman error and its parameter gradient."""
        q = critic.forward(x)[:, 0]
        err = q - y
        loss = float(np.mean(err**2))
        grad_params, _ = critic.backward((2.0 * err / len(y))[:, None])
        return loss, grad_params

    def actor_loss_and_grad(self, z):
        """Deterministic policy gradient objective -mean Q1(s, pi(s)).

        The gradient flows through the first critic's action-input
        sensitivity and the squashing nonlinearity; critic parameters are
        left untouched.
        """
        n = len(z)
        pre = self.actor.forward(z)
        a_pi = squash(pre)
        x_pi = np.concatenate([z, a_pi], axis=1)
        q = self.critic1.forward(x_pi)[:, 0]
        loss = float(-np.mean(q))
        _, grad_in = self.critic1.backward(np.full((n, 1), -1.0 / n))
        grad_a = grad_in[:, z.shape[1]:]
        grad_params, _ = self.actor.backward(grad_a * squash_grad(pre))
        return loss, grad_params

    def update(self, batch, rng):
        """One gradient step on both critics, plus a delayed actor step."""
        h = self.hyper
        y = self.compute_targets(batch, rng)
        if not np.isfinite(y).all():
            raise TrainingError("non-finite TD3 targets")
        z = self.normalizer.normalize(batch["obs"])
        x = np.concatenate([z, batch["action"]], axis=1)

        diag = {}
        for name, critic, opt in (
            ("critic1", self.critic1, self.opt_critic1),
            ("critic2", self.critic2, self.opt_critic2),
        ):
            loss, grad_params = self.critic_loss_and_grad(critic, x, y)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite {name} loss")
            opt.step(critic.params, grad_params)
            diag[f"{name}_loss"] = loss

        self.updates += 1
        if self.updates % h.policy_delay == 0:
            actor_loss, grad_params = self.actor_loss_and_grad(z)
            if not np.isfinite(actor_loss):
                raise TrainingError("non-finite actor loss")
            self.opt_actor.step(self.actor.params, grad_params)
            self._soft_update()
            diag["actor_loss"] = actor_loss
        return diag

    def _soft_update(self):
        tau = self.hyper.tau
        for net, target in (
            (self.actor, self.target_actor),
            (self.critic1, self.target_critic1),
            (self.critic2, self.target_critic2),
        ):
            target.params += tau * (net.params - target.params)
