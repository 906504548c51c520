"""Transitions and the uniform replay buffer over preallocated arrays."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Transition:
    """One environment step as stored for off-policy learning."""

    obs: np.ndarray
    action: np.ndarray
    reward: float
    next_obs: np.ndarray
    terminated: bool

    def __post_init__(self):
        object.__setattr__(self, "obs", np.asarray(self.obs, dtype=float))
        object.__setattr__(self, "action", np.asarray(self.action, dtype=float))
        object.__setattr__(self, "next_obs", np.asarray(self.next_obs, dtype=float))
        if self.obs.shape != self.next_obs.shape:
            raise ValueError("obs and next_obs dimensions differ")


class ReplayBuffer:
    def __init__(self, capacity, obs_dim, action_dim):
        self.capacity = int(capacity)
        self.obs = np.zeros((self.capacity, obs_dim))
        self.action = np.zeros((self.capacity, action_dim))
        self.reward = np.zeros(self.capacity)
        self.next_obs = np.zeros((self.capacity, obs_dim))
        self.done = np.zeros(self.capacity)
        self.size = 0
        self._head = 0

    def add(self, transition):
        i = self._head
        self.obs[i] = transition.obs
        self.action[i] = transition.action
        self.reward[i] = transition.reward
        self.next_obs[i] = transition.next_obs
        self.done[i] = float(transition.terminated)
        self._head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size, rng):
        idx = rng.integers(0, self.size, size=batch_size)
        return {
            "obs": self.obs[idx],
            "action": self.action[idx],
            "reward": self.reward[idx],
            "next_obs": self.next_obs[idx],
            "done": self.done[idx],
        }

    def __len__(self):
        return self.size
