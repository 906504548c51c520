"""Desk-scale model-free learners (TD3, PPO) and the training harness."""

from .nets import Adam, Mlp
from .ppo import PPOHyper, PPOLearner, clipped_surrogate, gae_advantages
from .td3 import TD3Hyper, TD3Learner
from .policies import ObsNormalizer, PPOPolicy, RandomPolicy, TD3Policy, ZeroPolicy
from .train import EvalSummary, TrainConfig, evaluate_policy, train
from .checkpoint import load_checkpoint, load_policy, save_checkpoint

__all__ = [
    "Adam",
    "Mlp",
    "PPOHyper",
    "PPOLearner",
    "clipped_surrogate",
    "gae_advantages",
    "TD3Hyper",
    "TD3Learner",
    "ObsNormalizer",
    "PPOPolicy",
    "RandomPolicy",
    "TD3Policy",
    "ZeroPolicy",
    "EvalSummary",
    "TrainConfig",
    "evaluate_policy",
    "train",
    "load_checkpoint",
    "load_policy",
    "save_checkpoint",
]
