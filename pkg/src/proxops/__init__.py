"""proxops: thruster-level spacecraft proximity-operations simulation and RL.

The public surface mirrors the module layout:

    dynamics      rigid-body propagation under thruster wrenches
    morphology    body/thruster parameterization and validation
    trajectories  geometric reference paths and goal-velocity streams
    env           the episodic tracking environment
    rl            TD3/PPO learners, training and evaluation harness
    metrics       rollout logs, tracking metrics, CSV/JSONL serialization
    server        newline-delimited JSON environment server
    cli           command-line entry points
"""

from .dynamics import (
    Disturbance,
    DisturbanceConfig,
    SpacecraftState,
    Wrench,
    compute_wrench,
    integrate_step,
    sample_disturbance,
)
from .env import (
    ACTION_DIM,
    OBS_DIM,
    EpisodeConfig,
    InitRanges,
    InspectionEnv,
    Observation,
    RewardConfig,
    compute_reward,
    rotation_to_6d,
)
from .errors import (
    ConfigError,
    LifecycleError,
    PropagationError,
    ProxopsError,
    TrainingError,
    ValidationError,
)
from .morphology import (
    Morphology,
    RandomizationRanges,
    ThrusterSpec,
    load_morphology,
    randomize_morphology,
    validate_positive_span,
)
from .trajectories import (
    ReferenceSample,
    TrajectorySpec,
    VelocityStreamSpec,
    integrate_reference,
    sample_goal_velocity,
    sample_reference,
    trajectory_period,
)

__version__ = "0.1.0"
