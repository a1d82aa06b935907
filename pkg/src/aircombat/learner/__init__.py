"""From-scratch PPO: actor-critic networks, rollout buffer, clipped-surrogate updates."""

from .nets import (
    ACTION_CENTER,
    ACTION_HALF_RANGE,
    ActorCritic,
    entropy,
    log_prob,
    map_to_action,
    scale_observation,
)
from .buffer import RolloutBuffer, compute_gae
from .ppo import Adam, PPOConfig, clipped_surrogate, loss_and_grads, ppo_update, train
from .checkpoint import CheckpointError, load_policy, save_policy

__all__ = [
    "ActorCritic",
    "scale_observation",
    "map_to_action",
    "log_prob",
    "entropy",
    "ACTION_CENTER",
    "ACTION_HALF_RANGE",
    "RolloutBuffer",
    "compute_gae",
    "PPOConfig",
    "Adam",
    "clipped_surrogate",
    "loss_and_grads",
    "ppo_update",
    "train",
    "save_policy",
    "load_policy",
    "CheckpointError",
]
