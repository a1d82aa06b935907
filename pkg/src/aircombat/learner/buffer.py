"""On-policy rollout storage and generalized advantage estimation."""

import numpy as np

from .nets import ACT_DIM, OBS_DIM


def compute_gae(rewards, values, dones, last_value, gamma, lam):
    """Standard GAE recursion over one rollout.

    dones[t] marks transitions that ended an episode (no bootstrapping across
    them); last_value bootstraps the final state when the rollout stops
    mid-episode. Returns (advantages, returns) with returns = adv + values.
    """
    n = len(rewards)
    adv = np.zeros(n)
    next_adv = 0.0
    next_value = last_value
    for t in range(n - 1, -1, -1):
        cont = 0.0 if dones[t] else 1.0
        delta = rewards[t] + gamma * next_value * cont - values[t]
        next_adv = delta + gamma * lam * cont * next_adv
        adv[t] = next_adv
        next_value = values[t]
    return adv, adv + values


class RolloutBuffer:
    """Fixed-size store of one update's worth of transitions."""

    def __init__(self, n_steps: int, obs_dim: int = OBS_DIM, act_dim: int = ACT_DIM):
        self.n = n_steps
        self.obs = np.zeros((n_steps, obs_dim))
        self.actions = np.zeros((n_steps, act_dim))   # raw net-space samples
        self.log_probs = np.zeros(n_steps)
        self.rewards = np.zeros(n_steps)
        self.dones = np.zeros(n_steps, dtype=bool)
        self.values = np.zeros(n_steps)
        self.pos = 0
        self.advantages = None
        self.returns = None

    @property
    def full(self) -> bool:
        return self.pos == self.n

    def add(self, obs, action, log_prob, reward, done, value):
        i = self.pos
        self.obs[i] = obs
        self.actions[i] = action
        self.log_probs[i] = log_prob
        self.rewards[i] = reward
        self.dones[i] = done
        self.values[i] = value
        self.pos += 1

    def finish(self, last_value: float, gamma: float, lam: float):
        """Compute advantages/returns, then normalize advantages over the batch."""
        assert self.full, "rollout buffer must hold exactly n samples"
        adv, ret = compute_gae(self.rewards, self.values, self.dones,
                               last_value, gamma, lam)
        self.returns = ret
        centered = adv - adv.mean()
        std = centered.std()
        self.advantages = centered / std if std > 1e-8 else centered

    def reset(self):
        self.pos = 0
        self.advantages = None
        self.returns = None
