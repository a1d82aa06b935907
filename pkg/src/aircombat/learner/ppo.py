"""Clipped-surrogate policy optimization with hand-derived gradients.

The per-minibatch objective (maximized) is

    L = mean_i[ min(r_i A_i, clip(r_i, 1-eps, 1+eps) A_i) ]
        + ent_coef * S(log_std)
        - value_coef * mean_i[(V(s_i) - R_i)^2]

with r_i the probability ratio of the stored raw action under the current
versus the collecting policy, A_i the normalized GAE advantage, S the
closed-form diagonal-Gaussian entropy, and R_i the empirical return target.
Gradients are computed analytically and ascended with Adam; a finite
difference oracle in the test suite pins them down.
"""

import csv
import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from ..gateway import AgentAction
from .buffer import RolloutBuffer
from .nets import ActorCritic, NonFiniteActivation, entropy, log_prob, scale_observation

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PPOConfig:
    batch_size: int = 64          # tuning search ran 16..1024
    learning_rate: float = 1.3e-3  # tuning search ran 1e-4..1e-1
    n_steps: int = 2048           # tuning search ran 1024..4096
    n_epochs: int = 47            # tuning search ran 3..50
    gamma: float = 0.9467         # tuning search ran 0.9..0.9999
    clip_range: float = 0.1359    # tuning search ran 0.1..0.4
    ent_coef: float = 5e-4        # tuning search ran 1e-8..1e-1
    gae_lambda: float = 0.95
    value_coef: float = 1.0
    max_updates: int = 500
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    checkpoint_every: int = 50

    def __post_init__(self):
        if self.n_steps % self.batch_size != 0:
            raise ValueError("batch_size must divide n_steps")
        for name in ("batch_size", "learning_rate", "n_steps", "n_epochs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("gamma", "clip_range", "gae_lambda"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1]")


def clipped_surrogate(ratio, advantage, clip_range):
    """min(r*A, clip(r)*A), elementwise; the pessimistic policy objective."""
    ratio = np.asarray(ratio, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    clipped = np.clip(ratio, 1.0 - clip_range, 1.0 + clip_range)
    return np.minimum(ratio * advantage, clipped * advantage)


def loss_and_grads(ac: ActorCritic, obs, actions, logp_old, advantages, returns,
                   cfg: PPOConfig):
    """Full-objective value and analytic parameter gradients for one minibatch.

    Returns (stats dict, grads dict keyed like ac.params). Gradients point in
    the ascent direction of the objective.
    """
    m = obs.shape[0]
    p = ac.params
    eps = cfg.clip_range

    mean, pcache = ac.policy_forward(obs)
    values, vcache = ac.value_forward(obs)
    std = np.exp(p["log_std"])
    logp = log_prob(actions, mean, p["log_std"])
    ratio = np.exp(logp - logp_old)

    unclipped = ratio * advantages
    clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps) * advantages
    surrogate = np.minimum(unclipped, clipped)
    # The pessimistic bound: the effective multiplier never beats the clip
    # band in the favorable direction.
    nonzero = np.abs(advantages) > 1e-12
    eff = surrogate[nonzero] / advantages[nonzero]
    pos = advantages[nonzero] > 0
    assert np.all(eff[pos] <= 1.0 + eps + 1e-9), "clip bound violated for positive advantages"
    assert np.all(eff[~pos] >= 1.0 - eps - 1e-9), "clip bound violated for negative advantages"

    policy_objective = float(surrogate.mean())
    policy_entropy = entropy(p["log_std"])
    value_error = values - returns
    value_loss = float(np.mean(value_error ** 2))
    objective = policy_objective + cfg.ent_coef * policy_entropy - cfg.value_coef * value_loss
    if not math.isfinite(objective):
        raise NonFiniteActivation(
            f"non-finite objective: policy={policy_objective} value={value_loss}")

    grads = {k: np.zeros_like(v) for k, v in p.items()}

    # d objective / d ratio, honoring the min() gate
    use_unclipped = unclipped <= clipped
    inside = (ratio > 1.0 - eps) & (ratio < 1.0 + eps)
    dratio = np.where(use_unclipped, advantages, advantages * inside)
    dlogp = dratio * ratio / m
    zc = (actions - mean) / (std * std)          # d logp / d mean
    dmean = dlogp[:, None] * zc
    ac.policy_backward(pcache, dmean, grads)
    grads["log_std"] += np.sum(dlogp[:, None] * (zc * (actions - mean) - 1.0), axis=0)
    grads["log_std"] += cfg.ent_coef  # entropy term: dS/dlog_std = 1 per dim

    dv = -cfg.value_coef * 2.0 * value_error / m
    ac.value_backward(vcache, dv, grads)

    stats = {
        "objective": objective,
        "policy_objective": policy_objective,
        "value_loss": value_loss,
        "entropy": policy_entropy,
        "clip_fraction": float(np.mean(~use_unclipped & ~inside)),
        "mean_ratio": float(ratio.mean()),
    }
    return stats, grads


class Adam:
    """Adam ascent on a dict of parameter arrays."""

    def __init__(self, params: dict, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict):
        """One maximizing step along grads."""
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            params[k] += self.lr * (self.m[k] / b1c) / (np.sqrt(self.v[k] / b2c) + self.eps)


def ppo_update(ac: ActorCritic, buffer: RolloutBuffer, cfg: PPOConfig,
               adam: Adam, rng: np.random.Generator) -> dict:
    """Shuffled-minibatch epochs over one full rollout buffer.

    A non-finite objective aborts the update and restores the incoming
    parameters (the previous policy keeps collecting).
    """
    assert buffer.full and buffer.advantages is not None
    backup = {k: v.copy() for k, v in ac.params.items()}
    n, m = buffer.n, cfg.batch_size
    stats = {}
    try:
        for _ in range(cfg.n_epochs):
            order = rng.permutation(n)
            for start in range(0, n, m):
                idx = order[start:start + m]
                stats, grads = loss_and_grads(
                    ac, buffer.obs[idx], buffer.actions[idx], buffer.log_probs[idx],
                    buffer.advantages[idx], buffer.returns[idx], cfg)
                adam.step(ac.params, grads)
    except NonFiniteActivation as exc:
        ac.params.update(backup)
        log.error("update aborted, parameters restored: %s", exc)
        stats = dict(stats, aborted=True)
        return stats
    stats["aborted"] = False
    return stats


LOG_COLUMNS = ("update", "total_steps", "mean_episode_reward_100", "objective",
               "policy_objective", "value_loss", "entropy", "clip_fraction",
               "episodes_done", "wall_time_s")


def collect_rollout(env, ac: ActorCritic, buffer: RolloutBuffer,
                    rng: np.random.Generator, obs, episode_returns: deque,
                    running_return: float):
    """Fill the buffer with on-policy steps, resetting through episode ends.

    Returns (last observation, running episodic return, bootstrap value).
    """
    buffer.reset()
    while not buffer.full:
        obs_scaled = scale_observation(obs)
        z, logp, action, value = ac.act(obs_scaled, rng)
        step = env.step(AgentAction(course=float(action[0]), speed=float(action[1])))
        buffer.add(obs_scaled, z, logp, step.reward, step.done, value)
        running_return += step.reward
        if step.done:
            episode_returns.append(running_return)
            running_return = 0.0
            obs = env.reset()
        else:
            obs = step.observation
    bootstrap = 0.0 if buffer.dones[-1] else ac.value_single(scale_observation(obs))
    return obs, running_return, bootstrap


def train(env, cfg: PPOConfig, log_path=None, checkpoint_path=None,
          progress=None, stop_when=None):
    """Alternate rollout collection and policy updates; returns (ac, log rows).

    Writes one CSV row per update; checkpoints periodically and at the end.
    stop_when(mean_reward_100, rows) may end training early.
    """
    streams = np.random.SeedSequence(cfg.seed).spawn(3)
    init_rng = np.random.default_rng(streams[0])
    action_rng = np.random.default_rng(streams[1])
    shuffle_rng = np.random.default_rng(streams[2])

    ac = ActorCritic.initialize(init_rng)
    adam = Adam(ac.params, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    buffer = RolloutBuffer(cfg.n_steps)
    episode_returns = deque(maxlen=100)
    rows = []
    writer = fh = None
    if log_path:
        fh = open(log_path, "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(LOG_COLUMNS)

    def save(path):
        from .checkpoint import save_policy

        save_policy(ac, cfg, path)

    obs = env.reset()
    running_return = 0.0
    t0 = time.monotonic()
    try:
        for update in range(1, cfg.max_updates + 1):
            obs, running_return, bootstrap = collect_rollout(
                env, ac, buffer, action_rng, obs, episode_returns, running_return)
            buffer.finish(bootstrap, cfg.gamma, cfg.gae_lambda)
            stats = ppo_update(ac, buffer, cfg, adam, shuffle_rng)
            mean100 = float(np.mean(episode_returns)) if episode_returns else float("nan")
            row = {
                "update": update,
                "total_steps": update * cfg.n_steps,
                "mean_episode_reward_100": mean100,
                "objective": stats.get("objective", float("nan")),
                "policy_objective": stats.get("policy_objective", float("nan")),
                "value_loss": stats.get("value_loss", float("nan")),
                "entropy": stats.get("entropy", float("nan")),
                "clip_fraction": stats.get("clip_fraction", float("nan")),
                "episodes_done": len(episode_returns),
                "wall_time_s": time.monotonic() - t0,
            }
            rows.append(row)
            if writer:
                writer.writerow([row[c] for c in LOG_COLUMNS])
                fh.flush()
            if progress:
                progress(row)
            if checkpoint_path and update % cfg.checkpoint_every == 0:
                save(checkpoint_path)
            if stop_when and stop_when(mean100, rows):
                break
    finally:
        if checkpoint_path:
            save(checkpoint_path)
        if fh:
            fh.close()
    return ac, rows
