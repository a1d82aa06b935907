"""Actor-critic networks and the diagonal-Gaussian action head.

Both nets are small tanh MLPs (4 -> 64 -> out) with linear output heads; the
policy's log-std is a learned state-independent 2-vector. Everything runs in
float64 numpy with hand-written backward passes so the full-objective
gradient can be checked against finite differences.
"""

import math

import numpy as np

OBS_DIM = 4
ACT_DIM = 2
HIDDEN = 64

LOG_2PI = math.log(2.0 * math.pi)

# Observations arrive in published units (degrees / m/s / meters) and are
# affinely squashed to roughly [-1, 1] before the tanh nets; distance uses a
# 10 km scale and clips at 4 so far spawns stay finite and informative.
OBS_CENTER = np.array([180.0, 300.0, 180.0, 0.0])
OBS_SCALE = np.array([180.0, 100.0, 180.0, 10_000.0])
DISTANCE_CLIP = (-1.0, 4.0)

# Net output space [-1, 1] maps affinely onto the published action domains.
ACTION_CENTER = np.array([math.pi, 300.0])       # course rad, speed m/s
ACTION_HALF_RANGE = np.array([math.pi, 200.0])
ACTION_LOW = ACTION_CENTER - ACTION_HALF_RANGE
ACTION_HIGH = ACTION_CENTER + ACTION_HALF_RANGE


class NonFiniteActivation(FloatingPointError):
    """A net produced NaN/inf; carries a diagnostic dump."""


def scale_observation(obs) -> np.ndarray:
    """Observation (published units) -> net input, shape (4,)."""
    raw = np.asarray(obs.as_tuple() if hasattr(obs, "as_tuple") else obs, dtype=np.float64)
    scaled = (raw - OBS_CENTER) / OBS_SCALE
    scaled[3] = min(max(scaled[3], DISTANCE_CLIP[0]), DISTANCE_CLIP[1])
    return scaled


def map_to_action(z) -> np.ndarray:
    """Net-output-space sample -> (course rad, speed m/s), clamped to domain."""
    a = ACTION_CENTER + ACTION_HALF_RANGE * np.asarray(z, dtype=np.float64)
    return np.clip(a, ACTION_LOW, ACTION_HIGH)


def log_prob(z, mean, log_std):
    """Diagonal-Gaussian log density of z rows; shape (m,)."""
    std = np.exp(log_std)
    u = (z - mean) / std
    return -0.5 * np.sum(u * u, axis=-1) - np.sum(log_std) - 0.5 * ACT_DIM * LOG_2PI

def entropy(log_std) -> float:
    """Closed-form entropy of the diagonal Gaussian (state independent)."""
    return float(np.sum(0.5 + 0.5 * LOG_2PI + log_std))


def _orthogonal(rows, cols, gain, rng):
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


def init_params(rng, hidden=HIDDEN, obs_dim=OBS_DIM, act_dim=ACT_DIM) -> dict:
    """Orthogonal initialization; tiny policy head, unit value head, zero log-std."""
    return {
        "pW1": _orthogonal(hidden, obs_dim, math.sqrt(2.0), rng),
        "pb1": np.zeros(hidden),
        "pW2": _orthogonal(act_dim, hidden, 0.01, rng),
        "pb2": np.zeros(act_dim),
        "log_std": np.zeros(act_dim),
        "vW1": _orthogonal(hidden, obs_dim, math.sqrt(2.0), rng),
        "vb1": np.zeros(hidden),
        "vW2": _orthogonal(1, hidden, 1.0, rng),
        "vb2": np.zeros(1),
    }


class ActorCritic:
    """Parameter container plus forward/backward passes."""

    def __init__(self, params: dict):
        self.params = params

    @classmethod
    def initialize(cls, seed_or_rng=0, hidden=HIDDEN, obs_dim=OBS_DIM, act_dim=ACT_DIM):
        rng = (seed_or_rng if isinstance(seed_or_rng, np.random.Generator)
               else np.random.default_rng(seed_or_rng))
        return cls(init_params(rng, hidden, obs_dim, act_dim))

    def copy(self) -> "ActorCritic":
        return ActorCritic({k: v.copy() for k, v in self.params.items()})

    # -- forward ---------------------------------------------------------------

    def policy_forward(self, x: np.ndarray):
        """x (m, obs) -> action means (m, act); returns (mean, cache)."""
        p = self.params
        h = np.tanh(x @ p["pW1"].T + p["pb1"])
        mean = h @ p["pW2"].T + p["pb2"]
        if not np.all(np.isfinite(mean)):
            raise NonFiniteActivation(f"policy produced non-finite means: {mean!r}")
        return mean, (x, h)

    def value_forward(self, x: np.ndarray):
        """x (m, obs) -> value estimates (m,); returns (v, cache)."""
        p = self.params
        h = np.tanh(x @ p["vW1"].T + p["vb1"])
        v = (h @ p["vW2"].T + p["vb2"])[:, 0]
        if not np.all(np.isfinite(v)):
            raise NonFiniteActivation(f"value net produced non-finite output: {v!r}")
        return v, (x, h)

    def policy_backward(self, cache, dmean, grads: dict):
        x, h = cache
        p = self.params
        grads["pW2"] += dmean.T @ h
        grads["pb2"] += dmean.sum(axis=0)
        dh = (dmean @ p["pW2"]) * (1.0 - h * h)
        grads["pW1"] += dh.T @ x
        grads["pb1"] += dh.sum(axis=0)

    def value_backward(self, cache, dv, grads: dict):
        x, h = cache
        p = self.params
        dout = dv[:, None]
        grads["vW2"] += dout.T @ h
        grads["vb2"] += dout.sum(axis=0)
        dh = (dout @ p["vW2"]) * (1.0 - h * h)
        grads["vW1"] += dh.T @ x
        grads["vb1"] += dh.sum(axis=0)

    # -- rollout-time single-observation paths ----------------------------------

    def act(self, obs_scaled: np.ndarray, rng: np.random.Generator):
        """Sample an action for one observation.

        Returns (z, log_prob, action, value): the raw net-space sample, its
        pre-clamp log density, the mapped+clamped action, and the value
        estimate used for advantage bootstrapping.
        """
        p = self.params
        h = np.tanh(p["pW1"] @ obs_scaled + p["pb1"])
        mean = p["pW2"] @ h + p["pb2"]
        hv = np.tanh(p["vW1"] @ obs_scaled + p["vb1"])
        value = float((p["vW2"] @ hv + p["vb2"])[0])
        if not (np.all(np.isfinite(mean)) and math.isfinite(value)):
            raise NonFiniteActivation(
                f"non-finite forward pass: mean={mean!r} value={value!r} obs={obs_scaled!r}")
        std = np.exp(p["log_std"])
        z = mean + std * rng.standard_normal(mean.shape)
        logp = float(log_prob(z[None, :], mean[None, :], p["log_std"])[0])
        return z, logp, map_to_action(z), value

    def deterministic_action(self, obs_scaled: np.ndarray) -> np.ndarray:
        p = self.params
        h = np.tanh(p["pW1"] @ obs_scaled + p["pb1"])
        return map_to_action(p["pW2"] @ h + p["pb2"])

    def value_single(self, obs_scaled: np.ndarray) -> float:
        p = self.params
        hv = np.tanh(p["vW1"] @ obs_scaled + p["vb1"])
        return float((p["vW2"] @ hv + p["vb2"])[0])
