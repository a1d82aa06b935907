"""Shared test oracles: finite differences and off-policy minibatch builders."""

import numpy as np

from aircombat.learner import ActorCritic, log_prob


def flat(params, keys=None):
    keys = keys or sorted(params)
    return np.concatenate([np.asarray(params[k]).ravel() for k in keys])


def fd_gradient(fn, params, h=1e-5):
    """Central finite differences of fn() over every scalar in params."""
    keys = sorted(params)
    grads = {k: np.zeros_like(params[k]) for k in keys}
    for k in keys:
        arr = params[k]
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + h
            hi = fn()
            arr[idx] = orig - h
            lo = fn()
            arr[idx] = orig
            grads[k][idx] = (hi - lo) / (2.0 * h)
    return grads


def make_batch(ac, m=8, seed=0, spread=0.05):
    """A minibatch whose logp_old comes from a nearby policy, so ratios are
    spread around 1 but kept clear of the clip kinks (finite differences stay
    smooth)."""
    rng = np.random.default_rng(seed)
    obs = rng.standard_normal((m, 4))
    old = ActorCritic({k: v + spread * rng.standard_normal(v.shape)
                       for k, v in ac.params.items()})
    mean_old, _ = old.policy_forward(obs)
    std_old = np.exp(old.params["log_std"])
    z = mean_old + std_old * rng.standard_normal((m, 2))
    logp_old = log_prob(z, mean_old, old.params["log_std"])
    adv = rng.standard_normal(m)
    ret = rng.standard_normal(m)
    return obs, z, logp_old, adv, ret


def ratio_margins_ok(ac, obs, z, logp_old, clip_range, margin=1e-3):
    mean, _ = ac.policy_forward(obs)
    ratio = np.exp(log_prob(z, mean, ac.params["log_std"]) - logp_old)
    return (np.all(np.abs(ratio - (1 - clip_range)) > margin)
            and np.all(np.abs(ratio - (1 + clip_range)) > margin))
