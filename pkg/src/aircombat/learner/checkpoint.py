"""Policy checkpoints: versioned JSON documents, bit-exact round trips."""

import hashlib
import json
from dataclasses import asdict

import numpy as np

from .nets import (
    ACTION_CENTER,
    ACTION_HALF_RANGE,
    DISTANCE_CLIP,
    OBS_CENTER,
    OBS_SCALE,
    ActorCritic,
)

FORMAT = "aircombat-policy"
VERSION = 1


class CheckpointError(ValueError):
    pass


def config_fingerprint(cfg) -> str:
    blob = json.dumps(asdict(cfg), sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def save_policy(ac: ActorCritic, cfg, path):
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "config_fingerprint": config_fingerprint(cfg) if cfg is not None else None,
        "shapes": {k: list(v.shape) for k, v in ac.params.items()},
        "params": {k: v.tolist() for k, v in ac.params.items()},
        "observation_scaling": {
            "center": OBS_CENTER.tolist(),
            "scale": OBS_SCALE.tolist(),
            "distance_clip": list(DISTANCE_CLIP),
        },
        "action_mapping": {
            "center": ACTION_CENTER.tolist(),
            "half_range": ACTION_HALF_RANGE.tolist(),
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_policy(path) -> ActorCritic:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    if doc.get("format") != FORMAT:
        raise CheckpointError(f"{path} is not a policy checkpoint")
    if doc.get("version") != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {doc.get('version')!r}")
    for key in ("shapes", "params"):
        if key not in doc:
            raise CheckpointError(f"checkpoint missing {key!r}")
    params = {}
    for name, shape in doc["shapes"].items():
        if name not in doc["params"]:
            raise CheckpointError(f"checkpoint missing parameter {name!r}")
        arr = np.asarray(doc["params"][name], dtype=np.float64)
        if list(arr.shape) != shape:
            raise CheckpointError(
                f"parameter {name!r} has shape {list(arr.shape)}, expected {shape}")
        if not np.all(np.isfinite(arr)):
            raise CheckpointError(f"parameter {name!r} contains non-finite values")
        params[name] = arr
    return ActorCritic(params)
