"""One human-readable configuration document for every component.

Sections: sim, scenario, interpreter, gateway, ppo, run. Every field has a
default mirroring the formation-flight experiment, so an empty file (or no
file) reproduces it; unknown keys fail loudly with the offending key named.
"""

import os
from dataclasses import dataclass, field

import yaml

from .env import EnvConfig
from .gateway import GatewayConfig
from .interpreter import RewardConfig, TerminationConfig
from .learner.ppo import PPOConfig
from .scenario import ScenarioConfig
from .simcore import Envelope

ENV_VAR = "AIRCOMBAT_CONFIG"
SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Configuration problem; message names the offending key."""


@dataclass(frozen=True)
class SimConfig:
    tick_dt: float = 0.1
    envelope: Envelope = field(default_factory=Envelope)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    decision_dt: float = 1.0       # s between actions while training
    eval_decision_dt: float = 0.1  # s between actions while evaluating
    updates: int = 500
    episodes: int = 500            # evaluation episode count
    output_dir: str = "runs"


@dataclass(frozen=True)
class AppConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    termination: TerminationConfig = field(default_factory=TerminationConfig)
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    ppo: PPOConfig = field(default_factory=PPOConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def env_config(self, decision_dt=None, seed=None) -> EnvConfig:
        return EnvConfig(
            tick_dt=self.sim.tick_dt,
            decision_dt=self.run.decision_dt if decision_dt is None else decision_dt,
            scenario=self.scenario,
            reward=self.reward,
            termination=self.termination,
            gateway=self.gateway,
            seed=self.run.seed if seed is None else seed,
        )


def _require_mapping(obj, where):
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigError(f"section {where!r} must be a mapping")
    return obj


def _take(section: dict, where: str, known: dict):
    """Pull known keys, with defaults; reject anything else by name."""
    for key in section:
        if key not in known:
            raise ConfigError(f"unknown key {where}.{key}")
    out = {}
    for key, default in known.items():
        out[key] = section.get(key, default)
    return out


def _build(cls, kwargs, where):
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc


def _pair(value, where):
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ConfigError(f"{where} must be a two-element list")
    return (float(value[0]), float(value[1]))


def parse_config(doc: dict) -> AppConfig:
    doc = _require_mapping(doc, "<root>")
    for key in doc:
        if key not in {"sim", "scenario", "interpreter", "gateway", "ppo", "run"}:
            raise ConfigError(f"unknown section {key!r}")

    sim_raw = _take(_require_mapping(doc.get("sim"), "sim"), "sim",
                    {"tick_dt": 0.1, "envelope": {}})
    env_raw = _take(_require_mapping(sim_raw["envelope"], "sim.envelope"), "sim.envelope", {
        "a_lat_max": 88.29, "omega_cap": 0.5, "a_lon_max": 30.0,
        "climb_rate_max": 100.0, "v_min": 50.0, "v_max": 600.0,
        "k_course": 1.0, "k_speed": 0.5, "k_alt": 0.2})
    sim = SimConfig(tick_dt=float(sim_raw["tick_dt"]),
                    envelope=_build(Envelope, env_raw, "sim.envelope"))

    sc_raw = _take(_require_mapping(doc.get("scenario"), "scenario"), "scenario", {
        "position_box": 20_000.0, "lead_speed_range": [200.0, 400.0],
        "wingman_speed_range": [200.0, 400.0],
        "formation_distance_range": [500.0, 5000.0], "altitude": 5000.0,
        "fixed_formation": None, "wingman_at_point": False})
    scenario = _build(ScenarioConfig, {
        "position_box": float(sc_raw["position_box"]),
        "lead_speed_range": _pair(sc_raw["lead_speed_range"], "scenario.lead_speed_range"),
        "wingman_speed_range": _pair(sc_raw["wingman_speed_range"],
                                     "scenario.wingman_speed_range"),
        "formation_distance_range": _pair(sc_raw["formation_distance_range"],
                                          "scenario.formation_distance_range"),
        "altitude": float(sc_raw["altitude"]),
        "fixed_formation": (tuple(float(v) for v in sc_raw["fixed_formation"])
                            if sc_raw["fixed_formation"] else None),
        "wingman_at_point": bool(sc_raw["wingman_at_point"]),
    }, "scenario")

    interp_raw = _take(_require_mapping(doc.get("interpreter"), "interpreter"),
                       "interpreter", {"reward": {}, "termination": {}})
    reward_raw = _take(_require_mapping(interp_raw["reward"], "interpreter.reward"),
                       "interpreter.reward",
                       {"terms": [{"name": "formation_gaussian", "weight": 1.0}],
                        "a": 5e-7})
    terms = []
    if not isinstance(reward_raw["terms"], list):
        raise ConfigError("interpreter.reward.terms must be a list")
    for i, t in enumerate(reward_raw["terms"]):
        t = _take(_require_mapping(t, f"interpreter.reward.terms[{i}]"),
                  f"interpreter.reward.terms[{i}]", {"name": None, "weight": 1.0})
        if not t["name"]:
            raise ConfigError(f"interpreter.reward.terms[{i}].name is required")
        terms.append((str(t["name"]), float(t["weight"])))
    reward = _build(RewardConfig, {"terms": tuple(terms), "a": float(reward_raw["a"])},
                    "interpreter.reward")

    term_raw = _take(_require_mapping(interp_raw["termination"], "interpreter.termination"),
                     "interpreter.termination", {
                         "max_episode_time": 360.0, "stagnation_window": 180.0,
                         "stagnation_threshold": 1e-9, "eval_time_limit": 600.0,
                         "success_radius": 250.0, "stagnation_enabled": True})
    termination = _build(TerminationConfig, {
        "max_episode_time": float(term_raw["max_episode_time"]),
        "stagnation_window": float(term_raw["stagnation_window"]),
        "stagnation_threshold": float(term_raw["stagnation_threshold"]),
        "eval_time_limit": float(term_raw["eval_time_limit"]),
        "success_radius": float(term_raw["success_radius"]),
        "stagnation_enabled": bool(term_raw["stagnation_enabled"]),
    }, "interpreter.termination")

    gw_raw = _take(_require_mapping(doc.get("gateway"), "gateway"), "gateway",
                   {"fixed_altitude": 5000.0, "controlled_entity": "wingman"})
    gateway = _build(GatewayConfig, {
        "fixed_altitude": float(gw_raw["fixed_altitude"]),
        "controlled_entity": str(gw_raw["controlled_entity"])}, "gateway")

    ppo_raw = _take(_require_mapping(doc.get("ppo"), "ppo"), "ppo", {
        "batch_size": 64, "learning_rate": 1.3e-3, "n_steps": 2048, "n_epochs": 47,
        "gamma": 0.9467, "clip_range": 0.1359, "ent_coef": 5e-4, "gae_lambda": 0.95,
        "value_coef": 1.0, "max_updates": 500, "seed": 0, "checkpoint_every": 50})
    ppo = _build(PPOConfig, {
        "batch_size": int(ppo_raw["batch_size"]),
        "learning_rate": float(ppo_raw["learning_rate"]),
        "n_steps": int(ppo_raw["n_steps"]),
        "n_epochs": int(ppo_raw["n_epochs"]),
        "gamma": float(ppo_raw["gamma"]),
        "clip_range": float(ppo_raw["clip_range"]),
        "ent_coef": float(ppo_raw["ent_coef"]),
        "gae_lambda": float(ppo_raw["gae_lambda"]),
        "value_coef": float(ppo_raw["value_coef"]),
        "max_updates": int(ppo_raw["max_updates"]),
        "seed": int(ppo_raw["seed"]),
        "checkpoint_every": int(ppo_raw["checkpoint_every"]),
    }, "ppo")

    run_raw = _take(_require_mapping(doc.get("run"), "run"), "run", {
        "seed": 0, "decision_dt": 1.0, "eval_decision_dt": 0.1,
        "updates": 500, "episodes": 500, "output_dir": "runs"})
    run = _build(RunConfig, {
        "seed": int(run_raw["seed"]),
        "decision_dt": float(run_raw["decision_dt"]),
        "eval_decision_dt": float(run_raw["eval_decision_dt"]),
        "updates": int(run_raw["updates"]),
        "episodes": int(run_raw["episodes"]),
        "output_dir": str(run_raw["output_dir"]),
    }, "run")

    return AppConfig(sim=sim, scenario=scenario, reward=reward,
                     termination=termination, gateway=gateway, ppo=ppo, run=run)


def load_config(path=None) -> AppConfig:
    """Load the YAML config; path resolution: argument, then $AIRCOMBAT_CONFIG,
    then built-in defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path is None:
        return AppConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file is not valid YAML: {exc}") from None
    return parse_config(doc if doc is not None else {})
