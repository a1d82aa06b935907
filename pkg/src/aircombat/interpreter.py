"""Turns raw entity states into agent observations, rewards and episode ends.

All functions here are pure over immutable snapshots; the small Interpreter
class at the bottom just strings them together per decision step and tracks
the trailing reward window for stagnation cuts.
"""

import math
from dataclasses import dataclass, field

from .geometry import bearing, horizontal_distance, wrap_two_pi
from .simcore.types import DynamicState


@dataclass(frozen=True)
class FormationSpec:
    """Where the wingman should be, in the lead aircraft's frame.

    aspect: radians in [0, 2*pi), clockwise from the lead course
    distance: meters > 0
    """

    aspect: float
    distance: float

    def __post_init__(self):
        if not (math.isfinite(self.aspect) and math.isfinite(self.distance)):
            raise ValueError("formation spec fields must be finite")
        if self.distance <= 0:
            raise ValueError("formation distance must be positive")
        object.__setattr__(self, "aspect", wrap_two_pi(self.aspect))


@dataclass(frozen=True)
class Observation:
    """Agent state vector: formation-point course/speed, bearing and distance.

    point_course and point_bearing are degrees in [0, 360); point_speed m/s;
    distance meters >= 0.
    """

    point_course: float
    point_speed: float
    point_bearing: float
    distance: float

    def as_tuple(self):
        return (self.point_course, self.point_speed, self.point_bearing, self.distance)


def formation_point(lead: DynamicState, spec: FormationSpec):
    """Formation point rigidly attached to the lead frame.

    Returns ((x, y), course, speed): position offset by `distance` at
    `aspect` clockwise from the lead course; moves with the lead.
    """
    angle = lead.course + spec.aspect
    pos = (lead.x + spec.distance * math.sin(angle),
           lead.y + spec.distance * math.cos(angle))
    return pos, lead.course, lead.speed


def observation_from_states(lead: DynamicState, wingman: DynamicState,
                            spec: FormationSpec) -> Observation:
    """Observation per the published state table, degrees/meters units.

    A wingman exactly on the point gets bearing 0 by convention.
    """
    (px, py), course, speed = formation_point(lead, spec)
    d = horizontal_distance(wingman.x, wingman.y, px, py)
    brg = 0.0 if d == 0.0 else bearing(wingman.x, wingman.y, px, py)
    return Observation(
        point_course=math.degrees(course),
        point_speed=speed,
        point_bearing=math.degrees(brg),
        distance=d,
    )


def extract_observation(world, wingman_id: str, lead_id: str,
                        spec: FormationSpec) -> Observation:
    """Ground-truth extraction from a live world (raises KeyError if missing)."""
    return observation_from_states(world.entity(lead_id).state,
                                   world.entity(wingman_id).state, spec)


def gaussian_reward(distance: float, a: float = 5e-7) -> float:
    """exp(-a * d^2): 1 on the point, decaying with distance, never zero."""
    if distance < 0:
        raise ValueError("distance must be non-negative")
    if a <= 0:
        raise ValueError("decay parameter must be positive")
    return math.exp(-a * distance * distance)


@dataclass(frozen=True)
class RewardConfig:
    """Weighted reward terms; `a` is the Gaussian decay for the formation term."""

    terms: tuple = (("formation_gaussian", 1.0),)
    a: float = 5e-7

    def __post_init__(self):
        if len(self.terms) == 0:
            raise ConfigurationError("at least one reward term is required")
        for name, weight in self.terms:
            if not math.isfinite(weight):
                raise ConfigurationError(f"reward weight for {name!r} must be finite")


class ConfigurationError(ValueError):
    pass


REWARD_TERMS = {
    # name -> fn(observation, config) -> scalar in [0, 1]
    "formation_gaussian": lambda obs, cfg: gaussian_reward(obs.distance, cfg.a),
}


def evaluate_reward_terms(obs: Observation, cfg: RewardConfig):
    values = []
    for name, _ in cfg.terms:
        try:
            values.append(REWARD_TERMS[name](obs, cfg))
        except KeyError:
            raise ConfigurationError(f"unknown reward term {name!r}") from None
    return values


def combine_rewards(values, cfg: RewardConfig) -> float:
    """Weighted sum of the per-term scalars."""
    if len(values) != len(cfg.terms):
        raise ConfigurationError(
            f"got {len(values)} reward values for {len(cfg.terms)} configured terms")
    return sum(w * v for (_, w), v in zip(cfg.terms, values))


@dataclass(frozen=True)
class TerminationConfig:
    max_episode_time: float = 360.0     # s
    stagnation_window: float = 180.0    # s
    stagnation_threshold: float = 1e-9
    eval_time_limit: float = 600.0      # s
    success_radius: float = 250.0       # m
    stagnation_enabled: bool = True

    def __post_init__(self):
        for name in ("max_episode_time", "stagnation_window",
                     "stagnation_threshold", "eval_time_limit", "success_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"termination field {name!r} must be positive")


def check_termination(episode_clock: float, reward_history, cfg: TerminationConfig):
    """Episode end decision from the clock and time-stamped reward history.

    Returns None to continue, else the reason string. Stagnation fires only
    once a full trailing window of sub-threshold rewards exists, measured in
    simulation time so it is invariant to the decision interval.
    """
    if episode_clock >= cfg.max_episode_time:
        return "time_limit"
    if cfg.stagnation_enabled and episode_clock >= cfg.stagnation_window:
        window_start = episode_clock - cfg.stagnation_window
        stale = all(r < cfg.stagnation_threshold
                    for t, r in reward_history if t > window_start)
        if stale:
            return "stagnation"
    return None


class StagnationTracker:
    """Incremental equivalent of the trailing-window scan in check_termination."""

    def __init__(self, cfg: TerminationConfig):
        self.cfg = cfg
        self.last_good_time = 0.0  # episode start counts as "good"

    def observe(self, t: float, reward: float):
        if reward >= self.cfg.stagnation_threshold:
            self.last_good_time = t

    def stagnated(self, episode_clock: float) -> bool:
        return (self.cfg.stagnation_enabled
                and episode_clock - self.last_good_time >= self.cfg.stagnation_window)


@dataclass
class Interpreter:
    """Per-episode observation/reward/termination pipeline."""

    reward_cfg: RewardConfig = field(default_factory=RewardConfig)
    termination_cfg: TerminationConfig = field(default_factory=TerminationConfig)

    def __post_init__(self):
        self._tracker = StagnationTracker(self.termination_cfg)

    def begin_episode(self):
        self._tracker = StagnationTracker(self.termination_cfg)

    def interpret(self, lead: DynamicState, wingman: DynamicState,
                  spec: FormationSpec, episode_clock: float):
        """One decision step: -> (observation, reward, done_reason or None)."""
        obs = observation_from_states(lead, wingman, spec)
        reward = combine_rewards(evaluate_reward_terms(obs, self.reward_cfg),
                                 self.reward_cfg)
        self._tracker.observe(episode_clock, reward)
        if episode_clock >= self.termination_cfg.max_episode_time:
            reason = "time_limit"
        elif self._tracker.stagnated(episode_clock):
            reason = "stagnation"
        else:
            reason = None
        return obs, reward, reason
