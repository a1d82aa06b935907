"""Episode initial conditions: randomized two-ship formation scenarios."""

import math
from dataclasses import dataclass, field

import numpy as np

from .interpreter import FormationSpec, formation_point
from .simcore import DynamicState, Entity, Envelope, StraightLinePilot, WorldState

LEAD_ID = "lead"
WINGMAN_ID = "wingman"

# Published domain of the formation-point speed observation; the lead must
# stay inside it because the point inherits the lead speed.
POINT_SPEED_DOMAIN = (200.0, 400.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Sampling ranges for randomized episode initialization.

    position_box is the half-width of the square both aircraft spawn in, so
    it directly bounds the initial separation (diagonal of the box).
    """

    position_box: float = 20_000.0          # m, +/- on both axes
    lead_speed_range: tuple = (200.0, 400.0)   # m/s
    wingman_speed_range: tuple = (200.0, 400.0)
    formation_distance_range: tuple = (500.0, 5000.0)  # m
    altitude: float = 5000.0                   # m
    fixed_formation: tuple = None    # (aspect_rad, distance_m) to disable sampling
    wingman_at_point: bool = False   # spawn already in formation (demos, equilibrium checks)

    def __post_init__(self):
        for name in ("lead_speed_range", "wingman_speed_range", "formation_distance_range"):
            lo, hi = getattr(self, name)
            if not (lo <= hi):
                raise ValueError(f"{name} must be a non-empty range")
        lo, hi = self.lead_speed_range
        if lo < POINT_SPEED_DOMAIN[0] or hi > POINT_SPEED_DOMAIN[1]:
            raise ValueError("lead speed range must stay inside the observation domain [200, 400]")
        if self.position_box < 0:
            raise ValueError("position_box must be non-negative")
        if self.altitude <= 0:
            raise ValueError("altitude must be positive")


@dataclass(frozen=True)
class Scenario:
    """One sampled episode start."""

    seed: int
    lead: DynamicState
    wingman: DynamicState
    lead_command: tuple       # (course, speed, altitude) for the scripted lead
    formation: FormationSpec
    altitude: float


def _uniform(rng, lo, hi):
    return float(rng.uniform(lo, hi)) if hi > lo else float(lo)


def sample_scenario(rng: np.random.Generator, cfg: ScenarioConfig, seed: int = 0) -> Scenario:
    """Draw positions/courses/speeds and the formation spec for a new episode.

    The lead flies a straight line at its drawn course and speed; the
    formation spec stays constant for the episode (unless steered live).
    """
    box = cfg.position_box
    lead_x = _uniform(rng, -box, box)
    lead_y = _uniform(rng, -box, box)
    wing_x = _uniform(rng, -box, box)
    wing_y = _uniform(rng, -box, box)
    lead_course = float(rng.uniform(0.0, 2.0 * math.pi))
    lead_speed = _uniform(rng, *cfg.lead_speed_range)
    wing_course = float(rng.uniform(0.0, 2.0 * math.pi))
    wing_speed = _uniform(rng, *cfg.wingman_speed_range)
    if cfg.fixed_formation is not None:
        spec = FormationSpec(*cfg.fixed_formation)
    else:
        aspect = float(rng.uniform(0.0, 2.0 * math.pi))
        distance = _uniform(rng, *cfg.formation_distance_range)
        spec = FormationSpec(aspect, distance)

    alt = cfg.altitude
    lead = DynamicState(x=lead_x, y=lead_y, alt=alt, course=lead_course, speed=lead_speed)
    if cfg.wingman_at_point:
        (px, py), _, _ = formation_point(lead, spec)
        wingman = DynamicState(x=px, y=py, alt=alt, course=lead_course, speed=lead_speed)
    else:
        wingman = DynamicState(x=wing_x, y=wing_y, alt=alt, course=wing_course,
                               speed=wing_speed)
    return Scenario(
        seed=seed,
        lead=lead,
        wingman=wingman,
        lead_command=(lead_course, lead_speed, alt),
        formation=spec,
        altitude=alt,
    )


def build_world(scenario: Scenario, tick_dt: float = 0.1,
                envelope: Envelope = None) -> WorldState:
    """Materialize a two-ship world: scripted lead, externally piloted wingman.

    The experiment keeps entity subsystems to a minimum: no sensors, no
    datalink, noiseless navigation.
    """
    world = WorldState(tick_dt=tick_dt, seed=scenario.seed, envelope=envelope)
    course, speed, alt = scenario.lead_command
    world.add_entity(Entity(LEAD_ID, scenario.lead.copy(),
                            pilot=StraightLinePilot(course, speed, alt)))
    world.add_entity(Entity(WINGMAN_ID, scenario.wingman.copy()))
    return world
