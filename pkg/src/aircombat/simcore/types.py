"""Core simulation data types."""

import math
from dataclasses import dataclass, field
from enum import Enum

from ..geometry import clamp, wrap_two_pi


class Source(str, Enum):
    """Origin of a perceived state; also its fusion tie-break priority."""

    NAVIGATION = "navigation"
    SENSOR = "sensor"
    DATALINK = "datalink"


# Higher wins on equal timestamps.
SOURCE_PRIORITY = {Source.NAVIGATION: 2, Source.SENSOR: 1, Source.DATALINK: 0}


@dataclass
class DynamicState:
    """Ground-truth kinematic state of a flying entity.

    x, y         : east/north position [m]
    alt          : height above sea level [m], >= 0
    course       : radians in [0, 2*pi), clockwise from north
    speed        : horizontal speed [m/s]
    a_lon        : longitudinal acceleration [m/s^2] (last commanded)
    turn_rate    : [rad/s] (last commanded)
    climb_rate   : [m/s] (last commanded)
    """

    x: float = 0.0
    y: float = 0.0
    alt: float = 0.0
    course: float = 0.0
    speed: float = 0.0
    a_lon: float = 0.0
    turn_rate: float = 0.0
    climb_rate: float = 0.0

    def copy(self) -> "DynamicState":
        return DynamicState(
            self.x, self.y, self.alt, self.course, self.speed,
            self.a_lon, self.turn_rate, self.climb_rate,
        )


@dataclass(frozen=True)
class ManeuverCommand:
    """Desired altitude, speed and course an aircraft should try to achieve."""

    altitude: float
    speed: float
    course: float

    def __post_init__(self):
        for name in ("altitude", "speed", "course"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidCommandError(f"non-finite maneuver command field {name!r}")

    @staticmethod
    def hold(state: DynamicState) -> "ManeuverCommand":
        """The equilibrium command for a state (autopilot fixed point)."""
        return ManeuverCommand(altitude=state.alt, speed=state.speed, course=state.course)


class InvalidCommandError(ValueError):
    pass


@dataclass(frozen=True)
class PerceivedState:
    """One entity's belief about another entity (or itself)."""

    subject_id: str
    x: float
    y: float
    alt: float
    course: float
    speed: float
    perceived_at: float
    source: Source


@dataclass(frozen=True)
class Envelope:
    """Physical limits and autopilot gains approximating a fighter airframe.

    The turn-rate ceiling is speed dependent: min(omega_cap, a_lat_max / v),
    approximating a 9 g lateral-load limit.
    """

    a_lat_max: float = 88.29     # m/s^2, 9 g
    omega_cap: float = 0.5       # rad/s
    a_lon_max: float = 30.0      # m/s^2
    climb_rate_max: float = 100.0  # m/s
    v_min: float = 50.0          # m/s
    v_max: float = 600.0         # m/s
    k_course: float = 1.0        # 1/s
    k_speed: float = 0.5         # 1/s
    k_alt: float = 0.2           # 1/s

    def __post_init__(self):
        for name in (
            "a_lat_max", "omega_cap", "a_lon_max", "climb_rate_max",
            "v_min", "v_max", "k_course", "k_speed", "k_alt",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"envelope field {name!r} must be positive")
        if self.v_min >= self.v_max:
            raise ValueError("v_min must be below v_max")

    def clamp_speed(self, v: float) -> float:
        return clamp(v, self.v_min, self.v_max)

    def clamp_command(self, cmd: ManeuverCommand) -> ManeuverCommand:
        """Normalize a command on receipt: speed into the envelope, course wrapped."""
        return ManeuverCommand(
            altitude=cmd.altitude,
            speed=self.clamp_speed(cmd.speed),
            course=wrap_two_pi(cmd.course),
        )
