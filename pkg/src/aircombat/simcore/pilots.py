"""Scripted pilot behaviors for entities that are not externally controlled."""

from ..geometry import bearing, clamp, horizontal_distance
from .types import DynamicState, ManeuverCommand


class StraightLinePilot:
    """Flies a constant course/speed/altitude command every tick."""

    kind = "straight_line"

    def __init__(self, course: float, speed: float, altitude: float):
        self._cmd = ManeuverCommand(altitude=altitude, speed=speed, course=course)

    @property
    def command_params(self):
        return {"course": self._cmd.course, "speed": self._cmd.speed,
                "altitude": self._cmd.altitude}

    def retask(self, course=None, speed=None, altitude=None):
        """Replace any of the scripted constants (operator lead-retasking)."""
        self._cmd = ManeuverCommand(
            altitude=self._cmd.altitude if altitude is None else altitude,
            speed=self._cmd.speed if speed is None else speed,
            course=self._cmd.course if course is None else course,
        )

    def command(self, own_state: DynamicState, tracks) -> ManeuverCommand:
        return self._cmd


class PursuitPilot:
    """Steers toward a target track, speeding up with distance.

    Serves as the solvability oracle for the formation task: desired course is
    the bearing to the target, desired speed is the target speed plus a
    distance-proportional surplus clamped to [100, 500] m/s. With no target
    track (or co-located with the target) it holds the current course.
    """

    kind = "pursuit"

    def __init__(self, target_id: str, gain: float = 0.05,
                 speed_bounds=(100.0, 500.0)):
        self.target_id = target_id
        self.gain = gain
        self.speed_bounds = speed_bounds

    def command(self, own_state: DynamicState, tracks) -> ManeuverCommand:
        target = next((t for t in tracks if t.subject_id == self.target_id), None)
        if target is None:
            return ManeuverCommand.hold(own_state)
        dist = horizontal_distance(own_state.x, own_state.y, target.x, target.y)
        if dist == 0.0:
            course = own_state.course  # bearing undefined; hold
        else:
            course = bearing(own_state.x, own_state.y, target.x, target.y)
        lo, hi = self.speed_bounds
        return ManeuverCommand(
            altitude=target.alt,
            speed=clamp(target.speed + self.gain * dist, lo, hi),
            course=course,
        )
