"""Stepped air-combat world: entities with dynamics, perception and pilot subsystems."""

from .types import DynamicState, Envelope, ManeuverCommand, PerceivedState, Source
from .fdm import autopilot, integrate_kinematics, fdm_backend, select_backend
from .perception import fuse, perceive_own, sense
from .pilots import PursuitPilot, StraightLinePilot
from .world import Entity, WorldState

__all__ = [
    "DynamicState",
    "Envelope",
    "ManeuverCommand",
    "PerceivedState",
    "Source",
    "autopilot",
    "integrate_kinematics",
    "fdm_backend",
    "select_backend",
    "perceive_own",
    "sense",
    "fuse",
    "StraightLinePilot",
    "PursuitPilot",
    "Entity",
    "WorldState",
]
