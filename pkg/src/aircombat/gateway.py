"""Agent gateway: turns agent actions into maneuver commands and issues resets.

The action space is two-dimensional (desired course and speed); the gateway
pins the altitude command so the policy never has to manage it.
"""

import math
from dataclasses import dataclass

from .geometry import clamp, wrap_two_pi
from .simcore.types import ManeuverCommand

COURSE_DOMAIN = (0.0, 2.0 * math.pi)   # rad, closed upper bound wraps to 0
SPEED_DOMAIN = (100.0, 500.0)          # m/s


class InvalidActionError(ValueError):
    """Raised for non-finite actions; aborts the episode with a diagnostic."""


@dataclass(frozen=True)
class AgentAction:
    """Desired course [rad, [0, 2*pi]] and speed [m/s, [100, 500]].

    Out-of-range values are clamped on conversion, never rejected: stochastic
    policies overshoot their domains routinely.
    """

    course: float
    speed: float


@dataclass(frozen=True)
class GatewayConfig:
    fixed_altitude: float = 5000.0
    controlled_entity: str = "wingman"

    def __post_init__(self):
        if self.fixed_altitude <= 0:
            raise ValueError("fixed_altitude must be positive")


def convert_action(action: AgentAction, cfg: GatewayConfig) -> ManeuverCommand:
    """Action -> maneuver command: wrap the course, clamp the speed, pin altitude."""
    if not (math.isfinite(action.course) and math.isfinite(action.speed)):
        raise InvalidActionError(f"non-finite agent action {action!r}")
    return ManeuverCommand(
        altitude=cfg.fixed_altitude,
        speed=clamp(action.speed, *SPEED_DOMAIN),
        course=wrap_two_pi(action.course),
    )


class Gateway:
    """Binds a lockstep client session to one controlled entity."""

    def __init__(self, client, cfg: GatewayConfig):
        self.client = client
        self.cfg = cfg

    def command_message(self, action: AgentAction):
        from .protocol.messages import maneuver_command_message

        cmd = convert_action(action, self.cfg)
        return maneuver_command_message(self.cfg.controlled_entity, cmd)

    def issue_reset(self, seed=None):
        """Ask the simulation to start a fresh episode; returns its ScenarioInit."""
        return self.client.reset(seed)
