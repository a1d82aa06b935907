"""Flight dynamics model: autopilot + kinematics.

Two granular entry points (`autopilot`, `integrate_kinematics`) implement the
model piecewise for inspection and testing; the fused per-tick kernel used by
the world loop comes from a backend selected at import time:

  - "compiled": the Cython extension `_fdm_c`, if it was built;
  - "pure":     the Python twin `_fdm_py`.

Selection honors the AIRCOMBAT_FDM environment variable ("auto", "compiled",
"pure"); `select_backend` switches at runtime (the benchmark compares both).
"""

import math
import os

from ..geometry import clamp, wrap_course_error, wrap_two_pi
from . import _fdm_py
from .types import DynamicState, Envelope, InvalidCommandError, ManeuverCommand

try:
    from . import _fdm_c
except ImportError:
    _fdm_c = None

_backend = None


def available_backends():
    names = ["pure"]
    if _fdm_c is not None:
        names.insert(0, "compiled")
    return names


def select_backend(name: str = "auto"):
    """Pick the fused-kernel backend; returns the active backend module."""
    global _backend
    if name == "auto":
        _backend = _fdm_c if _fdm_c is not None else _fdm_py
    elif name == "compiled":
        if _fdm_c is None:
            raise RuntimeError("compiled FDM kernel is not built")
        _backend = _fdm_c
    elif name == "pure":
        _backend = _fdm_py
    else:
        raise ValueError(f"unknown FDM backend {name!r}")
    return _backend


def fdm_backend() -> str:
    """Name of the active backend ("compiled" or "pure")."""
    return _backend.BACKEND_NAME


select_backend(os.environ.get("AIRCOMBAT_FDM", "auto"))


def autopilot(state: DynamicState, cmd: ManeuverCommand, env: Envelope):
    """Map a maneuver command to (a_lon, turn_rate, climb_rate).

    Proportional control clamped to the envelope. The turn-rate limit is
    min(omega_cap, a_lat_max / max(v, v_min)); a course error of exactly pi
    resolves to a right turn.
    """
    for value in (state.course, state.speed, state.alt):
        if not math.isfinite(value):
            raise InvalidCommandError("non-finite dynamic state")
    # ManeuverCommand rejects non-finite fields on construction.
    omega_limit = min(env.omega_cap, env.a_lat_max / max(state.speed, env.v_min))
    omega = clamp(env.k_course * wrap_course_error(cmd.course - state.course),
                  -omega_limit, omega_limit)
    a_lon = clamp(env.k_speed * (cmd.speed - state.speed), -env.a_lon_max, env.a_lon_max)
    climb = clamp(env.k_alt * (cmd.altitude - state.alt), -env.climb_rate_max, env.climb_rate_max)
    return a_lon, omega, climb


def integrate_kinematics(state: DynamicState, a_lon: float, turn_rate: float,
                         climb_rate: float, dt: float, env: Envelope) -> DynamicState:
    """Semi-implicit Euler step: update speed and course first, then position.

    Gravity and air pressure are not modeled.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    v2 = env.clamp_speed(state.speed + a_lon * dt)
    c2 = wrap_two_pi(state.course + turn_rate * dt)
    return DynamicState(
        x=state.x + v2 * dt * math.sin(c2),
        y=state.y + v2 * dt * math.cos(c2),
        alt=max(0.0, state.alt + climb_rate * dt),
        course=c2,
        speed=v2,
        a_lon=a_lon,
        turn_rate=turn_rate,
        climb_rate=climb_rate,
    )


def step(state: DynamicState, cmd: ManeuverCommand, env: Envelope, dt: float) -> DynamicState:
    """One full FDM tick through the selected fused kernel."""
    out = _backend.fdm_step(
        state.x, state.y, state.alt, state.course, state.speed,
        cmd.altitude, cmd.speed, cmd.course,
        env.k_course, env.k_speed, env.k_alt,
        env.omega_cap, env.a_lat_max, env.a_lon_max,
        env.climb_rate_max, env.v_min, env.v_max,
        dt,
    )
    return DynamicState(*out)
