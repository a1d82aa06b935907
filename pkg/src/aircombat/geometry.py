"""Flat-earth east-north plan geometry.

Conventions used everywhere in this package:
  - positions are (x_east, y_north) in meters on a flat ground plane;
  - course/bearing angles are radians in [0, 2*pi), clockwise from north,
    so horizontal velocity is speed * (sin(course), cos(course));
  - course errors live in (-pi, pi], with the tie at exactly pi resolved to
    +pi (a right turn) so trajectories stay deterministic.
"""

import math

TWO_PI = 2.0 * math.pi


def clamp(value: float, lo: float, hi: float) -> float:
    if value < lo:
        return lo
    if value > hi:
        return hi
    return value


def wrap_two_pi(angle: float) -> float:
    """Wrap an angle into [0, 2*pi)."""
    r = math.fmod(angle, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:  # fmod rounding can land exactly on 2*pi
        r -= TWO_PI
    return r


def wrap_course_error(error: float) -> float:
    """Wrap a course difference into (-pi, pi]; exactly pi maps to +pi."""
    e = math.fmod(error, TWO_PI)
    if e > math.pi:
        e -= TWO_PI
    elif e <= -math.pi:
        e += TWO_PI
    return e


def bearing(from_x: float, from_y: float, to_x: float, to_y: float) -> float:
    """Bearing from one position to another, radians clockwise from north.

    Returns 0.0 for coincident points (atan2(0, 0) is 0, kept explicit here).
    """
    dx = to_x - from_x
    dy = to_y - from_y
    if dx == 0.0 and dy == 0.0:
        return 0.0
    return wrap_two_pi(math.atan2(dx, dy))


def horizontal_distance(x1: float, y1: float, x2: float, y2: float) -> float:
    return math.hypot(x2 - x1, y2 - y1)
