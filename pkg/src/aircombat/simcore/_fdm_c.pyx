# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled flight-dynamics kernel.

Twin of ``_fdm_py.py``; same operations in the same order, so both backends
produce bit-identical trajectories (the extension is built with
-ffp-contract=off to keep x86 FMA contraction from changing rounding).
"""

from libc.math cimport cos, fmod, sin

cdef double PI = 3.141592653589793
cdef double TWO_PI = 6.283185307179586

BACKEND_NAME = "compiled"


def fdm_step(
    double x, double y, double alt, double course, double speed,
    double cmd_alt, double cmd_speed, double cmd_course,
    double k_course, double k_speed, double k_alt,
    double omega_cap, double a_lat_max, double a_lon_max,
    double climb_rate_max, double v_min, double v_max,
    double dt,
):
    """One autopilot + semi-implicit-Euler step; returns the next state tuple."""
    cdef double err, v_ref, omega_limit, omega, a_lon, climb
    cdef double v2, c2, x2, y2, alt2

    err = fmod(cmd_course - course, TWO_PI)
    if err > PI:
        err -= TWO_PI
    elif err <= -PI:
        err += TWO_PI

    v_ref = speed if speed > v_min else v_min
    omega_limit = a_lat_max / v_ref
    if omega_cap < omega_limit:
        omega_limit = omega_cap
    omega = k_course * err
    if omega > omega_limit:
        omega = omega_limit
    elif omega < -omega_limit:
        omega = -omega_limit

    a_lon = k_speed * (cmd_speed - speed)
    if a_lon > a_lon_max:
        a_lon = a_lon_max
    elif a_lon < -a_lon_max:
        a_lon = -a_lon_max

    climb = k_alt * (cmd_alt - alt)
    if climb > climb_rate_max:
        climb = climb_rate_max
    elif climb < -climb_rate_max:
        climb = -climb_rate_max

    v2 = speed + a_lon * dt
    if v2 < v_min:
        v2 = v_min
    elif v2 > v_max:
        v2 = v_max

    c2 = fmod(course + omega * dt, TWO_PI)
    if c2 < 0.0:
        c2 += TWO_PI
    if c2 >= TWO_PI:
        c2 -= TWO_PI

    x2 = x + v2 * dt * sin(c2)
    y2 = y + v2 * dt * cos(c2)

    alt2 = alt + climb * dt
    if alt2 < 0.0:
        alt2 = 0.0

    return (x2, y2, alt2, c2, v2, a_lon, omega, climb)
