"""Pure-Python flight-dynamics kernel.

Twin of the compiled kernel in ``_fdm_c.pyx``; both perform the same
operations in the same order so that trajectories are bit-identical
regardless of which backend is selected.
"""

from math import cos, fmod, pi, sin

TWO_PI = 2.0 * pi

BACKEND_NAME = "pure"


def fdm_step(
    x, y, alt, course, speed,
    cmd_alt, cmd_speed, cmd_course,
    k_course, k_speed, k_alt,
    omega_cap, a_lat_max, a_lon_max, climb_rate_max, v_min, v_max,
    dt,
):
    """One autopilot + semi-implicit-Euler step; returns the next state tuple.

    Returns (x, y, alt, course, speed, a_lon, turn_rate, climb_rate).
    """
    # Autopilot: proportional control with envelope clamps.
    err = fmod(cmd_course - course, TWO_PI)
    if err > pi:
        err -= TWO_PI
    elif err <= -pi:
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

    # Kinematics: semi-implicit Euler (new speed/course move the position).
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
