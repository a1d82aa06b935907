"""Perception subsystems: navigation, sensors, track fusion."""

from dataclasses import dataclass

from ..geometry import bearing, horizontal_distance, wrap_course_error, wrap_two_pi
from .types import SOURCE_PRIORITY, DynamicState, PerceivedState, Source


@dataclass(frozen=True)
class NavigationNoise:
    """Per-field standard deviations for own-state estimation (all >= 0)."""

    position: float = 0.0
    altitude: float = 0.0
    course: float = 0.0
    speed: float = 0.0

    def any(self) -> bool:
        return (self.position > 0 or self.altitude > 0
                or self.course > 0 or self.speed > 0)


@dataclass(frozen=True)
class SensorConfig:
    max_range: float      # m
    half_fov: float       # rad, off the owner's course


def perceive_own(subject_id: str, state: DynamicState, noise: NavigationNoise,
                 rng, sim_time: float) -> PerceivedState:
    """Navigation estimate of the own state: ground truth plus Gaussian noise.

    With all-zero noise the rng is never drawn from, so a noiseless entity
    leaves seeded random streams untouched.
    """
    x, y, alt, course, speed = state.x, state.y, state.alt, state.course, state.speed
    if noise.any():
        if noise.position > 0:
            x += noise.position * rng.standard_normal()
            y += noise.position * rng.standard_normal()
        if noise.altitude > 0:
            alt = max(0.0, alt + noise.altitude * rng.standard_normal())
        if noise.course > 0:
            course = wrap_two_pi(course + noise.course * rng.standard_normal())
        if noise.speed > 0:
            speed = max(0.0, speed + noise.speed * rng.standard_normal())
    return PerceivedState(
        subject_id=subject_id, x=x, y=y, alt=alt, course=course, speed=speed,
        perceived_at=sim_time, source=Source.NAVIGATION,
    )


def sense(world, owner_id: str, cfg: SensorConfig):
    """Detect other entities within range and field of view.

    Range is horizontal; the field of view is a cone of +/- half_fov around
    the owner's course. Detections are exact ground truth stamped with the
    current simulation time.
    """
    owner = world.entity(owner_id)
    tracks = []
    for other in world.entities:
        if other.entity_id == owner_id:
            continue
        s, o = other.state, owner.state
        if horizontal_distance(o.x, o.y, s.x, s.y) > cfg.max_range:
            continue
        rel = wrap_course_error(bearing(o.x, o.y, s.x, s.y) - o.course)
        if abs(rel) > cfg.half_fov:
            continue
        tracks.append(PerceivedState(
            subject_id=other.entity_id, x=s.x, y=s.y, alt=s.alt,
            course=s.course, speed=s.speed,
            perceived_at=world.sim_time, source=Source.SENSOR,
        ))
    return tracks


def fuse(own, datalinked):
    """Deduplicate tracks: per subject keep the freshest one.

    Ties on the timestamp break by source priority
    navigation > sensor > datalink; remaining ties keep the earlier entry.
    """
    best = {}
    for track in list(own) + list(datalinked):
        key = track.subject_id
        cur = best.get(key)
        if cur is None:
            best[key] = track
            continue
        if (track.perceived_at, SOURCE_PRIORITY[track.source]) > (
                cur.perceived_at, SOURCE_PRIORITY[cur.source]):
            best[key] = track
    return list(best.values())
