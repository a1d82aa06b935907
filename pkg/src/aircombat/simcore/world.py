"""The stepped world: entities, subsystem update order, deterministic ticking."""

import logging
import zlib

import numpy as np

from .fdm import step as fdm_step
from .perception import NavigationNoise, fuse, perceive_own, sense
from .types import DynamicState, Envelope, ManeuverCommand

log = logging.getLogger(__name__)


class Entity:
    """A flying entity: dynamic state plus perception/pilot subsystems.

    pilot=None means the entity is externally piloted: it flies the most
    recently latched maneuver command (initially: hold the spawn state).
    """

    def __init__(self, entity_id: str, state: DynamicState, force: str = "friendly",
                 pilot=None, sensor=None, datalink: bool = False,
                 nav_noise: NavigationNoise = NavigationNoise(),
                 weapon_count: int = 0):
        self.entity_id = entity_id
        self.state = state
        self.force = force
        self.pilot = pilot
        self.sensor = sensor
        self.datalink = datalink
        self.nav_noise = nav_noise
        self.weapon_count = weapon_count  # carried on the wire, unused
        self.latched_command = ManeuverCommand.hold(state)
        self.perceived_self = None
        self.tracks = []
        self._inbox = []  # datalink messages received this tick
        self._rng = None  # lazily seeded from the world seed + entity id

    def rng(self, world_seed: int):
        if self._rng is None:
            self._rng = np.random.default_rng(
                np.random.SeedSequence([world_seed & 0xFFFFFFFFFFFFFFFF,
                                        zlib.crc32(self.entity_id.encode())]))
        return self._rng


class WorldState:
    """A collection of entities over a flat terrain, stepped in lockstep ticks.

    Time is tracked as an integer count of fixed-size ticks (milliseconds
    internally) so that episode clocks land on exact boundaries; sim_time is
    derived, never accumulated.
    """

    def __init__(self, tick_dt: float = 0.1, seed: int = 0,
                 envelope: Envelope = None):
        tick_ms = round(tick_dt * 1000.0)
        if tick_ms <= 0 or abs(tick_ms / 1000.0 - tick_dt) > 1e-12:
            raise ValueError("tick_dt must be a positive whole number of milliseconds")
        self.tick_ms = tick_ms
        self.tick_count = 0
        self.seed = seed
        self.envelope = envelope if envelope is not None else Envelope()
        self._entities = []  # kept sorted by entity_id
        self.rejected_commands = 0

    @property
    def tick_dt(self) -> float:
        return self.tick_ms / 1000.0

    @property
    def sim_time_ms(self) -> int:
        return self.tick_count * self.tick_ms

    @property
    def sim_time(self) -> float:
        return self.sim_time_ms / 1000.0

    @property
    def entities(self):
        return list(self._entities)

    def entity(self, entity_id: str) -> Entity:
        for e in self._entities:
            if e.entity_id == entity_id:
                return e
        raise KeyError(f"unknown entity {entity_id!r}")

    def add_entity(self, entity: Entity):
        if any(e.entity_id == entity.entity_id for e in self._entities):
            raise ValueError(f"duplicate entity id {entity.entity_id!r}")
        self._entities.append(entity)
        self._entities.sort(key=lambda e: e.entity_id)

    def latch_commands(self, commands):
        """Validate and latch external commands; unknown/scripted targets are
        rejected and logged, the tick proceeds."""
        for entity_id, cmd in commands.items():
            target = next((e for e in self._entities if e.entity_id == entity_id), None)
            if target is None or target.pilot is not None:
                self.rejected_commands += 1
                log.warning("rejected command for %s entity %r",
                            "scripted" if target else "unknown", entity_id)
                continue
            target.latched_command = self.envelope.clamp_command(cmd)

    def advance(self, commands=None):
        """One tick: dynamics for every entity, then perception, then time.

        Entities update in id order. Scripted pilots act on the perception
        fused at the end of the previous tick.
        """
        if commands:
            self.latch_commands(commands)

        env = self.envelope
        dt = self.tick_ms / 1000.0
        for e in self._entities:
            if e.pilot is not None:
                cmd = env.clamp_command(e.pilot.command(e.state, e.tracks))
            else:
                cmd = e.latched_command
            e.state = fdm_step(e.state, cmd, env, dt)

        now = self.sim_time
        for e in self._entities:
            e.perceived_self = perceive_own(e.entity_id, e.state, e.nav_noise,
                                            e.rng(self.seed), now)
            e._sensor_tracks = sense(self, e.entity_id, e.sensor) if e.sensor else []
            e._inbox = []
        for e in self._entities:
            if not e.datalink:
                continue
            outgoing = [e.perceived_self] + e._sensor_tracks
            for other in self._entities:
                if other is e or other.force != e.force or not other.datalink:
                    continue
                other._inbox.extend(outgoing)
        for e in self._entities:
            fused = fuse(e._sensor_tracks, e._inbox)
            e.tracks = [t for t in fused if t.subject_id != e.entity_id]

        self.tick_count += 1
