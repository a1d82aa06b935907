"""The simulation service: owns the world, grants time, fans out states.

One controller drives the lockstep cycle (commands + TimeAdvanceRequest);
any number of read-only observers subscribe to the same stream. All message
processing is serialized under one lock, so steering inputs (SetFormation,
lead retasking) always land on a decision boundary, never mid-cycle.
"""

import json
import logging
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from ..interpreter import FormationSpec
from ..scenario import LEAD_ID, WINGMAN_ID, ScenarioConfig, build_world, sample_scenario
from ..simcore import Envelope
from ..simcore.types import ManeuverCommand
from .messages import (
    MessageType,
    ProtocolError,
    WireMessage,
    decode,
    dynamic_state_to_wire,
    encode,
    perceived_to_wire,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ServiceConfig:
    tick_dt: float = 0.1
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    envelope: Envelope = field(default_factory=Envelope)
    reward_a: float = 5e-7
    seed: int = 0
    realtime_factor: float = 0.0  # 0 = free running, 1 = wall-clock paced

    def to_dict(self) -> dict:
        sc = self.scenario
        en = self.envelope
        return {
            "tick_dt": self.tick_dt,
            "seed": self.seed,
            "reward_a": self.reward_a,
            "realtime_factor": self.realtime_factor,
            "scenario": {
                "position_box": sc.position_box,
                "lead_speed_range": list(sc.lead_speed_range),
                "wingman_speed_range": list(sc.wingman_speed_range),
                "formation_distance_range": list(sc.formation_distance_range),
                "altitude": sc.altitude,
                "fixed_formation": list(sc.fixed_formation) if sc.fixed_formation else None,
                "wingman_at_point": sc.wingman_at_point,
            },
            "envelope": {
                "a_lat_max": en.a_lat_max, "omega_cap": en.omega_cap,
                "a_lon_max": en.a_lon_max, "climb_rate_max": en.climb_rate_max,
                "v_min": en.v_min, "v_max": en.v_max,
                "k_course": en.k_course, "k_speed": en.k_speed, "k_alt": en.k_alt,
            },
        }

    @staticmethod
    def from_dict(d: dict) -> "ServiceConfig":
        sc = d.get("scenario", {})
        en = d.get("envelope", {})
        fixed = sc.get("fixed_formation")
        return ServiceConfig(
            tick_dt=d.get("tick_dt", 0.1),
            seed=d.get("seed", 0),
            reward_a=d.get("reward_a", 5e-7),
            realtime_factor=d.get("realtime_factor", 0.0),
            scenario=ScenarioConfig(
                position_box=sc.get("position_box", 20_000.0),
                lead_speed_range=tuple(sc.get("lead_speed_range", (200.0, 400.0))),
                wingman_speed_range=tuple(sc.get("wingman_speed_range", (200.0, 400.0))),
                formation_distance_range=tuple(sc.get("formation_distance_range", (500.0, 5000.0))),
                altitude=sc.get("altitude", 5000.0),
                fixed_formation=tuple(fixed) if fixed else None,
                wingman_at_point=sc.get("wingman_at_point", False),
            ),
            envelope=Envelope(**en) if en else Envelope(),
        )


class Session:
    """One connected peer; deliver() must never block the service."""

    _next = 1

    def __init__(self, deliver, label=None):
        self.label = label or f"s{Session._next}"
        Session._next += 1
        self.deliver = deliver
        self.subscribed = False
        self.last_inbound_seq = 0


class Recorder:
    """Append-only trace of raw frames, replayable into a fresh service."""

    def __init__(self, path, config: ServiceConfig):
        self._fh = open(path, "w", encoding="utf-8")
        self._fh.write(json.dumps({"dir": "meta", "version": 1,
                                   "config": config.to_dict()}) + "\n")
        self._lock = threading.Lock()

    def record(self, direction: str, session_label: str, frame: str):
        with self._lock:
            self._fh.write(json.dumps({"dir": direction, "session": session_label,
                                       "frame": frame}) + "\n")

    def close(self):
        with self._lock:
            self._fh.close()


class SimulationService:
    """Lockstep simulation host; thread-safe, message-driven."""

    def __init__(self, config: ServiceConfig, recorder: Recorder = None):
        self.config = config
        self.recorder = recorder
        self._lock = threading.RLock()
        self._sessions = []
        self._out_seq = 0
        self._seed_chain = np.random.SeedSequence(config.seed)
        self._episode_index = 0
        self._scenario = None
        self._controller = None
        self.world = None
        self.formation = None
        self._granted_ms = 0
        self._epoch_wall = None
        self._reset(seed=None)

    # -- session management --------------------------------------------------

    def register(self, deliver, label=None) -> Session:
        with self._lock:
            s = Session(deliver, label)
            self._sessions.append(s)
            return s

    def unregister(self, session: Session):
        with self._lock:
            if session in self._sessions:
                self._sessions.remove(session)
            if self._controller is session:
                self._controller = None

    def _claim_controller(self, session: Session):
        if self._controller is None:
            self._controller = session
        elif self._controller is not session:
            raise ProtocolError("another session owns the lockstep cycle", code="protocol")

    # -- emission -------------------------------------------------------------

    def _next_message(self, mtype: MessageType, payload: dict) -> WireMessage:
        self._out_seq += 1
        return WireMessage(type=mtype, sim_time=self.world.sim_time,
                           sequence=self._out_seq, payload=payload)

    def _broadcast(self, mtype: MessageType, payload: dict):
        m = self._next_message(mtype, payload)
        if self.recorder:
            self.recorder.record("out", "*", encode(m))
        for s in self._sessions:
            s.deliver(m)
        return m

    def _send_to(self, session: Session, mtype: MessageType, payload: dict):
        m = self._next_message(mtype, payload)
        if self.recorder:
            self.recorder.record("out", session.label, encode(m))
        session.deliver(m)
        return m

    # -- scenario / episode ----------------------------------------------------

    def _reset(self, seed):
        if seed is None:
            child = self._seed_chain.spawn(1)[0]
            seed = int(child.generate_state(1, np.uint64)[0] & 0x7FFFFFFFFFFFFFFF)
        rng = np.random.default_rng(seed)
        self._scenario = sample_scenario(rng, self.config.scenario, seed=seed)
        self.world = build_world(self._scenario, tick_dt=self.config.tick_dt,
                                 envelope=self.config.envelope)
        self.formation = self._scenario.formation
        self._granted_ms = 0
        self._episode_index += 1
        self._epoch_wall = time.monotonic()

    def _scenario_init_payload(self) -> dict:
        sc = self._scenario
        entities = []
        for e in self.world.entities:
            entities.append({
                "entity_id": e.entity_id,
                "force": e.force,
                "state": dynamic_state_to_wire(e.state),
            })
        return {
            "seed": sc.seed,
            "tick_dt": self.world.tick_dt,
            "reward_a": self.config.reward_a,
            "controlled_id": WINGMAN_ID,
            "lead_id": LEAD_ID,
            "formation": {"aspect": self.formation.aspect,
                          "distance": self.formation.distance},
            "entities": entities,
        }

    def _entity_state_payload(self, entity) -> dict:
        return {
            "entity_id": entity.entity_id,
            "force": entity.force,
            "ground_truth": dynamic_state_to_wire(entity.state),
            "perceived_self": (perceived_to_wire(entity.perceived_self)
                               if entity.perceived_self else None),
            "detected": [perceived_to_wire(t) for t in entity.tracks],
            "weapon_count": entity.weapon_count,
        }

    # -- inbound processing -----------------------------------------------------

    def handle_frame(self, session: Session, line: str):
        """Decode and process one raw frame; malformed input answers an Error
        naming the expected sequence number, and the session stays open."""
        if self.recorder:
            self.recorder.record("in", session.label, line)
        try:
            msg = decode(line)
        except ProtocolError as exc:
            with self._lock:
                self._send_to(session, MessageType.ERROR, {
                    "code": exc.code, "detail": exc.detail,
                    "ref_sequence": session.last_inbound_seq + 1})
            return
        self.handle(session, [msg], record=False)

    def handle(self, session: Session, messages, record=True):
        """Process a batch of messages from one session, in order.

        Back-to-back Reset messages within a batch coalesce: only the last
        takes effect, so exactly one ScenarioInit follows.
        """
        with self._lock:
            if record and self.recorder:
                for m in messages:
                    self.recorder.record("in", session.label, encode(m))
            resets = [m for m in messages if m.type is MessageType.RESET]
            skip = set(id(m) for m in resets[:-1])
            for m in messages:
                if id(m) in skip:
                    continue
                try:
                    self._dispatch(session, m)
                except ProtocolError as exc:
                    self._send_to(session, MessageType.ERROR, {
                        "code": exc.code, "detail": exc.detail,
                        "ref_sequence": m.sequence})

    def _dispatch(self, session: Session, m: WireMessage):
        if m.sequence <= session.last_inbound_seq:
            raise ProtocolError(
                f"sequence {m.sequence} not above {session.last_inbound_seq}",
                code="sequence")
        session.last_inbound_seq = m.sequence

        if m.type is MessageType.SUBSCRIBE:
            session.subscribed = True
            self._send_to(session, MessageType.SCENARIO_INIT, self._scenario_init_payload())
            for e in self.world.entities:
                self._send_to(session, MessageType.ENTITY_STATE, self._entity_state_payload(e))
        elif m.type is MessageType.RESET:
            self._claim_controller(session)
            seed = m.payload.get("seed")
            self._reset(int(seed) if seed is not None else None)
            self._broadcast(MessageType.SCENARIO_INIT, self._scenario_init_payload())
        elif m.type is MessageType.MANEUVER_COMMAND:
            self._handle_command(session, m.payload)
        elif m.type is MessageType.SET_FORMATION:
            # Serialized processing means this always lands between cycles.
            self.formation = FormationSpec(m.payload["aspect"], m.payload["distance"])
            self._broadcast(MessageType.SET_FORMATION, {
                "aspect": self.formation.aspect,
                "distance": self.formation.distance})
        elif m.type is MessageType.TIME_ADVANCE_REQUEST:
            self._claim_controller(session)
            self._advance_to(round(m.payload["t"] * 1000.0))
        elif m.type is MessageType.TIME_ADVANCE_GRANT:
            raise ProtocolError("grants are only issued by the service", code="protocol")
        elif m.type is MessageType.ERROR:
            log.warning("peer error from %s: %s", session.label, m.payload)

    def _handle_command(self, session: Session, payload: dict):
        cmd = ManeuverCommand(altitude=payload["altitude"], speed=payload["speed"],
                              course=payload["course"])
        entity_id = payload["entity_id"]
        try:
            entity = self.world.entity(entity_id)
        except KeyError:
            self.world.rejected_commands += 1
            log.warning("rejected command for unknown entity %r", entity_id)
            return
        if entity.pilot is None:
            self._claim_controller(session)
            self.world.latch_commands({entity_id: cmd})
        elif hasattr(entity.pilot, "retask"):
            # Operator retasking of a scripted aircraft (e.g. the lead).
            entity.pilot.retask(course=cmd.course, speed=cmd.speed, altitude=cmd.altitude)
        else:
            self.world.rejected_commands += 1
            log.warning("rejected command for scripted entity %r", entity_id)

    def _advance_to(self, target_ms: int):
        if target_ms <= self._granted_ms:
            raise ProtocolError(
                f"time advance to {target_ms} ms not beyond granted {self._granted_ms} ms",
                code="protocol")
        delta = target_ms - self.world.sim_time_ms
        if delta % self.world.tick_ms != 0:
            raise ProtocolError(
                f"advance of {delta} ms is not a whole number of {self.world.tick_ms} ms ticks",
                code="protocol")
        for _ in range(delta // self.world.tick_ms):
            self.world.advance()
        self._granted_ms = target_ms
        if self.config.realtime_factor > 0:
            target_wall = self._epoch_wall + (target_ms / 1000.0) / self.config.realtime_factor
            lag = target_wall - time.monotonic()
            if lag > 0:
                time.sleep(lag)
        for e in self.world.entities:
            self._broadcast(MessageType.ENTITY_STATE, self._entity_state_payload(e))
        self._broadcast(MessageType.TIME_ADVANCE_GRANT, {"t": target_ms / 1000.0})
