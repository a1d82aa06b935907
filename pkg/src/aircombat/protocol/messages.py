"""Wire schema: newline-delimited JSON records, one message per line.

Every message is an envelope {type, sim_time, sequence, payload}. Payloads
are plain dicts validated against the per-type field tables below, so
decode(encode(m)) == m and numeric fields ride at full double precision
(JSON floats round-trip exactly through Python's repr).
"""

import json
import math
from dataclasses import dataclass
from enum import Enum

from ..simcore.types import DynamicState, ManeuverCommand, PerceivedState, Source


class MessageType(str, Enum):
    SCENARIO_INIT = "ScenarioInit"
    ENTITY_STATE = "EntityState"
    MANEUVER_COMMAND = "ManeuverCommand"
    RESET = "Reset"
    SET_FORMATION = "SetFormation"
    TIME_ADVANCE_REQUEST = "TimeAdvanceRequest"
    TIME_ADVANCE_GRANT = "TimeAdvanceGrant"
    SUBSCRIBE = "Subscribe"
    ERROR = "Error"


class ProtocolError(ValueError):
    def __init__(self, detail: str, code: str = "malformed"):
        super().__init__(detail)
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class WireMessage:
    type: MessageType
    sim_time: float
    sequence: int
    payload: dict


# --- payload field tables: name -> (type, required) ------------------------

_NUM = (int, float)

_DYNAMIC_FIELDS = ("x", "y", "alt", "course", "speed", "a_lon", "turn_rate", "climb_rate")
_PERCEIVED_FIELDS = ("subject_id", "x", "y", "alt", "course", "speed", "perceived_at", "source")
_SOURCES = {s.value for s in Source}
_FORCES = {"friendly", "hostile", "neutral"}


def dynamic_state_to_wire(s: DynamicState) -> dict:
    return {"x": s.x, "y": s.y, "alt": s.alt, "course": s.course, "speed": s.speed,
            "a_lon": s.a_lon, "turn_rate": s.turn_rate, "climb_rate": s.climb_rate}


def dynamic_state_from_wire(d: dict) -> DynamicState:
    return DynamicState(**{k: float(d[k]) for k in _DYNAMIC_FIELDS})


def perceived_to_wire(p: PerceivedState) -> dict:
    return {"subject_id": p.subject_id, "x": p.x, "y": p.y, "alt": p.alt,
            "course": p.course, "speed": p.speed, "perceived_at": p.perceived_at,
            "source": p.source.value}


def perceived_from_wire(d: dict) -> PerceivedState:
    return PerceivedState(
        subject_id=d["subject_id"], x=float(d["x"]), y=float(d["y"]),
        alt=float(d["alt"]), course=float(d["course"]), speed=float(d["speed"]),
        perceived_at=float(d["perceived_at"]), source=Source(d["source"]))


def maneuver_command_message(entity_id: str, cmd: ManeuverCommand) -> dict:
    """ManeuverCommand payload for an entity."""
    return {"entity_id": entity_id, "altitude": cmd.altitude,
            "speed": cmd.speed, "course": cmd.course}


def _check(cond, detail):
    if not cond:
        raise ProtocolError(detail)


def _check_num(payload, key, where):
    _check(key in payload, f"{where} missing field {key!r}")
    v = payload[key]
    _check(isinstance(v, _NUM) and not isinstance(v, bool) and math.isfinite(v),
           f"{where} field {key!r} must be a finite number")


def _check_str(payload, key, where, allowed=None):
    _check(key in payload, f"{where} missing field {key!r}")
    v = payload[key]
    _check(isinstance(v, str), f"{where} field {key!r} must be a string")
    if allowed is not None:
        _check(v in allowed, f"{where} field {key!r} has unknown value {v!r}")


def _validate_dynamic(d, where):
    _check(isinstance(d, dict), f"{where} must be an object")
    for k in _DYNAMIC_FIELDS:
        _check_num(d, k, where)


def _validate_perceived(d, where):
    _check(isinstance(d, dict), f"{where} must be an object")
    _check_str(d, "subject_id", where)
    _check_str(d, "source", where, _SOURCES)
    for k in ("x", "y", "alt", "course", "speed", "perceived_at"):
        _check_num(d, k, where)


def _validate_payload(mtype: MessageType, p: dict):
    w = mtype.value
    if mtype is MessageType.SCENARIO_INIT:
        _check_num(p, "seed", w)
        _check_num(p, "tick_dt", w)
        _check_num(p, "reward_a", w)
        _check_str(p, "controlled_id", w)
        _check_str(p, "lead_id", w)
        _check(isinstance(p.get("formation"), dict), f"{w} missing formation")
        _check_num(p["formation"], "aspect", f"{w}.formation")
        _check_num(p["formation"], "distance", f"{w}.formation")
        _check(isinstance(p.get("entities"), list), f"{w} missing entities list")
        for e in p["entities"]:
            _check(isinstance(e, dict), f"{w}.entities entry must be an object")
            _check_str(e, "entity_id", w)
            _check_str(e, "force", w, _FORCES)
            _validate_dynamic(e.get("state"), f"{w}.entities.state")
    elif mtype is MessageType.ENTITY_STATE:
        _check_str(p, "entity_id", w)
        _check_str(p, "force", w, _FORCES)
        _validate_dynamic(p.get("ground_truth"), f"{w}.ground_truth")
        if p.get("perceived_self") is not None:
            _validate_perceived(p["perceived_self"], f"{w}.perceived_self")
        _check(isinstance(p.get("detected"), list), f"{w} missing detected list")
        for t in p["detected"]:
            _validate_perceived(t, f"{w}.detected")
        _check("weapon_count" in p and isinstance(p["weapon_count"], int)
               and p["weapon_count"] >= 0, f"{w} weapon_count must be a non-negative integer")
    elif mtype is MessageType.MANEUVER_COMMAND:
        _check_str(p, "entity_id", w)
        for k in ("altitude", "speed", "course"):
            _check_num(p, k, w)
    elif mtype is MessageType.RESET:
        if p.get("seed") is not None:
            _check_num(p, "seed", w)
    elif mtype is MessageType.SET_FORMATION:
        _check_num(p, "aspect", w)
        _check_num(p, "distance", w)
        _check(p["distance"] > 0, f"{w} distance must be positive")
    elif mtype in (MessageType.TIME_ADVANCE_REQUEST, MessageType.TIME_ADVANCE_GRANT):
        _check_num(p, "t", w)
    elif mtype is MessageType.SUBSCRIBE:
        pass
    elif mtype is MessageType.ERROR:
        _check_str(p, "code", w)
        _check_str(p, "detail", w)


def encode(m: WireMessage) -> str:
    """One message -> one JSON line (no trailing newline)."""
    return json.dumps(
        {"type": m.type.value, "sim_time": m.sim_time,
         "sequence": m.sequence, "payload": m.payload},
        separators=(",", ":"))


def decode(line: str) -> WireMessage:
    """One line -> message; raises ProtocolError on any malformation."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON frame: {exc.msg}") from None
    _check(isinstance(obj, dict), "frame must be a JSON object")
    for key in ("type", "sim_time", "sequence", "payload"):
        _check(key in obj, f"frame missing {key!r}")
    try:
        mtype = MessageType(obj["type"])
    except ValueError:
        raise ProtocolError(f"unknown message type {obj['type']!r}") from None
    _check(isinstance(obj["sim_time"], _NUM) and not isinstance(obj["sim_time"], bool)
           and math.isfinite(obj["sim_time"]), "sim_time must be a finite number")
    _check(isinstance(obj["sequence"], int) and not isinstance(obj["sequence"], bool)
           and obj["sequence"] >= 0, "sequence must be a non-negative integer")
    _check(isinstance(obj["payload"], dict), "payload must be an object")
    _validate_payload(mtype, obj["payload"])
    return WireMessage(type=mtype, sim_time=float(obj["sim_time"]),
                       sequence=obj["sequence"], payload=obj["payload"])
