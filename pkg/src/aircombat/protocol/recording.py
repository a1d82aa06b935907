"""Session recordings: read, verify by deterministic re-execution, re-emit."""

import json

from .messages import decode
from .service import ServiceConfig, Session, SimulationService


class RecordingError(ValueError):
    pass


def read_recording(path):
    """-> (ServiceConfig, [entry dicts]); tolerates a truncated final line."""
    entries = []
    config = None
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                if i == 0:
                    raise RecordingError("recording header is unreadable") from None
                break  # truncated tail: stop at the last whole frame
            if obj.get("dir") == "meta":
                config = ServiceConfig.from_dict(obj.get("config", {}))
            else:
                entries.append(obj)
    if config is None:
        raise RecordingError("recording has no meta header")
    return config, entries


def replay_outbound(path):
    """Feed the recorded inbound frames into a fresh service and return both
    the recorded and the regenerated outbound frame lists.

    Byte-identical lists demonstrate deterministic replay.
    """
    config, entries = read_recording(path)
    regenerated = []

    class _Tap:
        def __init__(self):
            self.label = "replay"

        def record(self, direction, session_label, frame):
            if direction == "out":
                regenerated.append(frame)

        def close(self):
            pass

    service = SimulationService(config, recorder=None)
    service.recorder = _Tap()
    sessions = {}

    def ensure(label):
        if label not in sessions:
            sessions[label] = service.register(lambda m: None, label=label)
        return sessions[label]

    recorded_out = []
    for e in entries:
        if e["dir"] == "in":
            service.handle_frame(ensure(e["session"]), e["frame"])
        elif e["dir"] == "out":
            recorded_out.append(e["frame"])
    return recorded_out, regenerated


def recorded_outbound_frames(path):
    _, entries = read_recording(path)
    return [e["frame"] for e in entries if e["dir"] == "out"]


def stream_frames(frames, deliver, pace: float = 0.0, clock=None, sleep=None):
    """Re-emit decoded frames in recorded order.

    pace > 0 spaces deliveries by sim-time gaps divided by pace (10 = ten
    sim-seconds per wall second); pace 0 streams as fast as possible. The
    frame sequence itself is identical either way.
    """
    import time as _time

    sleep = sleep or _time.sleep
    last_t = None
    for frame in frames:
        msg = decode(frame)
        if pace > 0 and last_t is not None and msg.sim_time > last_t:
            sleep((msg.sim_time - last_t) / pace)
        last_t = msg.sim_time
        deliver(msg)
