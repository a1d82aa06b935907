"""Controller/observer client over an in-process or TCP transport."""

import socket
from collections import deque
from dataclasses import dataclass, field

from ..simcore.types import DynamicState
from .messages import (
    MessageType,
    ProtocolError,
    WireMessage,
    decode,
    dynamic_state_from_wire,
    encode,
)


class TransportError(ConnectionError):
    pass


class InProcTransport:
    """Direct binding to a service in the same process.

    Delivery is synchronous: after send() returns, every message the service
    emitted in response is already in the inbox. No bytes are produced on
    this path; framing is exercised by the TCP/WS transports and the codec
    round-trip tests.
    """

    def __init__(self, service, label=None):
        self.service = service
        self._inbox = deque()
        self.session = service.register(self._inbox.append, label=label)
        self._open = True

    def send(self, msg: WireMessage):
        if not self._open:
            raise TransportError("transport closed")
        self.service.handle(self.session, [msg])

    def send_batch(self, msgs):
        if not self._open:
            raise TransportError("transport closed")
        self.service.handle(self.session, list(msgs))

    def recv(self, timeout=None) -> WireMessage:
        if not self._inbox:
            raise TransportError("no message pending (lockstep reply missing)")
        return self._inbox.popleft()

    def close(self):
        if self._open:
            self.service.unregister(self.session)
            self._open = False


class TcpTransport:
    """Line-framed client socket."""

    def __init__(self, host: str, port: int, timeout: float = 30.0):
        try:
            self.sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise TransportError(f"connect to {host}:{port} failed: {exc}") from exc
        self.sock.settimeout(timeout)
        self._buf = b""
        self._open = True

    def send(self, msg: WireMessage):
        self.send_batch([msg])

    def send_batch(self, msgs):
        if not self._open:
            raise TransportError("transport closed")
        data = "".join(encode(m) + "\n" for m in msgs).encode("utf-8")
        try:
            self.sock.sendall(data)
        except OSError as exc:
            raise TransportError(str(exc)) from exc

    def recv(self, timeout=None) -> WireMessage:
        if timeout is not None:
            self.sock.settimeout(timeout)
        while b"\n" not in self._buf:
            try:
                chunk = self.sock.recv(65536)
            except socket.timeout:
                raise TransportError("timed out waiting for a frame") from None
            except OSError as exc:
                raise TransportError(str(exc)) from exc
            if not chunk:
                raise TransportError("connection closed by peer")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return decode(line.decode("utf-8"))

    def close(self):
        if self._open:
            self._open = False
            try:
                self.sock.close()
            except OSError:
                pass


@dataclass
class CycleResult:
    """Everything a controller learns from one lockstep cycle."""

    grant_time: float
    states: dict                      # entity_id -> EntityState payload
    ground_truth: dict                # entity_id -> DynamicState
    formation_change: dict = None     # last SetFormation payload seen, if any
    scenario_init: dict = None        # set if a reset raced the cycle
    errors: list = field(default_factory=list)


class LockstepClient:
    """Speaks the lockstep protocol: stamped commands, request, await grant."""

    def __init__(self, transport):
        self.transport = transport
        self._seq = 0
        self._time_ms = 0
        self.last_scenario = None

    @property
    def sim_time(self) -> float:
        return self._time_ms / 1000.0

    def _make(self, mtype: MessageType, payload: dict) -> WireMessage:
        self._seq += 1
        return WireMessage(type=mtype, sim_time=self._time_ms / 1000.0,
                           sequence=self._seq, payload=payload)

    def close(self):
        self.transport.close()

    # -- controller verbs -------------------------------------------------------

    def reset(self, seed=None, timeout=10.0) -> dict:
        """Start a fresh episode; returns the ScenarioInit payload."""
        self.transport.send(self._make(MessageType.RESET,
                                       {"seed": None if seed is None else int(seed)}))
        while True:
            m = self.transport.recv(timeout)
            if m.type is MessageType.SCENARIO_INIT:
                self._time_ms = 0
                self.last_scenario = m.payload
                return m.payload
            if m.type is MessageType.ERROR:
                raise ProtocolError(m.payload["detail"], code=m.payload["code"])
            # stale states/grants from before the reset: drop

    def cycle(self, command_payloads, delta_ms: int, timeout=10.0) -> CycleResult:
        """Send commands stamped now, request t+delta, collect states + grant."""
        target_ms = self._time_ms + delta_ms
        batch = [self._make(MessageType.MANEUVER_COMMAND, p) for p in command_payloads]
        batch.append(self._make(MessageType.TIME_ADVANCE_REQUEST, {"t": target_ms / 1000.0}))
        self.transport.send_batch(batch)
        result = CycleResult(grant_time=0.0, states={}, ground_truth={})
        while True:
            m = self.transport.recv(timeout)
            if m.type is MessageType.ENTITY_STATE:
                eid = m.payload["entity_id"]
                result.states[eid] = m.payload
                result.ground_truth[eid] = dynamic_state_from_wire(m.payload["ground_truth"])
            elif m.type is MessageType.TIME_ADVANCE_GRANT:
                granted = round(m.payload["t"] * 1000.0)
                if granted < target_ms:
                    continue  # an older grant already in flight
                result.grant_time = m.payload["t"]
                self._time_ms = granted
                return result
            elif m.type is MessageType.SET_FORMATION:
                result.formation_change = m.payload
            elif m.type is MessageType.SCENARIO_INIT:
                result.scenario_init = m.payload
                self.last_scenario = m.payload
            elif m.type is MessageType.ERROR:
                raise ProtocolError(m.payload["detail"], code=m.payload["code"])

    # -- observer verbs ----------------------------------------------------------

    def subscribe(self):
        self.transport.send(self._make(MessageType.SUBSCRIBE, {}))

    def set_formation(self, aspect: float, distance: float):
        self.transport.send(self._make(MessageType.SET_FORMATION,
                                       {"aspect": aspect, "distance": distance}))

    def send_raw(self, mtype: MessageType, payload: dict):
        self.transport.send(self._make(mtype, payload))
