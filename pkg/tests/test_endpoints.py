"""Socket front ends: TCP line protocol and the WebSocket bridge."""

import base64
import os
import socket
import struct
import time

import pytest

from aircombat.protocol import (
    LockstepClient,
    MessageType,
    ProtocolError,
    ServiceConfig,
    SimulationService,
    TcpTransport,
    WireMessage,
    decode,
    encode,
)
from aircombat.protocol.client import TransportError
from aircombat.protocol.tcp import TcpServer
from aircombat.protocol.ws import FrameReader, WsServer, accept_key, encode_frame
from aircombat.scenario import ScenarioConfig


@pytest.fixture
def tcp_server():
    svc = SimulationService(ServiceConfig(seed=3, scenario=ScenarioConfig(position_box=3000.0)))
    server = TcpServer(svc, port=0).start()
    yield server
    server.stop()


class TestTcp:
    def test_end_to_end_lockstep_over_sockets(self, tcp_server):
        ctl = LockstepClient(TcpTransport("127.0.0.1", tcp_server.port, timeout=10.0))
        scenario = ctl.reset(seed=5)
        assert scenario["controlled_id"] == "wingman"
        grants = []
        for _ in range(3):
            result = ctl.cycle([{"entity_id": "wingman", "altitude": 5000.0,
                                 "speed": 300.0, "course": 1.0}], delta_ms=1000)
            grants.append(result.grant_time)
            assert set(result.ground_truth) == {"lead", "wingman"}
        assert grants == [1.0, 2.0, 3.0]
        ctl.close()

    def test_observer_snapshot_over_sockets(self, tcp_server):
        ctl = LockstepClient(TcpTransport("127.0.0.1", tcp_server.port, timeout=10.0))
        ctl.reset(seed=5)
        ctl.cycle([], delta_ms=1000)

        obs = LockstepClient(TcpTransport("127.0.0.1", tcp_server.port, timeout=10.0))
        obs.subscribe()
        first = obs.transport.recv(timeout=10.0)
        assert first.type is MessageType.SCENARIO_INIT
        ctl.cycle([], delta_ms=1000)
        seen = [obs.transport.recv(timeout=10.0).type for _ in range(5)]
        assert MessageType.TIME_ADVANCE_GRANT in seen
        ctl.close()
        obs.close()

    def test_malformed_line_answers_error_and_session_survives(self, tcp_server):
        sock = socket.create_connection(("127.0.0.1", tcp_server.port), timeout=10.0)
        sock.sendall(b"garbage that is not json\n")
        buf = b""
        while b"\n" not in buf:
            buf += sock.recv(65536)
        err = decode(buf.split(b"\n")[0].decode())
        assert err.type is MessageType.ERROR and err.payload["code"] == "malformed"
        sock.sendall((encode(WireMessage(MessageType.SUBSCRIBE, 0.0, 1, {})) + "\n").encode())
        buf = b""
        while b"\n" not in buf:
            buf += sock.recv(65536)
        assert decode(buf.split(b"\n")[0].decode()).type is MessageType.SCENARIO_INIT
        sock.close()

    def test_connect_failure_raises_transport_error(self):
        with pytest.raises(TransportError):
            TcpTransport("127.0.0.1", 1, timeout=0.5)


# --- websocket bridge -------------------------------------------------------------


class RawWsClient:
    """Minimal masked client used to exercise the server implementation."""

    def __init__(self, port, path="/"):
        self.sock = socket.create_connection(("127.0.0.1", port), timeout=10.0)
        key = base64.b64encode(os.urandom(16)).decode()
        self.sock.sendall(
            f"GET {path} HTTP/1.1\r\nHost: x\r\nUpgrade: websocket\r\n"
            f"Connection: Upgrade\r\nSec-WebSocket-Key: {key}\r\n"
            f"Sec-WebSocket-Version: 13\r\n\r\n".encode())
        reply = b""
        while b"\r\n\r\n" not in reply:
            reply += self.sock.recv(8192)
        head, self._buf = reply.split(b"\r\n\r\n", 1)
        assert b"101" in head.split(b"\r\n")[0]
        expected = accept_key(key)
        assert f"Sec-WebSocket-Accept: {expected}".encode() in head

    def send_text(self, text: str):
        payload = text.encode()
        mask = os.urandom(4)
        masked = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        n = len(payload)
        if n < 126:
            head = bytes([0x81, 0x80 | n])
        else:
            head = bytes([0x81, 0x80 | 126]) + struct.pack(">H", n)
        self.sock.sendall(head + mask + masked)

    def recv_text(self) -> str:
        while True:
            frame, self._buf = self._take_frame(self._buf)
            if frame is not None:
                opcode, payload = frame
                if opcode == 0x1:
                    return payload.decode()
                continue
            chunk = self.sock.recv(65536)
            if not chunk:
                raise ConnectionError("closed")
            self._buf += chunk

    @staticmethod
    def _take_frame(buf):
        if len(buf) < 2:
            return None, buf
        length = buf[1] & 0x7F
        offset = 2
        if length == 126:
            if len(buf) < 4:
                return None, buf
            length = struct.unpack(">H", buf[2:4])[0]
            offset = 4
        elif length == 127:
            if len(buf) < 10:
                return None, buf
            length = struct.unpack(">Q", buf[2:10])[0]
            offset = 10
        if len(buf) < offset + length:
            return None, buf
        return (buf[0] & 0x0F, buf[offset:offset + length]), buf[offset + length:]

    def close(self):
        self.sock.close()


class TestWebSocket:
    def test_accept_key_matches_rfc6455_sample(self):
        assert accept_key("dGhlIHNhbXBsZSBub25jZQ==") == "s3pPLMBiTxaQ9kYGzzhZRbK+xOo="

    def test_frame_reader_round_trips_all_length_classes(self):
        class LoopSock:
            def __init__(self, data):
                self.data = data

            def recv(self, n):
                out, self.data = self.data[:n], self.data[n:]
                return out

        for size in (1, 125, 126, 65535, 65536, 70000):
            payload = os.urandom(size)
            mask = os.urandom(4)
            masked = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
            n = len(payload)
            if n < 126:
                head = bytes([0x82, 0x80 | n])
            elif n < 1 << 16:
                head = bytes([0x82, 0x80 | 126]) + struct.pack(">H", n)
            else:
                head = bytes([0x82, 0x80 | 127]) + struct.pack(">Q", n)
            reader = FrameReader(LoopSock(head + mask + masked))
            opcode, out = reader.read_frame()
            assert opcode == 0x2 and out == payload

    def test_server_frame_encoding_lengths(self):
        for size in (10, 200, 70000):
            frame = encode_frame(b"x" * size)
            assert frame.endswith(b"x" * 10)
            assert frame[0] == 0x81

    @pytest.fixture
    def ws_server(self, tmp_path):
        (tmp_path / "index.html").write_text("<html>console</html>")
        svc = SimulationService(ServiceConfig(seed=4, scenario=ScenarioConfig(position_box=3000.0)))
        server = WsServer(svc, port=0, static_root=tmp_path).start()
        yield server
        server.stop()

    def test_subscribe_and_steer_over_websocket(self, ws_server):
        client = RawWsClient(ws_server.port)
        client.send_text(encode(WireMessage(MessageType.SUBSCRIBE, 0.0, 1, {})))
        first = decode(client.recv_text())
        assert first.type is MessageType.SCENARIO_INIT
        for _ in range(len(first.payload["entities"])):
            assert decode(client.recv_text()).type is MessageType.ENTITY_STATE
        client.send_text(encode(WireMessage(
            MessageType.SET_FORMATION, 0.0, 2, {"aspect": 0.5, "distance": 800.0})))
        echo = decode(client.recv_text())
        assert echo.type is MessageType.SET_FORMATION
        assert echo.payload == {"aspect": 0.5, "distance": 800.0}
        assert ws_server.service.formation.distance == 800.0
        client.close()

    def test_static_console_served_on_same_port(self, ws_server):
        sock = socket.create_connection(("127.0.0.1", ws_server.port), timeout=10.0)
        sock.sendall(b"GET / HTTP/1.1\r\nHost: x\r\n\r\n")
        reply = b""
        try:
            while True:
                chunk = sock.recv(65536)
                if not chunk:
                    break
                reply += chunk
        except socket.timeout:
            pass
        assert b"200 OK" in reply and b"console" in reply
        sock.close()

    def test_path_traversal_blocked(self, ws_server):
        sock = socket.create_connection(("127.0.0.1", ws_server.port), timeout=10.0)
        sock.sendall(b"GET /../../etc/passwd HTTP/1.1\r\nHost: x\r\n\r\n")
        reply = b""
        try:
            while True:
                chunk = sock.recv(65536)
                if not chunk:
                    break
                reply += chunk
        except socket.timeout:
            pass
        assert b"404" in reply
        sock.close()


class TestRealtimePacing:
    def test_grants_paced_to_wall_clock(self):
        svc = SimulationService(ServiceConfig(
            seed=1, realtime_factor=10.0,
            scenario=ScenarioConfig(position_box=3000.0)))
        from aircombat.protocol import InProcTransport
        ctl = LockstepClient(InProcTransport(svc))
        ctl.reset(seed=1)
        start = time.monotonic()
        for _ in range(10):
            ctl.cycle([], delta_ms=100)
        elapsed = time.monotonic() - start
        # 1.0 s of sim time at 10x realtime => ~0.1 s of wall time
        assert elapsed >= 0.09
        assert elapsed < 0.5

    def test_factor_zero_runs_free(self):
        svc = SimulationService(ServiceConfig(
            seed=1, realtime_factor=0.0,
            scenario=ScenarioConfig(position_box=3000.0)))
        from aircombat.protocol import InProcTransport
        ctl = LockstepClient(InProcTransport(svc))
        ctl.reset(seed=1)
        start = time.monotonic()
        for _ in range(100):
            ctl.cycle([], delta_ms=100)
        assert time.monotonic() - start < 2.0  # no wall-clock pacing


class TestServeCommand:
    def test_serve_accepts_controllers_and_console_clients(self, tmp_path):
        import re
        import subprocess
        import sys

        proc = subprocess.Popen(
            [sys.executable, "-u", "-m", "aircombat.cli", "serve",
             "--port", "0", "--ws-port", "0", "--seed", "3"],
            stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True)
        try:
            line = proc.stdout.readline()
            m = re.search(r"on 127\.0\.0\.1:(\d+), websocket bridge on 127\.0\.0\.1:(\d+)", line)
            assert m, f"unexpected banner: {line!r}"
            tcp_port, ws_port = int(m.group(1)), int(m.group(2))

            ctl = LockstepClient(TcpTransport("127.0.0.1", tcp_port, timeout=10.0))
            ctl.reset(seed=1)
            result = ctl.cycle([], delta_ms=1000)
            assert result.grant_time == 1.0
            ctl.close()

            ws = RawWsClient(ws_port)
            ws.send_text(encode(WireMessage(MessageType.SUBSCRIBE, 0.0, 1, {})))
            assert decode(ws.recv_text()).type is MessageType.SCENARIO_INIT
            ws.close()
        finally:
            proc.terminate()
            proc.wait(timeout=10)
