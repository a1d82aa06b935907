"""Browser-facing bridge: the same message stream over WebSocket (RFC 6455).

Each wire message rides as one text frame (no newline framing needed). Plain
HTTP GETs on the same port serve the console's static files, so a browser
needs only one origin. Server side only; clients must mask, we never do.
"""

import base64
import hashlib
import logging
import os
import queue
import socket
import struct
import threading

from .messages import encode

log = logging.getLogger(__name__)

GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
DEFAULT_PORT = 8080

_CLOSE = object()

_MIME = {".html": "text/html; charset=utf-8",
         ".js": "text/javascript; charset=utf-8",
         ".css": "text/css; charset=utf-8",
         ".map": "application/json",
         ".svg": "image/svg+xml"}


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def encode_frame(payload: bytes, opcode: int = 0x1) -> bytes:
    """Server-to-client frame: FIN set, never masked."""
    head = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        head += bytes([n])
    elif n < 1 << 16:
        head += bytes([126]) + struct.pack(">H", n)
    else:
        head += bytes([127]) + struct.pack(">Q", n)
    return head + payload


class FrameReader:
    """Incremental parser for client-to-server (masked) frames."""

    def __init__(self, sock):
        self.sock = sock
        self.buf = b""

    def _need(self, n):
        while len(self.buf) < n:
            chunk = self.sock.recv(65536)
            if not chunk:
                raise ConnectionError("socket closed")
            self.buf += chunk

    def read_frame(self):
        """-> (opcode, payload bytes) for one complete frame."""
        self._need(2)
        b0, b1 = self.buf[0], self.buf[1]
        opcode = b0 & 0x0F
        fin = bool(b0 & 0x80)
        masked = bool(b1 & 0x80)
        length = b1 & 0x7F
        offset = 2
        if length == 126:
            self._need(4)
            length = struct.unpack(">H", self.buf[2:4])[0]
            offset = 4
        elif length == 127:
            self._need(10)
            length = struct.unpack(">Q", self.buf[2:10])[0]
            offset = 10
        if not masked:
            raise ConnectionError("client frames must be masked")
        self._need(offset + 4 + length)
        mask = self.buf[offset:offset + 4]
        data = bytearray(self.buf[offset + 4:offset + 4 + length])
        self.buf = self.buf[offset + 4 + length:]
        for i in range(len(data)):
            data[i] ^= mask[i % 4]
        if not fin:
            # continuation support: keep reading until FIN
            op2, rest = self.read_frame()
            if op2 != 0:
                raise ConnectionError("interleaved fragmented frames unsupported")
            return opcode, bytes(data) + rest
        return opcode, bytes(data)


class _WsConnection:
    def __init__(self, server, sock):
        self.server = server
        self.sock = sock
        self.queue = queue.Queue(maxsize=1024)
        self.session = None

    def run(self):
        try:
            request = self._read_request()
            if request is None:
                return
            headers, path = request
            if headers.get("upgrade", "").lower() != "websocket":
                self._serve_static(path)
                return
            self._handshake(headers)
            self._serve_ws()
        except (OSError, ConnectionError) as exc:
            log.debug("ws connection ended: %s", exc)
        finally:
            if self.session is not None:
                self.server.service.unregister(self.session)
            try:
                self.sock.close()
            except OSError:
                pass

    def _read_request(self):
        data = b""
        while b"\r\n\r\n" not in data:
            chunk = self.sock.recv(8192)
            if not chunk:
                return None
            data += chunk
            if len(data) > 65536:
                raise ConnectionError("oversized HTTP request")
        head, rest = data.split(b"\r\n\r\n", 1)
        lines = head.decode("latin-1").split("\r\n")
        path = lines[0].split(" ")[1] if len(lines[0].split(" ")) > 1 else "/"
        headers = {}
        for line in lines[1:]:
            if ":" in line:
                k, v = line.split(":", 1)
                headers[k.strip().lower()] = v.strip()
        self._pre_read = rest
        return headers, path

    def _handshake(self, headers):
        key = headers.get("sec-websocket-key")
        if not key:
            raise ConnectionError("missing Sec-WebSocket-Key")
        response = (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {accept_key(key)}\r\n\r\n")
        self.sock.sendall(response.encode("ascii"))

    def _serve_static(self, path):
        root = self.server.static_root
        body = b"console assets not bundled; connect a WebSocket client"
        status, mime = "404 Not Found", "text/plain"
        if root:
            rel = "index.html" if path in ("/", "") else path.lstrip("/")
            full = os.path.normpath(os.path.join(root, rel))
            if full.startswith(os.path.abspath(root)) and os.path.isfile(full):
                with open(full, "rb") as fh:
                    body = fh.read()
                status = "200 OK"
                mime = _MIME.get(os.path.splitext(full)[1], "application/octet-stream")
        head = (f"HTTP/1.1 {status}\r\nContent-Type: {mime}\r\n"
                f"Content-Length: {len(body)}\r\nConnection: close\r\n\r\n")
        self.sock.sendall(head.encode("ascii") + body)

    def _serve_ws(self):
        self.session = self.server.service.register(self.deliver)
        writer = threading.Thread(target=self._write_loop, daemon=True)
        writer.start()
        reader = FrameReader(self.sock)
        reader.buf = getattr(self, "_pre_read", b"")
        while True:
            opcode, payload = reader.read_frame()
            if opcode == 0x8:  # close
                break
            if opcode == 0x9:  # ping -> pong
                self.queue.put(("pong", payload))
                continue
            if opcode in (0x1, 0x2):
                self.server.service.handle_frame(self.session, payload.decode("utf-8"))
        self.queue.put(_CLOSE)

    def deliver(self, msg):
        try:
            self.queue.put_nowait(msg)
        except queue.Full:
            try:
                self.queue.get_nowait()  # drop-oldest
            except queue.Empty:
                pass
            try:
                self.queue.put_nowait(msg)
            except queue.Full:
                pass

    def _write_loop(self):
        try:
            while True:
                item = self.queue.get()
                if item is _CLOSE:
                    break
                if isinstance(item, tuple) and item[0] == "pong":
                    self.sock.sendall(encode_frame(item[1], opcode=0xA))
                    continue
                self.sock.sendall(encode_frame(encode(item).encode("utf-8")))
        except OSError:
            pass


class WsServer:
    """WebSocket + static-file endpoint in front of a simulation service."""

    def __init__(self, service, host="127.0.0.1", port=DEFAULT_PORT, static_root=None):
        self.service = service
        self.host = host
        self.port = port
        self.static_root = os.path.abspath(static_root) if static_root else None
        self._listener = None

    def start(self):
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((self.host, self.port))
        self.port = self._listener.getsockname()[1]
        self._listener.listen(16)
        threading.Thread(target=self._accept_loop, daemon=True).start()
        log.info("websocket bridge listening on %s:%d", self.host, self.port)
        return self

    def _accept_loop(self):
        try:
            while True:
                sock, _ = self._listener.accept()
                conn = _WsConnection(self, sock)
                threading.Thread(target=conn.run, daemon=True).start()
        except OSError:
            pass

    def stop(self):
        if self._listener:
            try:
                self._listener.close()
            except OSError:
                pass
