"""Threaded TCP front end: one listener, queue-fed writer per connection.

Delivery into a session queue never blocks the lockstep cycle; when a slow
subscriber falls behind, the oldest undelivered messages are dropped.
"""

import logging
import queue
import socket
import threading

from .messages import encode

log = logging.getLogger(__name__)

_CLOSE = object()

DEFAULT_PORT = 7777


class _Connection:
    def __init__(self, server, sock, addr):
        self.server = server
        self.sock = sock
        self.addr = addr
        self.queue = queue.Queue(maxsize=4096)
        self.session = server.service.register(self.deliver)
        self.writer = threading.Thread(target=self._write_loop, daemon=True)
        self.reader = threading.Thread(target=self._read_loop, daemon=True)

    def start(self):
        self.writer.start()
        self.reader.start()

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
                msg = self.queue.get()
                if msg is _CLOSE:
                    break
                self.sock.sendall((encode(msg) + "\n").encode("utf-8"))
        except OSError:
            pass
        finally:
            self.close()

    def _read_loop(self):
        buf = b""
        try:
            while True:
                chunk = self.sock.recv(65536)
                if not chunk:
                    break
                buf += chunk
                while b"\n" in buf:
                    line, buf = buf.split(b"\n", 1)
                    if line.strip():
                        self.server.service.handle_frame(self.session, line.decode("utf-8"))
        except OSError:
            pass
        finally:
            self.close()

    def close(self):
        self.server.service.unregister(self.session)
        try:
            self.queue.put_nowait(_CLOSE)
        except queue.Full:
            pass
        try:
            self.sock.close()
        except OSError:
            pass


class TcpServer:
    def __init__(self, service, host="127.0.0.1", port=DEFAULT_PORT):
        self.service = service
        self.host = host
        self.port = port
        self._listener = None
        self._conns = []
        self._accepting = None

    def start(self):
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((self.host, self.port))
        self.port = self._listener.getsockname()[1]
        self._listener.listen(16)
        self._accepting = threading.Thread(target=self._accept_loop, daemon=True)
        self._accepting.start()
        log.info("lockstep service listening on %s:%d", self.host, self.port)
        return self

    def _accept_loop(self):
        try:
            while True:
                sock, addr = self._listener.accept()
                sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                conn = _Connection(self, sock, addr)
                self._conns.append(conn)
                conn.start()
        except OSError:
            pass

    def stop(self):
        if self._listener:
            try:
                self._listener.close()
            except OSError:
                pass
        for conn in list(self._conns):
            conn.close()
