"""Storage node actors and the two transports that carry frames to them.

Each node runs on its own thread and only ever sees its own stored vector and
the frames addressed to it.  The in-process transport hands frames over
queues; the socket transport gives each node a TCP listener and the client
one stream per node.  Both move the same encoded bytes.
"""

from __future__ import annotations

import logging
import queue
import socket
import threading
from typing import Callable, Mapping

from ..errors import PIRError, ProtocolError, SessionError
from ..retrieval import QueryBundle, respond
from ..storage import NodeContent
from .wire import Kind, decode_frame, encode_frame, error_frame, read_frame

log = logging.getLogger(__name__)

__all__ = ["InProcessTransport", "SocketTransport", "StorageNode", "Transport", "make_transport"]

Tap = Callable[[int, bytes], None]


class StorageNode:
    """Holds ``X_k`` and answers queries; no state besides the content."""

    def __init__(self, k: int, q: int):
        self.k = k
        self.q = q
        self.content: NodeContent | None = None
        self.dead = threading.Event()

    def handle(self, frame: bytes) -> bytes | None:
        try:
            msg = decode_frame(frame, self.q)
        except ProtocolError as exc:
            return error_frame(self.k, str(exc))
        if msg.node != self.k:
            return error_frame(self.k, f"frame addressed to node {msg.node}")
        if msg.kind == Kind.STORE:
            if len(msg.vectors) != 1:
                return error_frame(self.k, "STORE carries exactly one vector")
            self.content = NodeContent(self.k, msg.vectors[0])
            return None
        if msg.kind == Kind.QUERY:
            if self.content is None:
                return error_frame(self.k, "query before store")
            try:
                answer = respond(self.content, QueryBundle(self.k, msg.vectors), self.q)
            except PIRError as exc:
                return error_frame(self.k, str(exc))
            return encode_frame(Kind.ANSWER, self.k, [answer.values])
        return error_frame(self.k, f"unexpected {msg.kind.name} frame")


class Transport:
    """Base class: frame delivery to node ``k`` and replies from it."""

    def __init__(self, nodes: list[StorageNode], timeout: float = 5.0):
        self.nodes = {n.k: n for n in nodes}
        self.timeout = timeout
        self.taps: list[Tap] = []

    def start(self) -> None:
        raise NotImplementedError

    def close(self) -> None:
        raise NotImplementedError

    def _deliver(self, k: int, frame: bytes) -> None:
        raise NotImplementedError

    def recv(self, k: int) -> bytes:
        raise NotImplementedError

    def send(self, k: int, frame: bytes) -> None:
        for tap in self.taps:
            tap(k, frame)
        self._deliver(k, frame)

    def kill(self, k: int) -> None:
        """Make node ``k`` go silent: it keeps reading frames but never replies."""
        self.nodes[k].dead.set()

    def __enter__(self) -> Transport:
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class InProcessTransport(Transport):
    def __init__(self, nodes: list[StorageNode], timeout: float = 5.0):
        super().__init__(nodes, timeout)
        self._inbox = {k: queue.Queue() for k in self.nodes}
        self._outbox = {k: queue.Queue() for k in self.nodes}
        self._threads: list[threading.Thread] = []

    def _serve(self, node: StorageNode) -> None:
        inbox, outbox = self._inbox[node.k], self._outbox[node.k]
        while True:
            frame = inbox.get()
            if frame is None:
                return
            if node.dead.is_set():
                continue
            reply = node.handle(frame)
            if reply is not None:
                outbox.put(reply)

    def start(self) -> None:
        for node in self.nodes.values():
            t = threading.Thread(target=self._serve, args=(node,), daemon=True, name=f"node-{node.k}")
            t.start()
            self._threads.append(t)

    def close(self) -> None:
        for inbox in self._inbox.values():
            inbox.put(None)
        for t in self._threads:
            t.join(timeout=1.0)
        self._threads.clear()

    def _deliver(self, k: int, frame: bytes) -> None:
        self._inbox[k].put(frame)

    def recv(self, k: int) -> bytes:
        try:
            return self._outbox[k].get(timeout=self.timeout)
        except queue.Empty:
            raise SessionError(f"timed out after {self.timeout}s", node=k) from None


class SocketTransport(Transport):
    """One TCP stream per node.

    ``addresses`` maps node index to ``(host, port)``; unspecified nodes
    listen on an ephemeral port on 127.0.0.1.
    """

    def __init__(
        self,
        nodes: list[StorageNode],
        timeout: float = 5.0,
        addresses: Mapping[int, tuple[str, int]] | None = None,
    ):
        super().__init__(nodes, timeout)
        self.addresses = dict(addresses or {})
        self._listeners: dict[int, socket.socket] = {}
        self._client: dict[int, socket.socket] = {}
        self._readers: dict = {}
        self._threads: list[threading.Thread] = []

    def _serve(self, node: StorageNode, listener: socket.socket) -> None:
        try:
            conn, _ = listener.accept()
        except OSError:
            return
        with conn, conn.makefile("rb") as reader:
            while True:
                try:
                    frame = read_frame(reader)
                except (EOFError, OSError):
                    return
                except ProtocolError as exc:
                    try:
                        conn.sendall(error_frame(node.k, str(exc)))
                    except OSError:
                        pass
                    return
                if node.dead.is_set():
                    continue
                reply = node.handle(frame)
                if reply is not None:
                    try:
                        conn.sendall(reply)
                    except OSError:
                        return

    def start(self) -> None:
        for k, node in self.nodes.items():
            host, port = self.addresses.get(k, ("127.0.0.1", 0))
            listener = socket.create_server((host, port))
            self._listeners[k] = listener
            t = threading.Thread(
                target=self._serve, args=(node, listener), daemon=True, name=f"node-{k}"
            )
            t.start()
            self._threads.append(t)
        for k, listener in self._listeners.items():
            try:
                sock = socket.create_connection(listener.getsockname()[:2], timeout=self.timeout)
            except OSError as exc:
                raise SessionError(f"cannot connect: {exc}", node=k) from None
            self._client[k] = sock
            self._readers[k] = sock.makefile("rb")

    def close(self) -> None:
        for reader in self._readers.values():
            reader.close()
        for sock in self._client.values():
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            sock.close()
        for listener in self._listeners.values():
            listener.close()
        for t in self._threads:
            t.join(timeout=1.0)
        self._client.clear()
        self._readers.clear()
        self._listeners.clear()
        self._threads.clear()

    def _deliver(self, k: int, frame: bytes) -> None:
        try:
            self._client[k].sendall(frame)
        except OSError as exc:
            raise SessionError(f"send failed: {exc}", node=k) from None

    def recv(self, k: int) -> bytes:
        try:
            return read_frame(self._readers[k])
        except socket.timeout:
            raise SessionError(f"timed out after {self.timeout}s", node=k) from None
        except (EOFError, OSError) as exc:
            raise SessionError(f"connection lost: {exc}", node=k) from None
        except ProtocolError as exc:
            raise SessionError(f"malformed frame: {exc}", node=k) from None


def make_transport(
    kind: str,
    nodes: list[StorageNode],
    timeout: float = 5.0,
    addresses: Mapping[int, tuple[str, int]] | None = None,
) -> Transport:
    if kind in ("inproc", "in-process"):
        return InProcessTransport(nodes, timeout)
    if kind == "socket":
        return SocketTransport(nodes, timeout, addresses)
    raise ValueError(f"unknown transport {kind!r}; use 'inproc' or 'socket'")
