"""Binary framing for client/node messages.

Frame layout (all integers big-endian)::

    magic    2 bytes  b"PR"
    version  1 byte   1
    kind     1 byte   1=QUERY 2=ANSWER 3=STORE 4=ERROR
    node     2 bytes  1-based node index
    length   4 bytes  payload size in bytes
    payload:
        count    2 bytes  number of vectors
        per vector: 4-byte element count, then 4-byte residues

ERROR frames carry one vector holding the UTF-8 bytes of the message.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import BinaryIO, Sequence

from ..errors import ProtocolError

__all__ = [
    "HEADER",
    "MAGIC",
    "VERSION",
    "Kind",
    "WireMessage",
    "decode_frame",
    "encode_frame",
    "error_frame",
    "read_frame",
]

MAGIC = b"PR"
VERSION = 1
HEADER = struct.Struct(">2sBBHI")
_COUNT = struct.Struct(">H")
_LEN = struct.Struct(">I")
_MAX_RESIDUE = 2**32 - 1


class Kind(IntEnum):
    QUERY = 1
    ANSWER = 2
    STORE = 3
    ERROR = 4


@dataclass(frozen=True)
class WireMessage:
    kind: Kind
    node: int
    vectors: tuple[tuple[int, ...], ...]

    @property
    def text(self) -> str:
        """Message of an ERROR frame."""
        return bytes(self.vectors[0]).decode("utf-8", "replace") if self.vectors else ""


def encode_frame(kind: Kind, node: int, vectors: Sequence[Sequence[int]]) -> bytes:
    if not 0 <= node <= 0xFFFF:
        raise ProtocolError(f"node index {node} does not fit in 2 bytes")
    if len(vectors) > 0xFFFF:
        raise ProtocolError("too many vectors for one frame")
    parts = [_COUNT.pack(len(vectors))]
    for vec in vectors:
        for x in vec:
            if not 0 <= x <= _MAX_RESIDUE:
                raise ProtocolError(f"residue {x} does not fit in 4 bytes")
        parts.append(_LEN.pack(len(vec)))
        parts.append(struct.pack(f">{len(vec)}I", *vec))
    payload = b"".join(parts)
    return HEADER.pack(MAGIC, VERSION, int(kind), node, len(payload)) + payload


def error_frame(node: int, message: str) -> bytes:
    return encode_frame(Kind.ERROR, node, [list(message.encode("utf-8"))])


def _parse_header(header: bytes) -> tuple[Kind, int, int]:
    magic, version, kind, node, length = HEADER.unpack(header)
    if magic != MAGIC:
        raise ProtocolError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ProtocolError(f"unsupported version {version}")
    try:
        kind = Kind(kind)
    except ValueError:
        raise ProtocolError(f"unknown frame kind {kind}") from None
    return kind, node, length


def _parse_payload(payload: bytes, kind: Kind, q: int | None) -> tuple[tuple[int, ...], ...]:
    if len(payload) < _COUNT.size:
        raise ProtocolError("payload shorter than its vector count")
    (count,) = _COUNT.unpack_from(payload, 0)
    pos = _COUNT.size
    vectors = []
    for _ in range(count):
        if pos + _LEN.size > len(payload):
            raise ProtocolError("truncated vector header")
        (n,) = _LEN.unpack_from(payload, pos)
        pos += _LEN.size
        end = pos + 4 * n
        if end > len(payload):
            raise ProtocolError("truncated vector body")
        vec = struct.unpack_from(f">{n}I", payload, pos)
        pos = end
        if q is not None and kind != Kind.ERROR and any(x >= q for x in vec):
            raise ProtocolError(f"modulus mismatch: residue >= q={q}")
        vectors.append(vec)
    if pos != len(payload):
        raise ProtocolError("payload length does not match declared counts")
    return tuple(vectors)


def decode_frame(frame: bytes, q: int | None = None) -> WireMessage:
    """Parse one complete frame; with ``q`` every residue is range-checked."""
    if len(frame) < HEADER.size:
        raise ProtocolError("frame shorter than header")
    kind, node, length = _parse_header(frame[: HEADER.size])
    payload = frame[HEADER.size:]
    if len(payload) != length:
        raise ProtocolError(f"declared payload length {length}, got {len(payload)}")
    return WireMessage(kind, node, _parse_payload(payload, kind, q))


def _read_exact(stream: BinaryIO, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = stream.read(n - len(buf))
        if not chunk:
            raise EOFError("stream closed mid-frame" if buf else "stream closed")
        buf += chunk
    return buf


def read_frame(stream: BinaryIO) -> bytes:
    """Read one raw frame from a byte stream (e.g. ``socket.makefile('rb')``)."""
    header = _read_exact(stream, HEADER.size)
    _, _, length = _parse_header(header)
    return header + _read_exact(stream, length)
