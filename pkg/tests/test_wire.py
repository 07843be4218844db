import io
import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from codedpir.errors import ProtocolError
from codedpir.sim.wire import HEADER, Kind, decode_frame, encode_frame, error_frame, read_frame

vectors = st.lists(st.lists(st.integers(0, 2**32 - 1), max_size=6), max_size=4)


def test_exact_layout():
    frame = encode_frame(Kind.QUERY, 2, [[1, 65536]])
    assert frame == (
        b"PR\x01\x01\x00\x02"
        + struct.pack(">I", 2 + 4 + 8)
        + b"\x00\x01"
        + b"\x00\x00\x00\x02"
        + b"\x00\x00\x00\x01\x00\x01\x00\x00"
    )
    assert HEADER.size == 10


@given(st.sampled_from(list(Kind)), st.integers(0, 0xFFFF), vectors)
def test_roundtrip(kind, node, vecs):
    frame = encode_frame(kind, node, vecs)
    msg = decode_frame(frame)
    assert (msg.kind, msg.node, msg.vectors) == (kind, node, tuple(tuple(v) for v in vecs))
    assert read_frame(io.BytesIO(frame + b"extra")) == frame


def test_error_frame_text():
    msg = decode_frame(error_frame(3, "query before store"), q=2)
    assert msg.kind == Kind.ERROR and msg.node == 3
    assert msg.text == "query before store"


@pytest.mark.parametrize(
    "mutate",
    [
        lambda f: b"XX" + f[2:],
        lambda f: f[:2] + b"\x02" + f[3:],
        lambda f: f[:3] + b"\x09" + f[4:],
        lambda f: f[:-1],
        lambda f: f + b"\x00",
        lambda f: f[:6] + struct.pack(">I", 2) + f[10:12],
        lambda f: f[:5],
    ],
)
def test_malformed_frames(mutate):
    with pytest.raises(ProtocolError):
        decode_frame(mutate(encode_frame(Kind.ANSWER, 1, [[3, 4]])))


def test_declared_counts_must_match():
    # Vector count claims two vectors but only one follows.
    payload = b"\x00\x02" + struct.pack(">I", 1) + struct.pack(">I", 5)
    frame = HEADER.pack(b"PR", 1, 2, 1, len(payload)) + payload
    with pytest.raises(ProtocolError):
        decode_frame(frame)


def test_modulus_mismatch():
    frame = encode_frame(Kind.ANSWER, 1, [[4, 5]])
    decode_frame(frame, q=7)
    with pytest.raises(ProtocolError, match="modulus"):
        decode_frame(frame, q=5)


def test_unencodable_values():
    with pytest.raises(ProtocolError):
        encode_frame(Kind.QUERY, 1, [[2**32]])
    with pytest.raises(ProtocolError):
        encode_frame(Kind.QUERY, 70000, [[1]])


def test_read_frame_eof():
    frame = encode_frame(Kind.STORE, 1, [[1, 2, 3]])
    with pytest.raises(EOFError):
        read_frame(io.BytesIO(b""))
    with pytest.raises(EOFError):
        read_frame(io.BytesIO(frame[:-2]))
