"""Byte-exact packet serialization.

Layout (all integers little-endian)::

    b"BC01" | generation_id u32 | N u16 | W u16 | f u16
            | ceil(W/8) coefficient bytes, bit j (LSB-first) = g[f + j]
            | payload length u32 | payload
"""

from __future__ import annotations

import struct

from .codec import BandPacket
from .errors import MalformedPacketError, ParameterError
from .gf2 import EncodingVector, Window

MAGIC = b"BC01"
_HEADER = struct.Struct("<4sIHHH")
_LEN = struct.Struct("<I")


def encode_packet(pkt: BandPacket) -> bytes:
    win = pkt.window
    n = pkt.n
    if n > 0xFFFF or pkt.generation_id > 0xFFFFFFFF or pkt.generation_id < 0:
        raise ParameterError("packet fields exceed the wire format ranges")
    coeff = (pkt.coeffs.bits >> win.f).to_bytes((win.size + 7) // 8, "little")
    return b"".join(
        (
            _HEADER.pack(MAGIC, pkt.generation_id, n, win.size, win.f),
            coeff,
            _LEN.pack(len(pkt.payload)),
            pkt.payload,
        )
    )


def decode_packet(data: bytes, offset: int = 0) -> tuple[BandPacket, int]:
    """Parse one packet starting at ``offset``; return it and the offset just past it."""
    try:
        magic, gen_id, n, w, f = _HEADER.unpack_from(data, offset)
    except struct.error as exc:
        raise MalformedPacketError("truncated packet header") from exc
    if magic != MAGIC:
        raise MalformedPacketError(f"bad magic {magic!r}")
    try:
        window = Window(f, w, n)
    except ParameterError as exc:
        raise MalformedPacketError(str(exc)) from exc
    pos = offset + _HEADER.size
    nbytes = (w + 7) // 8
    if len(data) < pos + nbytes + _LEN.size:
        raise MalformedPacketError("truncated coefficient block")
    raw = int.from_bytes(data[pos : pos + nbytes], "little")
    if raw >> w:
        raise MalformedPacketError("padding bits set beyond the window")
    pos += nbytes
    (size,) = _LEN.unpack_from(data, pos)
    pos += _LEN.size
    if len(data) < pos + size:
        raise MalformedPacketError("truncated payload")
    payload = bytes(data[pos : pos + size])
    pkt = BandPacket(gen_id, EncodingVector(n, raw << f), payload, window)
    return pkt, pos + size


def from_bytes(data: bytes) -> BandPacket:
    pkt, end = decode_packet(data)
    if end != len(data):
        raise MalformedPacketError(f"{len(data) - end} trailing bytes")
    return pkt


def header_size(w: int) -> int:
    return _HEADER.size + (w + 7) // 8 + _LEN.size
