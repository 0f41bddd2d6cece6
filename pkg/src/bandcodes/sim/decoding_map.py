"""Decoding maps and the data frame that carries them.

A frame on a link is the map prefix followed by a ``BC01`` packet::

    b"DM" | base generation u32 | width u16 | ceil(width/8) bytes, bit k = generation base+k decoded
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from ..codec import BandPacket
from ..errors import MalformedPacketError
from ..wire import decode_packet, encode_packet

MAP_MAGIC = b"DM"
_MAP = struct.Struct("<2sIH")


def map_size(width: int) -> int:
    return _MAP.size + (width + 7) // 8


@dataclass(frozen=True)
class DecodingMap:
    base: int
    width: int
    bits: int = 0

    def __post_init__(self) -> None:
        if self.bits >> self.width:
            raise MalformedPacketError("decoding map has bits beyond its width")

    def is_decoded(self, generation: int) -> bool:
        k = generation - self.base
        return 0 <= k < self.width and bool(self.bits >> k & 1)

    def absolute_mask(self) -> int:
        """Decoded generations as a bitmask indexed by absolute generation id."""
        return self.bits << self.base

    @classmethod
    def from_mask(cls, mask: int, base: int, width: int) -> "DecodingMap":
        return cls(base, width, (mask >> base) & ((1 << width) - 1))

    def to_bytes(self) -> bytes:
        return _MAP.pack(MAP_MAGIC, self.base, self.width) + self.bits.to_bytes((self.width + 7) // 8, "little")

    @classmethod
    def parse(cls, data: bytes, offset: int = 0) -> tuple["DecodingMap", int]:
        try:
            magic, base, width = _MAP.unpack_from(data, offset)
        except struct.error as exc:
            raise MalformedPacketError("truncated decoding map") from exc
        if magic != MAP_MAGIC:
            raise MalformedPacketError(f"bad decoding-map magic {magic!r}")
        pos = offset + _MAP.size
        nbytes = (width + 7) // 8
        if len(data) < pos + nbytes:
            raise MalformedPacketError("truncated decoding map bits")
        bits = int.from_bytes(data[pos : pos + nbytes], "little")
        return cls(base, width, bits), pos + nbytes


def encode_frame(dmap: DecodingMap, pkt: BandPacket) -> bytes:
    return dmap.to_bytes() + encode_packet(pkt)


def decode_frame(data: bytes) -> tuple[DecodingMap, BandPacket]:
    dmap, pos = DecodingMap.parse(data)
    pkt, end = decode_packet(data, pos)
    if end != len(data):
        raise MalformedPacketError(f"{len(data) - end} trailing bytes after frame")
    return dmap, pkt
