"""Per-node protocol logic: scheduling, packet and stop handling, scoring."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from ..codec import (
    BandPacket,
    Generation,
    SgeState,
    combine_subset,
    encode_source_packet,
    reference_nc_encode,
)
from ..degree import rsd
from ..errors import MalformedPacketError
from ..gf2 import EncodingVector, Window
from ..rng import make_rng
from .config import US, SimConfig
from .decoding_map import DecodingMap

SOURCE = 0


class Clock:
    """Maps the integer microsecond clock onto generation positions.

    Generation ``g`` is fetched by the source at ``g * C_t`` and played at
    ``t_b + g * C_t``; a node's decoding region at time ``t`` holds the
    generations already fetched whose deadline has not passed.
    """

    def __init__(self, cfg: SimConfig):
        self.ct = round(cfg.generation_duration * US)
        self.tb = round(cfg.buffering_time * US)
        self.generations = cfg.generations
        self.width = cfg.map_width
        self.end = self.deadline(cfg.generations - 1)

    def deadline(self, gen: int) -> int:
        return self.tb + gen * self.ct

    def source_position(self, now: int) -> Optional[int]:
        gen = now // self.ct
        return gen if gen < self.generations else None

    def region(self, now: int) -> tuple[int, int]:
        """Inclusive ``(lo, hi)``; empty when ``lo > hi``."""
        lo = max(0, (now - self.tb) // self.ct + 1)
        hi = min(now // self.ct, self.generations - 1)
        return lo, hi

    def region_mask(self, now: int) -> int:
        lo, hi = self.region(now)
        if lo > hi:
            return 0
        return ((1 << (hi - lo + 1)) - 1) << lo

    def map_base(self, now: int) -> int:
        return max(0, (now - self.tb) // self.ct + 1)


def geometric_weights(count: int, p: float) -> list[float]:
    """Truncated geometric law over ``0 .. count-1``, renormalized."""
    raw = [(1 - p) ** k * p for k in range(count)]
    total = sum(raw)
    return [x / total for x in raw]


def geometric_choice(count: int, p: float, rng: random.Random) -> int:
    if count == 1 or p >= 1:
        return 0
    u = rng.random() * (1 - (1 - p) ** count)
    acc = 0.0
    for k in range(count):
        acc += (1 - p) ** k * p
        if u < acc:
            return k
    return count - 1


@dataclass
class GenerationRecord:
    node: int
    generation: int
    received: int
    xor_triangularization: int
    xor_diagonalization: int
    decoded_at: int


class PeerNode:
    """One overlay node.  Node 0 is the source and only ever encodes."""

    def __init__(self, node_id: int, peers: list[int], cfg: SimConfig, clock: Clock, rng: random.Random):
        self.id = node_id
        self.peers = list(peers)
        self.targets = [p for p in self.peers if p != SOURCE]
        self.cfg = cfg
        self.clock = clock
        self.rng = rng
        self.n = cfg.n
        self.w = cfg.window
        self.is_source = node_id == SOURCE
        self.rr = 0
        self.decoders: dict[int, SgeState] = {}
        self.buffers: dict[int, list[tuple[int, int]]] = {}
        self.received_for: dict[int, int] = {}
        self.have_mask = 0
        self.decoded_mask = 0
        self.decoded_at: dict[int, int] = {}
        self.known: dict[int, int] = {p: 0 for p in self.peers}
        self.records: list[GenerationRecord] = []
        self.degree_counts = [0] * (cfg.n + 1)
        self.packets_received = 0
        self.from_source = 0
        self.redundant = 0
        self.payload_errors = 0
        self._source_gens: dict[int, Generation] = {}
        self._source_pmf = None
        if self.is_source and cfg.scheme == "reference" and cfg.source_degree == "rsd":
            self._source_pmf = rsd(cfg.n, cfg.rsd_c, cfg.rsd_delta).pmf.tolist()

    # source side

    def source_generation(self, gen: int) -> Generation:
        cached = self._source_gens.get(gen)
        if cached is None:
            size = self.cfg.symbol_size if self.cfg.carry_payloads else 0
            cached = generation_content(self.cfg, gen, size)
            self._source_gens = {g: v for g, v in self._source_gens.items() if g >= gen - 1}
            self._source_gens[gen] = cached
        return cached

    def decoding_map(self, now: int) -> DecodingMap:
        base = self.clock.map_base(now)
        mask = -1 if self.is_source else self.decoded_mask
        return DecodingMap.from_mask(mask, base, self.clock.width)

    # scheduling

    def _candidates(self, now: int) -> int:
        if self.is_source:
            gen = self.clock.source_position(now)
            return 0 if gen is None else 1 << gen
        return self.have_mask & self.clock.region_mask(now)

    def schedule_packet(self, now: int) -> Optional[tuple[int, BandPacket]]:
        """Pick a recipient round-robin and build a packet for it, or ``None`` if idle."""
        targets = self.targets
        if not targets:
            return None
        offer = self._candidates(now)
        if not offer:
            return None
        count = len(targets)
        for step in range(count):
            idx = (self.rr + step) % count
            peer = targets[idx]
            wanted = offer & ~self.known[peer]
            if not wanted:
                continue
            gens = []
            while wanted:
                low = wanted & -wanted
                gens.append(low.bit_length() - 1)
                wanted ^= low
            gen = gens[geometric_choice(len(gens), self.cfg.p_gen, self.rng)]
            self.rr = (idx + 1) % count
            return peer, self._make_packet(gen)
        return None

    def _make_packet(self, gen: int) -> BandPacket:
        cfg = self.cfg
        if self.is_source:
            content = self.source_generation(gen)
            if cfg.scheme == "band":
                return encode_source_packet(content, self.w, self.rng)
            return reference_nc_encode(content, self.rng, self._source_pmf)
        size = cfg.symbol_size if cfg.carry_payloads else 0
        if cfg.scheme == "band":
            f, g, y = self.decoders[gen].recombine_bits(self.w, self.rng)
            window = Window(f, self.w, self.n)
        else:
            g, y = combine_subset(self.buffers[gen], self.rng)
            window = Window(0, self.n, self.n)
        return BandPacket(gen, EncodingVector(self.n, g), y.to_bytes(size, "little"), window)

    # receiving

    def handle_packet(self, src: int, dmap: DecodingMap, pkt: BandPacket, now: int) -> str:
        """Absorb one data packet.

        Returns ``"stale"`` (behind the playback position, dropped),
        ``"redundant"`` (generation already decoded), ``"decoded"`` (this
        packet completed the generation) or ``"received"``.
        """
        if src in self.known:
            self.known[src] |= dmap.absolute_mask()
        gen = pkt.generation_id
        lo, hi = self.clock.region(now)
        if gen < lo:
            return "stale"
        if gen > hi or pkt.n != self.n:
            raise MalformedPacketError(f"packet for generation {gen} outside the session window")
        self.packets_received += 1
        if src == SOURCE:
            self.from_source += 1
        g = pkt.coeffs.bits
        self.degree_counts[g.bit_count()] += 1
        if self.decoded_mask >> gen & 1:
            self.redundant += 1
            return "redundant"
        state = self.decoders.get(gen)
        if state is None:
            self._purge(lo)
            size = self.cfg.symbol_size if self.cfg.carry_payloads else 0
            state = self.decoders[gen] = SgeState(self.n, self.w, gen, size, swap=self.cfg.swap)
            if self.cfg.scheme == "reference":
                self.buffers[gen] = []
        y = int.from_bytes(pkt.payload, "little")
        self.received_for[gen] = self.received_for.get(gen, 0) + 1
        state.receive_bits(g, y)
        self.have_mask |= 1 << gen
        if self.cfg.scheme == "reference":
            self.buffers[gen].append((g, y))
        if not state.is_full:
            return "received"
        symbols = state.diagonalize()
        if self.cfg.carry_payloads and symbols != generation_content(self.cfg, gen, self.cfg.symbol_size).symbols:
            self.payload_errors += 1
        self.decoded_mask |= 1 << gen
        self.decoded_at[gen] = now
        self.records.append(
            GenerationRecord(
                self.id, gen, self.received_for[gen],
                state.xor_triangularization, state.xor_diagonalization, now,
            )
        )
        return "decoded"

    def handle_stop(self, peer: int, gen: int) -> None:
        if peer in self.known:
            self.known[peer] |= 1 << gen

    def _purge(self, lo: int) -> None:
        for gen in [g for g in self.decoders if g < lo]:
            del self.decoders[gen]
            self.buffers.pop(gen, None)
            self.received_for.pop(gen, None)
        self.have_mask &= ~((1 << lo) - 1)

    # scoring

    def on_time(self) -> int:
        clock = self.clock
        return sum(1 for g, t in self.decoded_at.items() if g < clock.generations and t <= clock.deadline(g))

    def continuity_index(self) -> float:
        return continuity_index(self.on_time(), self.clock.generations)


def continuity_index(on_time: int, played: int) -> float:
    """Fraction of played generations that were decoded before their deadline."""
    if played <= 0:
        return 0.0
    return on_time / played


def generation_content(cfg: SimConfig, gen: int, symbol_size: int) -> Generation:
    """Deterministic source symbols for generation ``gen`` of a session."""
    rng = make_rng(cfg.seed, 3, gen)
    return Generation(gen, [rng.randbytes(symbol_size) for _ in range(cfg.n)])
