"""Band Codes codec: windowed source encoding, Swap Gaussian Elimination
decoding and band-preserving recombination, plus the fair-coin reference
network-coding scheme used as the comparison arm.

Inner loops work on raw integers (coefficients as bitsets, payloads as
little-endian integers) so that a decoder can absorb ~10^5 packets per
second in pure Python.  Payload bytes are converted at the API boundary.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Optional, Sequence

from .errors import (
    ConsistencyError,
    DimensionError,
    MalformedPacketError,
    NoDataError,
    NotReadyError,
    ParameterError,
    RetryExhaustedError,
    RoutingError,
)
from .gf2 import EncodingVector, Window, highest_bit, iter_bits, lowest_bit

DEFAULT_SYMBOL_SIZE = 1250


def _check_sizes(n: int, w: int) -> None:
    if n < 1:
        raise ParameterError(f"generation size must be positive, got {n}")
    if not 1 <= w <= n:
        raise ParameterError(f"window size W={w} outside [1, N={n}]")


def _to_int(payload: bytes) -> int:
    return int.from_bytes(payload, "little")


def _to_bytes(value: int, size: int) -> bytes:
    return value.to_bytes(size, "little")


@dataclass
class Generation:
    """``N`` equal-length source symbols encoded and decoded as one unit."""

    id: int
    symbols: list[bytes]
    _ints: list[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.symbols) < 2:
            raise ParameterError("a generation needs at least 2 symbols")
        size = len(self.symbols[0])
        if any(len(s) != size for s in self.symbols):
            raise DimensionError("all symbols of a generation must have the same length")
        self.symbols = [bytes(s) for s in self.symbols]
        self._ints = [_to_int(s) for s in self.symbols]

    @property
    def n(self) -> int:
        return len(self.symbols)

    @property
    def symbol_size(self) -> int:
        return len(self.symbols[0])

    @classmethod
    def random(cls, gen_id: int, n: int, symbol_size: int, rng: random.Random) -> "Generation":
        return cls(gen_id, [rng.randbytes(symbol_size) for _ in range(n)])

    def combine(self, bits: int) -> int:
        """XOR of the symbols selected by ``bits``, as an integer."""
        ints = self._ints
        acc = 0
        for i in iter_bits(bits):
            acc ^= ints[i]
        return acc


@dataclass
class BandPacket:
    generation_id: int
    coeffs: EncodingVector
    payload: bytes
    window: Window

    def __post_init__(self) -> None:
        if self.coeffs.n != self.window.n:
            raise DimensionError("coefficient vector and window disagree on N")
        if not self.window.contains(self.coeffs):
            raise MalformedPacketError("coefficient support leaves the declared window")

    @property
    def n(self) -> int:
        return self.coeffs.n

    @property
    def degree(self) -> int:
        return self.coeffs.degree


def draw_leading_edge(n: int, w: int, rng: random.Random) -> int:
    """Sample a window leading edge so every symbol is covered about equally.

    Both boundary positions get mass (W+1)/(2N) and each interior position
    1/N.  Sampling is exact: one integer in ``[0, 2N)`` is mapped onto the
    positions with weights ``W+1, W+1, 2, 2, ...``.
    """
    _check_sizes(n, w)
    last = n - w
    if last == 0:
        return 0
    x = rng.randrange(2 * n)
    if x <= w:
        return 0
    x -= w + 1
    if x <= w:
        return last
    return 1 + (x - w - 1) // 2


def leading_edge_pmf(n: int, w: int) -> list[float]:
    """Probability of each leading edge ``0 .. N-W``."""
    _check_sizes(n, w)
    last = n - w
    if last == 0:
        return [1.0]
    pmf = [1.0 / n] * (last + 1)
    pmf[0] = pmf[last] = (w + 1) / (2 * n)
    return pmf


def band_coefficients(n: int, w: int, rng: random.Random) -> tuple[int, int]:
    """Leading edge and non-zero coefficient bitset of one BP(N, W) vector."""
    f = draw_leading_edge(n, w, rng)
    bits = 0
    while not bits:
        bits = rng.getrandbits(w) << f
    return f, bits


def encode_source_packet(gen: Generation, w: int, rng: random.Random) -> BandPacket:
    """Draw one band packet BP(N, W) from the source symbols."""
    n = gen.n
    f, bits = band_coefficients(n, w, rng)
    return BandPacket(
        gen.id,
        EncodingVector(n, bits),
        _to_bytes(gen.combine(bits), gen.symbol_size),
        Window(f, w, n),
    )


@dataclass
class DecoderReport:
    packets_received: int
    packets_innovative: int
    overhead: float
    xor_triangularization: int
    xor_diagonalization: int

    @property
    def xor_total(self) -> int:
        return self.xor_triangularization + self.xor_diagonalization


class SgeState:
    """Per-generation decoder holding a banded upper-triangular matrix.

    Row ``i`` is either empty (stored as ``0``) or a coefficient bitset whose
    lowest set bit is ``i`` and whose support fits within ``[i, i + W - 1]``.
    ``payloads[i]`` holds the matching combination of source symbols.

    ``swap=False`` turns off the row exchange of the triangularization step
    (ablation only; the row set and rank are unaffected, only which vectors
    are kept).
    """

    def __init__(
        self,
        n: int,
        w: int,
        generation_id: int = 0,
        symbol_size: int = 0,
        swap: bool = True,
    ):
        _check_sizes(n, w)
        self.n = n
        self.w = w
        self.generation_id = generation_id
        self.symbol_size = symbol_size
        self.swap = swap
        self.rows: list[int] = [0] * n
        self.payloads: list[int] = [0] * n
        self.rank = 0
        self.packets_received = 0
        self.xor_triangularization = 0
        self.xor_diagonalization = 0
        self.xor_recombination = 0
        self.decoded = False

    @property
    def is_full(self) -> bool:
        return self.rank == self.n

    def row(self, i: int) -> Optional[EncodingVector]:
        bits = self.rows[i]
        return EncodingVector(self.n, bits) if bits else None

    def receive(self, pkt: BandPacket) -> bool:
        """Feed one packet; return ``True`` if it raised the rank."""
        if pkt.generation_id != self.generation_id:
            raise RoutingError(
                f"packet for generation {pkt.generation_id} sent to decoder {self.generation_id}"
            )
        if pkt.coeffs.n != self.n:
            raise DimensionError(f"packet has N={pkt.coeffs.n}, decoder expects {self.n}")
        if self.symbol_size and len(pkt.payload) != self.symbol_size:
            raise DimensionError(
                f"payload of {len(pkt.payload)} bytes, decoder expects {self.symbol_size}"
            )
        return self.receive_bits(pkt.coeffs.bits, _to_int(pkt.payload))

    def receive_bits(self, g: int, y: int) -> bool:
        """Triangularization step on raw coefficient and payload integers."""
        self.packets_received += 1
        if not g:
            return False
        if highest_bit(g) - lowest_bit(g) >= self.w:
            raise MalformedPacketError(f"coefficient support wider than W={self.w}")
        rows = self.rows
        payloads = self.payloads
        swap = self.swap
        xors = 0
        try:
            while True:
                s = (g & -g).bit_length() - 1
                stored = rows[s]
                if not stored:
                    rows[s] = g
                    payloads[s] = y
                    self.rank += 1
                    return True
                if swap:
                    rows[s], g = g, stored
                    payloads[s], y = y, payloads[s]
                    stored = rows[s]
                if g == stored:
                    if y != payloads[s]:
                        raise ConsistencyError(
                            f"row {s}: equal coefficients with different payloads"
                        )
                    return False
                g ^= stored
                y ^= payloads[s]
                xors += 1
        finally:
            self.xor_triangularization += xors

    def diagonalize(self) -> list[bytes]:
        """Back-substitute from the last row upward and return the source symbols.

        A second call returns the symbols again without further XORs.
        """
        if self.rank < self.n:
            raise NotReadyError(f"rank {self.rank} < N={self.n}")
        rows = self.rows
        payloads = self.payloads
        if not self.decoded:
            xors = 0
            for i in range(self.n - 1, -1, -1):
                row = rows[i]
                y = payloads[i]
                rest = row ^ (1 << i)
                while rest:
                    low = rest & -rest
                    j = low.bit_length() - 1
                    # row j is already the unit vector e_j
                    row ^= rows[j]
                    y ^= payloads[j]
                    rest ^= low
                    xors += 1
                rows[i] = row
                payloads[i] = y
            self.xor_diagonalization += xors
            self.decoded = True
        return [_to_bytes(y, self.symbol_size) for y in payloads]

    def eligible_rows(self, f: int, w: int) -> list[int]:
        """Rows whose leading one is >= f and trailing one <= f + w - 1."""
        last = f + w - 1
        rows = self.rows
        return [i for i in range(f, min(last, self.n - 1) + 1) if rows[i] and rows[i].bit_length() <= last + 1]

    def recombine_bits(self, w: int, rng: random.Random) -> tuple[int, int, int]:
        """Band-preserving recombination on raw integers; returns ``(f, g, y)``."""
        if self.rank == 0:
            raise NoDataError("no stored rows to recombine")
        n = self.n
        _check_sizes(n, w)
        chosen: list[int] = []
        f = 0
        for _ in range(8 * (n - w + 1)):
            f = draw_leading_edge(n, w, rng)
            chosen = self.eligible_rows(f, w)
            if chosen:
                break
        else:
            edges = [e for e in range(n - w + 1) if self.eligible_rows(e, w)]
            if not edges:
                raise RetryExhaustedError(f"no stored row fits any window of size {w}")
            f = rng.choice(edges)
            chosen = self.eligible_rows(f, w)
        coins = 0
        while not coins:
            coins = rng.getrandbits(len(chosen))
        rows = self.rows
        payloads = self.payloads
        g = y = 0
        picked = 0
        for k in iter_bits(coins):
            i = chosen[k]
            g ^= rows[i]
            y ^= payloads[i]
            picked += 1
        self.xor_recombination += picked - 1
        return f, g, y

    def recombine(self, w: int, rng: random.Random) -> BandPacket:
        f, g, y = self.recombine_bits(w, rng)
        return BandPacket(
            self.generation_id,
            EncodingVector(self.n, g),
            _to_bytes(y, self.symbol_size),
            Window(f, w, self.n),
        )

    def check_structure(self) -> None:
        """Raise ``AssertionError`` unless every row respects the band layout."""
        count = 0
        for i, row in enumerate(self.rows):
            if not row:
                continue
            count += 1
            assert lowest_bit(row) == i, f"row {i} has leading one at {lowest_bit(row)}"
            assert highest_bit(row) <= i + self.w - 1, f"row {i} exceeds band width {self.w}"
        assert count == self.rank, f"{count} non-empty rows but rank {self.rank}"

    def report(self) -> DecoderReport:
        received = self.packets_received
        return DecoderReport(
            packets_received=received,
            packets_innovative=self.rank,
            overhead=received / self.n - 1.0 if self.is_full else float("nan"),
            xor_triangularization=self.xor_triangularization,
            xor_diagonalization=self.xor_diagonalization,
        )


def sge_receive(state: SgeState, pkt: BandPacket) -> bool:
    return state.receive(pkt)


def diagonalize(state: SgeState) -> list[bytes]:
    return state.diagonalize()


def recombine(state: SgeState, w: int, rng: random.Random) -> BandPacket:
    return state.recombine(w, rng)


# Reference network coding (fair-coin coefficients over all N positions)


def sample_degree(pmf: Sequence[float], rng: random.Random) -> int:
    """Draw a degree from ``pmf`` (index = degree), rejecting degree 0."""
    cum = list(accumulate(float(p) for p in pmf))
    if cum[-1] - cum[0] <= 0:
        raise ParameterError("degree distribution puts no mass on positive degrees")
    while True:
        d = rng.choices(range(len(cum)), cum_weights=cum)[0]
        if d:
            return d


def reference_coefficients(n: int, rng: random.Random, degree_pmf: Optional[Sequence[float]] = None) -> int:
    if degree_pmf is None:
        bits = 0
        while not bits:
            bits = rng.getrandbits(n)
        return bits
    if len(degree_pmf) != n + 1:
        raise DimensionError(f"degree distribution has {len(degree_pmf)} entries, expected {n + 1}")
    d = sample_degree(degree_pmf, rng)
    bits = 0
    for i in rng.sample(range(n), d):
        bits |= 1 << i
    return bits


def reference_nc_encode(
    gen: Generation, rng: random.Random, degree_pmf: Optional[Sequence[float]] = None
) -> BandPacket:
    """Source packet of the reference scheme.

    With no ``degree_pmf`` every coefficient is a fair coin (binomial
    degree).  Otherwise the degree is drawn from ``degree_pmf`` and that many
    distinct positions are set, as in LT-style sources.
    """
    n = gen.n
    bits = reference_coefficients(n, rng, degree_pmf)
    return BandPacket(
        gen.id, EncodingVector(n, bits), _to_bytes(gen.combine(bits), gen.symbol_size), Window(0, n, n)
    )


def combine_subset(coded: Sequence[tuple[int, int]], rng: random.Random, attempts: int = 64) -> tuple[int, int]:
    """Fair-coin combination of buffered ``(coeffs, payload)`` pairs, non-zero result."""
    if not coded:
        raise NoDataError("empty packet buffer")
    k = len(coded)
    for _ in range(attempts):
        coins = rng.getrandbits(k)
        g = y = 0
        for idx in iter_bits(coins):
            cg, cy = coded[idx]
            g ^= cg
            y ^= cy
        if g:
            return g, y
    raise RetryExhaustedError(f"{attempts} fair-coin draws all produced the zero vector")


def reference_nc_recombine(packets: Sequence[BandPacket], rng: random.Random) -> BandPacket:
    """Recoder of the reference scheme: XOR of a fair-coin subset of ``packets``."""
    if not packets:
        raise NoDataError("empty packet buffer")
    first = packets[0]
    n = first.n
    size = len(first.payload)
    for p in packets:
        if p.generation_id != first.generation_id:
            raise RoutingError("buffer mixes generations")
        if p.n != n or len(p.payload) != size:
            raise DimensionError("buffer mixes packet shapes")
    g, y = combine_subset([(p.coeffs.bits, _to_int(p.payload)) for p in packets], rng)
    return BandPacket(first.generation_id, EncodingVector(n, g), _to_bytes(y, size), Window(0, n, n))
