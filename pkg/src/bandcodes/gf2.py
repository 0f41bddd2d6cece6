"""GF(2) vectors and encoding windows.

Encoding vectors are stored as Python integers: coefficient ``g_i`` is bit
``i`` (LSB-first), so word ``k`` of the packed form holds coefficients
``64k .. 64k+63``.  The codec works on the raw integers in its inner loops;
:class:`EncodingVector` is the checked, length-aware wrapper used at API
boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .errors import DimensionError, ParameterError

WORD_BITS = 64


popcount = int.bit_count


def lowest_bit(x: int) -> int:
    """Index of the lowest set bit of ``x`` (``x`` must be non-zero)."""
    return (x & -x).bit_length() - 1


def highest_bit(x: int) -> int:
    return x.bit_length() - 1


def iter_bits(x: int) -> Iterator[int]:
    """Yield set-bit indices of ``x`` in increasing order."""
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


class EncodingVector:
    """Length-``n`` coefficient vector over GF(2).

    The length is fixed at construction.  The only mutating operation is
    :meth:`ixor` (and the ``^=`` operator); everything else returns new
    objects.
    """

    __slots__ = ("_bits", "_n")

    def __init__(self, n: int, bits: int = 0):
        if n < 1:
            raise ParameterError(f"vector length must be positive, got {n}")
        if bits < 0 or bits >> n:
            raise DimensionError(f"bit pattern does not fit in {n} coefficients")
        self._n = n
        self._bits = bits

    @classmethod
    def from_list(cls, coeffs: Sequence[int]) -> "EncodingVector":
        bits = 0
        for i, c in enumerate(coeffs):
            if c not in (0, 1):
                raise ParameterError(f"coefficient {i} is {c!r}, expected 0 or 1")
            bits |= c << i
        return cls(len(coeffs), bits)

    @classmethod
    def from_string(cls, text: str) -> "EncodingVector":
        """Parse ``"00101000"`` with the first character as ``g_0``."""
        return cls.from_list([int(ch) for ch in text])

    @classmethod
    def unit(cls, n: int, i: int) -> "EncodingVector":
        return cls(n, 1 << i)

    @property
    def n(self) -> int:
        return self._n

    @property
    def bits(self) -> int:
        return self._bits

    def __len__(self) -> int:
        return self._n

    def __getitem__(self, i: int) -> int:
        if not -self._n <= i < self._n:
            raise IndexError(i)
        return (self._bits >> (i % self._n)) & 1

    def to_list(self) -> list[int]:
        return [(self._bits >> i) & 1 for i in range(self._n)]

    def __str__(self) -> str:
        return "".join(str(b) for b in self.to_list())

    def __repr__(self) -> str:
        return f"EncodingVector({self._n}, {str(self)!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EncodingVector):
            return NotImplemented
        return self._n == other._n and self._bits == other._bits

    def __hash__(self) -> int:
        return hash((self._n, self._bits))

    def __bool__(self) -> bool:
        return self._bits != 0

    @property
    def degree(self) -> int:
        return popcount(self._bits)

    def support(self) -> list[int]:
        return list(iter_bits(self._bits))

    def leading_one(self) -> Optional[int]:
        return lowest_bit(self._bits) if self._bits else None

    def trailing_one(self) -> Optional[int]:
        return highest_bit(self._bits) if self._bits else None

    def _check(self, other: "EncodingVector") -> None:
        if self._n != other._n:
            raise DimensionError(f"length mismatch: {self._n} vs {other._n}")

    def __xor__(self, other: "EncodingVector") -> "EncodingVector":
        self._check(other)
        return EncodingVector(self._n, self._bits ^ other._bits)

    def ixor(self, other: "EncodingVector") -> "EncodingVector":
        self._check(other)
        self._bits ^= other._bits
        return self

    __ixor__ = ixor

    def copy(self) -> "EncodingVector":
        return EncodingVector(self._n, self._bits)

    def to_words(self, word_bits: int = WORD_BITS) -> list[int]:
        """Packed little-endian words: bit ``i`` lives in word ``i // word_bits``."""
        mask = (1 << word_bits) - 1
        count = -(-self._n // word_bits)
        return [(self._bits >> (k * word_bits)) & mask for k in range(count)]

    @classmethod
    def from_words(cls, n: int, words: Sequence[int], word_bits: int = WORD_BITS) -> "EncodingVector":
        bits = 0
        for k, w in enumerate(words):
            bits |= int(w) << (k * word_bits)
        return cls(n, bits)


def xor_assign(a: EncodingVector, b: EncodingVector) -> EncodingVector:
    """XOR ``b`` into ``a`` in place and return ``a``."""
    return a.ixor(b)


def leading_one(v: EncodingVector) -> Optional[int]:
    return v.leading_one()


def trailing_one(v: EncodingVector) -> Optional[int]:
    return v.trailing_one()


@dataclass(frozen=True)
class Window:
    """Contiguous coefficient range ``[f, f + size - 1]`` inside a length-``n`` vector."""

    f: int
    size: int
    n: int

    def __post_init__(self) -> None:
        if not 1 <= self.size <= self.n:
            raise ParameterError(f"window size {self.size} outside [1, {self.n}]")
        if not 0 <= self.f <= self.n - self.size:
            raise ParameterError(
                f"leading edge {self.f} outside [0, {self.n - self.size}] for W={self.size}, N={self.n}"
            )

    @property
    def l(self) -> int:  # noqa: E743
        return self.f + self.size - 1

    @property
    def mask(self) -> int:
        return ((1 << self.size) - 1) << self.f

    def contains(self, v: EncodingVector | int) -> bool:
        bits = v.bits if isinstance(v, EncodingVector) else v
        return bits & ~self.mask == 0


def windows_overlap(w1: Window, w2: Window) -> bool:
    if w1.n != w2.n:
        raise DimensionError("windows belong to different generation sizes")
    if w2.f < w1.f:
        w1, w2 = w2, w1
    return w2.f <= w1.l


def union_window(w1: Window, w2: Window) -> Window:
    f = min(w1.f, w2.f)
    return Window(f, max(w1.l, w2.l) - f + 1, w1.n)
