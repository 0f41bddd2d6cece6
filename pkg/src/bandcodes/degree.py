"""Packet-degree models: robust soliton source, the pairwise-XOR degree
recursion with its hypergeometric kernel, the binomial limit, and a Monte
Carlo cross-check.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import DimensionError, ParameterError

EXACT_LIMIT = 64
MASS_TOL = 1e-12


@dataclass(frozen=True)
class DegreeDistribution:
    """Probability mass over degrees ``0 .. N``."""

    pmf: np.ndarray

    def __post_init__(self) -> None:
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size < 2:
            raise DimensionError("pmf must be a vector over degrees 0..N with N >= 1")
        if np.any(pmf < 0) or not math.isclose(pmf.sum(), 1.0, abs_tol=1e-9):
            raise ParameterError(f"not a probability vector (sum={pmf.sum()!r})")
        object.__setattr__(self, "pmf", pmf)

    @property
    def n(self) -> int:
        return self.pmf.size - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(self.pmf.size), self.pmf))

    def __getitem__(self, d: int) -> float:
        return float(self.pmf[d])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["degree", "probability"])
        for d, p in enumerate(self.pmf):
            writer.writerow([d, repr(float(p))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DegreeDistribution":
        rows = list(csv.DictReader(io.StringIO(text)))
        pmf = np.zeros(len(rows))
        for row in rows:
            pmf[int(row["degree"])] = float(row["probability"])
        return cls(pmf)

    @classmethod
    def from_counts(cls, counts: Sequence[int] | np.ndarray) -> "DegreeDistribution":
        c = np.asarray(counts, dtype=float)
        total = c.sum()
        if total <= 0:
            raise ParameterError("no samples")
        return cls(c / total)


def tv_distance(p: Sequence[float] | np.ndarray | DegreeDistribution,
                q: Sequence[float] | np.ndarray | DegreeDistribution) -> float:
    """Total variation distance; the shorter vector is zero-padded."""
    a = np.asarray(p.pmf if isinstance(p, DegreeDistribution) else p, dtype=float)
    b = np.asarray(q.pmf if isinstance(q, DegreeDistribution) else q, dtype=float)
    size = max(a.size, b.size)
    a = np.pad(a, (0, size - a.size))
    b = np.pad(b, (0, size - b.size))
    return 0.5 * float(np.abs(a - b).sum())


def rsd(n: int, c: float = 0.1, delta: float = 0.5) -> DegreeDistribution:
    """Robust soliton distribution over degrees ``0 .. n`` (degree 0 has no mass).

    ``S = c ln(n/delta) sqrt(n)``; the spike sits at degree ``ceil(n/S)``.
    """
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if c <= 0 or not 0 < delta < 1:
        raise ParameterError(f"need c > 0 and 0 < delta < 1, got c={c}, delta={delta}")
    s = c * math.log(n / delta) * math.sqrt(n)
    spike = min(n, math.ceil(n / s))
    rho = np.zeros(n + 1)
    rho[1] = 1.0 / n
    d = np.arange(2, n + 1)
    rho[2:] = 1.0 / (d * (d - 1))
    tau = np.zeros(n + 1)
    for i in range(1, spike):
        tau[i] = s / (i * n)
    tau[spike] = max(0.0, s * math.log(s / delta) / n)
    mu = rho + tau
    return DegreeDistribution(mu / mu.sum())


def rsd_spike(n: int, c: float = 0.1, delta: float = 0.5) -> int:
    return min(n, math.ceil(n / (c * math.log(n / delta) * math.sqrt(n))))


def binomial(n: int) -> DegreeDistribution:
    """Binomial(n, 1/2) computed from exact integer binomials."""
    total = 1 << n
    return DegreeDistribution(np.array([math.comb(n, i) / total for i in range(n + 1)]))


def omega_infinity(n: int) -> DegreeDistribution:
    """Limit of the degree recursion: C(n, i) / 2^n."""
    return binomial(n)


def s_kernel(n: int, d1: int, d2: int, dr: int) -> float:
    """Probability that XOR of random-support vectors of degrees d1, d2 has degree dr.

    The overlap size follows Hypergeometric(n, d1, d2); the result degree is
    ``d1 + d2 - 2 * overlap``.
    """
    for d in (d1, d2, dr):
        if not 0 <= d <= n:
            raise ParameterError(f"degree {d} outside [0, {n}]")
    twice = d1 + d2 - dr
    if twice < 0 or twice % 2:
        return 0.0
    x = twice // 2
    if x > min(d1, d2) or d2 - x > n - d1:
        return 0.0
    if n <= EXACT_LIMIT:
        return math.comb(d1, x) * math.comb(n - d1, d2 - x) / math.comb(n, d2)
    return math.exp(
        _log_comb(d1, x) + _log_comb(n - d1, d2 - x) - _log_comb(n, d2)
    )


def _log_comb(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


@lru_cache(maxsize=8)
def _hypergeom_table(n: int) -> np.ndarray:
    """``H[d1, d2, x] = P(overlap = x)`` for all degree pairs, zero off-support."""
    size = n + 1
    table = np.zeros((size, size, size))
    if n <= EXACT_LIMIT:
        combs = [[math.comb(a, b) for b in range(size)] for a in range(size)]
        for d1 in range(size):
            for d2 in range(size):
                denom = combs[n][d2]
                for x in range(max(0, d1 + d2 - n), min(d1, d2) + 1):
                    table[d1, d2, x] = combs[d1][x] * combs[n - d1][d2 - x] / denom
        return table
    lf = gammaln(np.arange(size) + 1.0)
    d2 = np.arange(size)[:, None]
    x = np.arange(size)[None, :]
    for d1 in range(size):
        valid = (x <= d1) & (x <= d2) & (d2 - x <= n - d1)
        a = np.where(valid, x, 0)
        b = np.where(valid, d2 - x, 0)
        logp = (
            lf[d1] - lf[a] - lf[np.maximum(d1 - a, 0)]
            + lf[n - d1] - lf[b] - lf[np.maximum(n - d1 - b, 0)]
            - (lf[n] - lf[d2] - lf[n - d2])
        )
        table[d1] = np.where(valid, np.exp(logp), 0.0)
    return table


def omega_step(omega: DegreeDistribution | Sequence[float]) -> DegreeDistribution:
    """Degree distribution of the XOR of two independent packets drawn from ``omega``."""
    pmf = np.asarray(omega.pmf if isinstance(omega, DegreeDistribution) else omega, dtype=float)
    n = pmf.size - 1
    table = _hypergeom_table(n)
    size = n + 1
    out = np.zeros(size)
    d2 = np.arange(size)[:, None]
    x = np.arange(size)[None, :]
    for d1 in range(size):
        if pmf[d1] == 0.0:
            continue
        dr = d1 + d2 - 2 * x
        weights = table[d1] * pmf[d1] * pmf[:, None]
        mask = weights > 0
        np.add.at(out, dr[mask], weights[mask])
    out = np.clip(out, 0.0, None)
    return DegreeDistribution(out / out.sum())


def omega_iterates(omega0: DegreeDistribution, rounds: int) -> list[DegreeDistribution]:
    """``[omega0, omega1, ..., omega_rounds]``."""
    out = [omega0]
    for _ in range(rounds):
        out.append(omega_step(out[-1]))
    return out


def _random_vector(n: int, d: int, rng: random.Random) -> int:
    bits = 0
    for i in rng.sample(range(n), d):
        bits |= 1 << i
    return bits


def monte_carlo_evolution(
    omega0: DegreeDistribution,
    rounds: int,
    samples: int,
    rng: random.Random,
    variant: str = "pairwise",
    buffer_size: int = 8,
) -> list[DegreeDistribution]:
    """Empirical degree histograms of a pool of vectors under repeated recombination.

    ``variant="pairwise"`` replaces every pool member by the XOR of two
    distinct members drawn uniformly (the model behind :func:`omega_step`).
    ``variant="subset"`` instead XORs a fair-coin subset of ``buffer_size``
    members, as a recoder with a buffer of that size would; the all-zero
    subset is redrawn.
    """
    if samples < 1000:
        raise ParameterError(f"need at least 1000 samples, got {samples}")
    if variant not in ("pairwise", "subset"):
        raise ParameterError(f"unknown variant {variant!r}")
    n = omega0.n
    cum = np.cumsum(omega0.pmf).tolist()
    degrees = rng.choices(range(n + 1), cum_weights=cum, k=samples)
    pool = [_random_vector(n, d, rng) for d in degrees]
    hists = [_histogram(pool, n)]
    randrange = rng.randrange
    for _ in range(rounds):
        if variant == "pairwise":
            nxt = []
            for _ in range(samples):
                a = randrange(samples)
                b = randrange(samples - 1)
                if b >= a:
                    b += 1
                nxt.append(pool[a] ^ pool[b])
        else:
            nxt = []
            for _ in range(samples):
                members = [pool[randrange(samples)] for _ in range(buffer_size)]
                coins = 0
                while not coins:
                    coins = rng.getrandbits(buffer_size)
                v = 0
                for k in range(buffer_size):
                    if coins >> k & 1:
                        v ^= members[k]
                nxt.append(v)
        pool = nxt
        hists.append(_histogram(pool, n))
    return hists


def _histogram(pool: Iterable[int], n: int) -> DegreeDistribution:
    counts = np.bincount([v.bit_count() for v in pool], minlength=n + 1)
    return DegreeDistribution.from_counts(counts)
