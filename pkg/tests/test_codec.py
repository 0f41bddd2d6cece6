from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from bandcodes.codec import (
    BandPacket,
    Generation,
    SgeState,
    band_coefficients,
    diagonalize,
    draw_leading_edge,
    encode_source_packet,
    leading_edge_pmf,
    recombine,
    reference_nc_encode,
    reference_nc_recombine,
    sge_receive,
)
from bandcodes.degree import binomial, rsd, tv_distance
from bandcodes.errors import (
    ConsistencyError,
    DimensionError,
    MalformedPacketError,
    NoDataError,
    NotReadyError,
    ParameterError,
    RoutingError,
)
from bandcodes.gf2 import EncodingVector, Window
from bandcodes.rng import make_rng
from oracles import binomial_pmf, dense_rank, hd_masses


class _Enumerate(random.Random):
    """Feeds ``randrange`` a fixed value so every branch of the sampler can be hit."""

    def __init__(self, value: int):
        super().__init__(0)
        self.value = value

    def randrange(self, *args, **kwargs):  # type: ignore[override]
        return self.value


def _gof_pvalue(counts: np.ndarray, probs: np.ndarray) -> float:
    """Chi-square p-value after pooling bins with fewer than 5 expected hits."""
    total = counts.sum()
    expected = probs / probs.sum() * total
    obs_bins, exp_bins = [], []
    o = e = 0.0
    for c, x in zip(counts, expected):
        o += c
        e += x
        if e >= 5:
            obs_bins.append(o)
            exp_bins.append(e)
            o = e = 0.0
    obs_bins[-1] += o
    exp_bins[-1] += e
    return float(stats.chisquare(obs_bins, exp_bins).pvalue)


# leading-edge distribution


def test_leading_edge_masses_small():
    pmf = leading_edge_pmf(8, 3)
    assert pmf == pytest.approx([0.25, 0.125, 0.125, 0.125, 0.125, 0.25])
    assert sum(pmf) == pytest.approx(1.0)
    assert [Fraction(p).limit_denominator(1000) for p in pmf] == hd_masses(8, 3)


def test_leading_edge_masses_large():
    pmf = leading_edge_pmf(100, 50)
    assert pmf[0] == pytest.approx(0.255) and pmf[-1] == pytest.approx(0.255)
    assert sum(pmf) == pytest.approx(1.0)


@pytest.mark.parametrize("n,w", [(8, 3), (10, 1), (10, 9), (100, 50), (7, 6)])
def test_leading_edge_sampler_is_exact(n, w):
    counts = [0] * (n - w + 1)
    for x in range(2 * n):
        counts[draw_leading_edge(n, w, _Enumerate(x))] += 1
    assert [Fraction(c, 2 * n) for c in counts] == hd_masses(n, w)


def test_leading_edge_full_window():
    rng = make_rng(1)
    assert {draw_leading_edge(12, 12, rng) for _ in range(100)} == {0}


def test_leading_edge_rejects_bad_window():
    with pytest.raises(ParameterError):
        draw_leading_edge(8, 9, make_rng(0))
    with pytest.raises(ParameterError):
        draw_leading_edge(8, 0, make_rng(0))


def test_leading_edge_goodness_of_fit():
    rng = make_rng(2)
    n, w = 20, 6
    counts = np.bincount([draw_leading_edge(n, w, rng) for _ in range(50_000)], minlength=n - w + 1)
    assert _gof_pvalue(counts, np.array(leading_edge_pmf(n, w))) > 0.01


# source encoder


def test_encoded_packets_are_band_packets():
    rng = make_rng(3)
    gen = Generation.random(7, 30, 16, rng)
    for _ in range(500):
        pkt = encode_source_packet(gen, 9, rng)
        assert pkt.generation_id == 7
        assert pkt.window.size == 9 and pkt.window.contains(pkt.coeffs)
        assert pkt.degree > 0
        assert pkt.payload == gen.combine(pkt.coeffs.bits).to_bytes(16, "little")


def test_encoder_mean_degree_full_window():
    rng = make_rng(4)
    degrees = [band_coefficients(100, 100, rng)[1].bit_count() for _ in range(20_000)]
    assert np.mean(degrees) == pytest.approx(50, abs=0.2)


def test_encoder_degree_goodness_of_fit():
    rng = make_rng(5)
    w = 40
    counts = np.bincount([band_coefficients(100, w, rng)[1].bit_count() for _ in range(100_000)], minlength=w + 1)
    ref = np.array([float(p) for p in binomial_pmf(w)])
    ref[0] = 0.0  # zero patterns are redrawn
    assert _gof_pvalue(counts, ref) > 0.01
    assert tv_distance(counts / counts.sum(), binomial(w)) < 0.01


def test_band_packet_rejects_support_outside_window():
    with pytest.raises(MalformedPacketError):
        BandPacket(0, EncodingVector(8, 0b1001), b"", Window(0, 3, 8))


# SGE decoding


def _packets(n, w, count, rng):
    return [band_coefficients(n, w, rng)[1] for _ in range(count)]


def test_first_packet_is_stored_without_xors():
    s = SgeState(16, 4)
    assert s.receive_bits(0b0110 << 3, 1)
    assert s.rows[4] == 0b0110 << 3
    assert s.rank == 1 and s.xor_triangularization == 0


def test_duplicate_and_zero_packets():
    s = SgeState(16, 4)
    assert s.receive_bits(0b101 << 2, 9)
    assert not s.receive_bits(0b101 << 2, 9)
    assert not s.receive_bits(0, 0)
    assert s.rank == 1 and s.packets_received == 3


def test_consistency_error_on_payload_mismatch():
    s = SgeState(16, 4)
    s.receive_bits(0b11, 5)
    with pytest.raises(ConsistencyError):
        s.receive_bits(0b11, 6)


def test_routing_dimension_and_band_errors():
    rng = make_rng(6)
    gen = Generation.random(1, 16, 4, rng)
    s = SgeState(16, 4, generation_id=2, symbol_size=4)
    with pytest.raises(RoutingError):
        s.receive(encode_source_packet(gen, 4, rng))
    other = Generation.random(2, 17, 4, rng)
    with pytest.raises(DimensionError):
        s.receive(encode_source_packet(other, 4, rng))
    wrong_size = Generation.random(2, 16, 3, rng)
    with pytest.raises(DimensionError):
        s.receive(encode_source_packet(wrong_size, 4, rng))
    with pytest.raises(MalformedPacketError):
        s.receive_bits(0b10001, 0)


def test_support_width_is_checked_not_declared_window():
    s = SgeState(16, 4)
    # declared window is irrelevant; support spans 4 columns
    assert s.receive(BandPacket(0, EncodingVector(16, 0b1001 << 5), b"", Window(0, 16, 16)))


def test_rank_tracks_dense_oracle_n16():
    rng = make_rng(7)
    n, w = 16, 5
    s = SgeState(n, w)
    seen = []
    while s.rank < n:
        g = band_coefficients(n, w, rng)[1]
        seen.append(g)
        s.receive_bits(g, 0)
        s.check_structure()
        assert s.rank == dense_rank(seen, n)
    assert all(s.rows[i] >> i & 1 for i in range(n))
    assert all(s.rows[i].bit_length() <= i + w for i in range(n))


@given(st.integers(2, 32), st.data())
def test_rank_matches_oracle_on_every_prefix(n, data):
    w = data.draw(st.integers(1, n))
    seed = data.draw(st.integers(0, 2**32))
    swap = data.draw(st.booleans())
    rng = make_rng(seed)
    s = SgeState(n, w, swap=swap)
    seen = []
    for g in _packets(n, w, n + 4, rng):
        seen.append(g)
        s.receive_bits(g, 0)
        s.check_structure()
        assert s.rank == dense_rank(seen, n)


@given(st.integers(4, 64), st.data())
def test_roundtrip_recovers_symbols(n, data):
    w = data.draw(st.integers(2, n))
    rng = make_rng(data.draw(st.integers(0, 2**32)))
    gen = Generation.random(0, n, 8, rng)
    s = SgeState(n, w, symbol_size=8)
    while not s.is_full:
        sge_receive(s, encode_source_packet(gen, w, rng))
    assert diagonalize(s) == gen.symbols
    assert all(s.rows[i] == 1 << i for i in range(n))


def test_diagonalize_requires_full_rank():
    s = SgeState(8, 3)
    s.receive_bits(0b11, 0)
    with pytest.raises(NotReadyError):
        s.diagonalize()


def test_systematic_delivery_needs_no_diagonalization():
    n = 10
    rng = make_rng(8)
    gen = Generation.random(0, n, 4, rng)
    s = SgeState(n, 3, symbol_size=4)
    for i in range(n):
        s.receive(BandPacket(0, EncodingVector.unit(n, i), gen.symbols[i], Window(min(i, n - 3), 3, n)))
    assert s.diagonalize() == gen.symbols
    assert s.xor_diagonalization == 0 and s.xor_triangularization == 0


def test_diagonalize_is_idempotent():
    rng = make_rng(9)
    s = SgeState(20, 20)
    while not s.is_full:
        s.receive_bits(band_coefficients(20, 20, rng)[1], 0)
    s.diagonalize()
    count = s.xor_diagonalization
    s.diagonalize()
    assert s.xor_diagonalization == count and s.decoded


def test_diagonalization_count_full_window():
    rng = make_rng(10)
    counts = []
    for _ in range(60):
        s = SgeState(100, 100)
        while not s.is_full:
            s.receive_bits(band_coefficients(100, 100, rng)[1], 0)
        s.diagonalize()
        counts.append(s.xor_diagonalization)
    assert np.mean(counts) == pytest.approx(2499.75, rel=0.10)


def test_xor_counts_are_deterministic():
    def run(seed):
        rng = make_rng(seed)
        s = SgeState(40, 12)
        while not s.is_full:
            s.receive_bits(band_coefficients(40, 12, rng)[1], 0)
        s.diagonalize()
        return s.report()

    assert run(11) == run(11)


def test_swap_flag_changes_rows_not_rank():
    rng = make_rng(12)
    pkts = _packets(30, 8, 40, rng)
    a, b = SgeState(30, 8), SgeState(30, 8, swap=False)
    for g in pkts:
        a.receive_bits(g, 0)
        b.receive_bits(g, 0)
    assert a.rank == b.rank == dense_rank(pkts, 30)
    a.check_structure()
    b.check_structure()


def test_report_fields():
    rng = make_rng(13)
    s = SgeState(20, 6)
    while not s.is_full:
        s.receive_bits(band_coefficients(20, 6, rng)[1], 0)
    s.diagonalize()
    rep = s.report()
    assert rep.packets_innovative == 20
    assert rep.overhead == pytest.approx(rep.packets_received / 20 - 1) and rep.overhead >= 0
    assert rep.xor_total == s.xor_triangularization + s.xor_diagonalization


# recombination


def test_recombine_from_empty_state():
    with pytest.raises(NoDataError):
        SgeState(8, 3).recombine_bits(3, make_rng(0))


def test_recombine_single_row():
    rng = make_rng(14)
    s = SgeState(16, 5)
    s.receive_bits(0b10011 << 6, 77)
    for _ in range(50):
        f, g, y = s.recombine_bits(5, rng)
        assert (g, y) == (0b10011 << 6, 77)
        assert Window(f, 5, 16).contains(g)


def test_fig3_eligibility():
    s = SgeState(8, 5)
    s.receive_bits(0b00101, 0)  # row 0: leading one before f^r
    s.receive_bits(0b101010, 0)  # row 1: ones at 1, 3, 5
    s.receive_bits(0b100100, 0)  # row 2: declared window [2, 6], trailing one at 5
    s.receive_bits(0b10001000, 0)  # row 3: trailing one at 7, past l^r
    assert s.rank == 4
    assert s.eligible_rows(1, 5) == [1, 2]


def test_recombine_fallback_scan():
    s = SgeState(64, 2)
    s.receive_bits(1 << 40, 0)
    # every HD draw lands on edge 0, which admits nothing
    f, g, _ = s.recombine_bits(2, _Enumerate(0))
    assert g == 1 << 40 and f in (39, 40)


def test_recombined_packets_are_consistent_band_packets():
    rng = make_rng(15)
    n, w = 40, 10
    gen = Generation.random(3, n, 8, rng)
    s = SgeState(n, w, generation_id=3, symbol_size=8)
    for _ in range(25):
        s.receive(encode_source_packet(gen, w, rng))
    for _ in range(300):
        pkt = recombine(s, w, rng)
        assert pkt.window.contains(pkt.coeffs)
        assert pkt.payload == gen.combine(pkt.coeffs.bits).to_bytes(8, "little")


def test_recombination_chain_decodes():
    rng = make_rng(16)
    n, w = 32, 8
    gen = Generation.random(0, n, 8, rng)
    relay = SgeState(n, w, symbol_size=8)
    sink = SgeState(n, w, symbol_size=8)
    while not sink.is_full:
        relay.receive(encode_source_packet(gen, w, rng))
        sink.receive(recombine(relay, w, rng))
    assert sink.diagonalize() == gen.symbols


def test_recombined_degree_from_decoded_state():
    rng = make_rng(17)
    n, w = 100, 40
    s = SgeState(n, w)
    while not s.is_full:
        s.receive_bits(band_coefficients(n, w, rng)[1], 0)
    s.diagonalize()
    counts = np.bincount([s.recombine_bits(w, rng)[1].bit_count() for _ in range(100_000)], minlength=w + 1)
    assert tv_distance(counts / counts.sum(), binomial(w)) < 0.05
    ref = binomial(w).pmf.copy()
    ref[0] = 0.0
    assert _gof_pvalue(counts, ref) > 0.01


# reference network coding


def test_reference_source_degree():
    rng = make_rng(18)
    gen = Generation.random(0, 100, 0, rng)
    degrees = [reference_nc_encode(gen, rng).degree for _ in range(10_000)]
    assert np.mean(degrees) == pytest.approx(50, abs=0.3)


def test_reference_rsd_source():
    rng = make_rng(19)
    gen = Generation.random(0, 50, 0, rng)
    pmf = rsd(50).pmf
    degrees = np.bincount([reference_nc_encode(gen, rng, pmf).degree for _ in range(20_000)], minlength=51)
    assert tv_distance(degrees / degrees.sum(), pmf) < 0.03
    with pytest.raises(DimensionError):
        reference_nc_encode(gen, rng, pmf[:-1])


def test_reference_recombine():
    rng = make_rng(20)
    gen = Generation.random(4, 20, 8, rng)
    buffer = [reference_nc_encode(gen, rng) for _ in range(5)]
    for _ in range(100):
        pkt = reference_nc_recombine(buffer, rng)
        assert pkt.generation_id == 4 and pkt.degree > 0
        assert pkt.payload == gen.combine(pkt.coeffs.bits).to_bytes(8, "little")
    with pytest.raises(NoDataError):
        reference_nc_recombine([], rng)
    other = reference_nc_encode(Generation.random(5, 20, 8, rng), rng)
    with pytest.raises(RoutingError):
        reference_nc_recombine([buffer[0], other], rng)


def test_generation_validation():
    with pytest.raises(ParameterError):
        Generation(0, [b"a"])
    with pytest.raises(DimensionError):
        Generation(0, [b"a", b"bc"])
