"""Band Codes: network coding over GF(2) with a controllable decoding cost."""

from .codec import (
    BandPacket,
    DecoderReport,
    Generation,
    SgeState,
    diagonalize,
    draw_leading_edge,
    encode_source_packet,
    recombine,
    reference_nc_encode,
    reference_nc_recombine,
    sge_receive,
)
from .complexity import ComplexityPrediction, predict, xors_per_megabit
from .degree import (
    DegreeDistribution,
    monte_carlo_evolution,
    omega_infinity,
    omega_step,
    rsd,
    s_kernel,
    tv_distance,
)
from .gf2 import EncodingVector, Window, leading_one, trailing_one, windows_overlap, xor_assign

__version__ = "0.1.0"

__all__ = [
    "BandPacket",
    "ComplexityPrediction",
    "DecoderReport",
    "DegreeDistribution",
    "EncodingVector",
    "Generation",
    "SgeState",
    "Window",
    "diagonalize",
    "draw_leading_edge",
    "encode_source_packet",
    "leading_one",
    "monte_carlo_evolution",
    "omega_infinity",
    "omega_step",
    "predict",
    "recombine",
    "reference_nc_encode",
    "reference_nc_recombine",
    "rsd",
    "s_kernel",
    "sge_receive",
    "trailing_one",
    "tv_distance",
    "windows_overlap",
    "xor_assign",
    "xors_per_megabit",
]
