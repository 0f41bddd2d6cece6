"""Discrete-event simulation of push-based P2P streaming with network coding."""

from .config import SimConfig, load_overrides
from .decoding_map import DecodingMap, decode_frame, encode_frame
from .node import Clock, PeerNode, continuity_index, geometric_choice, geometric_weights
from .overlay import Overlay, build_overlay
from .session import LinkStats, Session, SimMetrics, ci95, run_session

__all__ = [
    "Clock",
    "DecodingMap",
    "LinkStats",
    "Overlay",
    "PeerNode",
    "Session",
    "SimConfig",
    "SimMetrics",
    "build_overlay",
    "ci95",
    "continuity_index",
    "decode_frame",
    "encode_frame",
    "geometric_choice",
    "geometric_weights",
    "load_overrides",
    "run_session",
]
