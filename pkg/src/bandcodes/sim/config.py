"""Session parameters and their file formats."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Optional

from ..errors import ParameterError
from ..wire import header_size
from .decoding_map import map_size

SCHEMES = ("band", "reference")
SOURCE_DEGREES = ("binomial", "rsd")
US = 1_000_000


@dataclass(frozen=True)
class SimConfig:
    """Full parameterization of one streaming session.

    ``peer_count`` counts receiving peers; the source is an extra node with
    id 0.  Bandwidths are in bit/s; ``None`` selects the defaults derived
    from the stream rate (``source_fraction`` of the aggregate demand for the
    source, ``peer_bandwidth_factor`` times the stream rate per peer).
    """

    peer_count: int = 100
    full_mesh: bool = True
    overlay_degree: float = 8.0
    seed: int = 0
    n: int = 100
    w: Optional[int] = None
    scheme: str = "band"
    source_degree: str = "binomial"
    rsd_c: float = 0.1
    rsd_delta: float = 0.5
    symbol_size: int = 1250
    generation_duration: float = 1.0
    buffering_time: float = 5.0
    generations: int = 10
    source_bandwidth: Optional[float] = None
    source_fraction: float = 0.15
    peer_bandwidth: Optional[float] = None
    peer_bandwidth_factor: float = 1.5
    loss: float = 0.0
    latency: float = 0.0
    p_gen: float = 0.5
    swap: bool = True
    carry_payloads: bool = False
    wire: bool = False

    def __post_init__(self) -> None:
        if self.peer_count < 1:
            raise ParameterError("need at least one peer")
        if self.n < 2:
            raise ParameterError("generation size must be >= 2")
        if self.w is not None and not 1 <= self.w <= self.n:
            raise ParameterError(f"W={self.w} outside [1, N={self.n}]")
        if self.scheme not in SCHEMES:
            raise ParameterError(f"scheme must be one of {SCHEMES}")
        if self.source_degree not in SOURCE_DEGREES:
            raise ParameterError(f"source_degree must be one of {SOURCE_DEGREES}")
        if self.symbol_size < 0:
            raise ParameterError("symbol size must be non-negative")
        if self.generation_duration <= 0 or self.buffering_time <= 0:
            raise ParameterError("durations must be positive")
        ratio = self.buffering_time / self.generation_duration
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ParameterError("buffering time must be a positive multiple of the generation duration")
        if self.generations < 1:
            raise ParameterError("session needs at least one generation")
        for name in ("source_bandwidth", "peer_bandwidth"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ParameterError(f"{name} must be >= 0")
        if not 0 <= self.loss < 1:
            raise ParameterError("loss must lie in [0, 1)")
        if self.latency < 0:
            raise ParameterError("latency must be >= 0")
        if not 0 < self.p_gen <= 1:
            raise ParameterError("p_gen must lie in (0, 1]")
        if not self.full_mesh and not 0 < self.overlay_degree <= self.peer_count:
            raise ParameterError("overlay degree must lie in (0, node_count - 1]")

    @property
    def window(self) -> int:
        if self.scheme == "reference":
            return self.n
        return self.n if self.w is None else self.w

    @property
    def map_width(self) -> int:
        return round(self.buffering_time / self.generation_duration)

    @property
    def stream_rate(self) -> float:
        """Payload bit rate of the stream."""
        return self.n * self.symbol_size * 8 / self.generation_duration

    @property
    def packet_bits(self) -> int:
        return 8 * (self.symbol_size + header_size(self.window) + map_size(self.map_width))

    @property
    def resolved_source_bandwidth(self) -> float:
        if self.source_bandwidth is not None:
            return self.source_bandwidth
        return self.source_fraction * self.peer_count * self.n * self.packet_bits / self.generation_duration

    @property
    def resolved_peer_bandwidth(self) -> float:
        if self.peer_bandwidth is not None:
            return self.peer_bandwidth
        return self.peer_bandwidth_factor * self.n * self.packet_bits / self.generation_duration

    def period_us(self, bandwidth: float) -> Optional[int]:
        """Microseconds between transmission opportunities, ``None`` if never."""
        if bandwidth <= 0:
            return None
        return max(1, math.ceil(self.packet_bits * US / bandwidth))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def with_overrides(self, **overrides: Any) -> "SimConfig":
        return replace(self, **overrides)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "SimConfig":
        return cls.from_dict(load_overrides(path))


def parse_value(text: str) -> Any:
    text = text.strip()
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    if lowered in ("none", "null", ""):
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text.strip("\"'")


def load_overrides(path: str | Path) -> dict[str, Any]:
    """Read a JSON object or ``key = value`` lines (``#`` starts a comment)."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ParameterError("config file must hold a JSON object")
        return data
    out: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ParameterError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split(sep, 1)
        out[key.strip()] = parse_value(value)
    return out
