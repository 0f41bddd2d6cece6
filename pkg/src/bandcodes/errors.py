"""Exception hierarchy shared by the codec, models and simulator."""

from __future__ import annotations


class BandCodesError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(BandCodesError, ValueError):
    """Operands have incompatible lengths."""


class ParameterError(BandCodesError, ValueError):
    """A size, window or probability parameter is out of range."""


class RoutingError(BandCodesError):
    """A packet was delivered to the decoder of another generation."""


class MalformedPacketError(BandCodesError, ValueError):
    """Packet coefficients do not fit any admissible band, or bytes do not parse."""


class NotReadyError(BandCodesError):
    """Decoding was requested before the decoder reached full rank."""


class NoDataError(BandCodesError):
    """Recombination was requested from an empty decoder."""


class RetryExhaustedError(BandCodesError):
    """No window admits any stored row, so nothing can be recombined."""


class ConsistencyError(BandCodesError):
    """Two packets carry equal coefficients but different payloads."""
