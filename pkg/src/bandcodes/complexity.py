"""Closed-form decoding cost of band codes, in row-XOR operations."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import ParameterError

MEGABIT = 1_000_000


@dataclass(frozen=True)
class ComplexityPrediction:
    n: int
    w: int
    cd_tri: float
    cd_diag: float
    # W(N-1)/4: what the collision sum actually evaluates to, one term above cd_tri
    cd_tri_summed: float

    @property
    def cd_total(self) -> float:
        return self.cd_tri + self.cd_diag


def _check(n: int, w: int) -> None:
    if n < 1 or not 1 <= w <= n:
        raise ParameterError(f"need 1 <= W <= N, got N={n}, W={w}")


def predict(n: int, w: int) -> ComplexityPrediction:
    """Expected triangularization, diagonalization and total XORs for BP(N, W) input.

    The triangularization term is the published W(N-2)/4.  Summing the
    per-packet collision rate kW/(2N) over k = 1..N-1 gives W(N-1)/4
    instead; the published form is kept because the reference operating
    points (1225, ~2400, ~5000 XOR) are computed from it.  The summed value
    is exposed as ``cd_tri_summed``.
    """
    _check(n, w)
    return ComplexityPrediction(
        n=n,
        w=w,
        cd_tri=w * (n - 2) / 4,
        cd_diag=(2 * n * w - w * w - 1) / 4,
        cd_tri_summed=w * (n - 1) / 4,
    )


def xors_per_megabit(n: int, w: int, symbol_size: int, xors: Optional[float] = None) -> float:
    """Scale a per-generation XOR count (default: the prediction) to 1 Mbit of payload."""
    _check(n, w)
    if symbol_size <= 0:
        raise ParameterError(f"symbol size must be positive, got {symbol_size}")
    if xors is None:
        xors = predict(n, w).cd_total
    return xors * MEGABIT / (n * symbol_size * 8)


CSV_FIELDS = ["N", "W", "cd_tri", "cd_diag", "cd_total", "measured_mean", "measured_ci95"]


def to_csv(rows: Iterable[tuple[ComplexityPrediction, float, float]]) -> str:
    """Rows of ``(prediction, measured_mean, measured_ci95)`` as CSV text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for pred, mean, ci in rows:
        writer.writerow([pred.n, pred.w, pred.cd_tri, pred.cd_diag, pred.cd_total, mean, ci])
    return buf.getvalue()
