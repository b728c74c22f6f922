"""Filter figures of merit extracted from a two-port sweep.

Band edges and off-grid evaluations are interpolated linearly in
(frequency, dB).  Rejection is reported as absolute |S21| suppression,
``-20 log10 |S21|``, unless ``relative=True`` asks for it relative to the
insertion loss.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple, Optional, Sequence

import numpy as np

from .errors import BandEdgeError, MetricsError, NoPassbandError
from .network import SParameters

# |S21| below this is treated as an exact zero when taking logs.
_DB_FLOOR = -400.0


class Passband(NamedTuple):
    f_lo: float
    f_hi: float
    f_center: float
    fbw: float


class RejectionBand(NamedTuple):
    threshold_db: float
    side: str
    f_start: float
    f_stop: float

    @property
    def width(self) -> float:
        return self.f_stop - self.f_start


@dataclass(frozen=True)
class FilterMetrics:
    f_center: float
    il_db: float
    f_min_loss: float
    f_lo_3db: float
    f_hi_3db: float
    fbw_3db: float
    rej_low_db: float
    rej_high_db: float
    rejection_bands: tuple[RejectionBand, ...] = ()

    @property
    def bandwidth_3db(self) -> float:
        return self.f_hi_3db - self.f_lo_3db

    def as_record(self) -> dict:
        return {
            "f_center_hz": self.f_center,
            "il_db": self.il_db,
            "f_min_loss_hz": self.f_min_loss,
            "f_lo_3db_hz": self.f_lo_3db,
            "f_hi_3db_hz": self.f_hi_3db,
            "fbw_3db": self.fbw_3db,
            "rej_low_db": self.rej_low_db,
            "rej_high_db": self.rej_high_db,
            "rejection_bands": [
                {"threshold_db": b.threshold_db, "side": b.side, "f_start_hz": b.f_start, "f_stop_hz": b.f_stop}
                for b in self.rejection_bands
            ],
        }


def _s21_db(s: SParameters) -> np.ndarray:
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(np.abs(s.s21))
    return np.maximum(db, _DB_FLOOR)


def _cross(f, db, i, j, level):
    """Frequency between grid points i and j where the dB trace equals ``level``."""
    if db[j] == db[i]:
        return float(f[i])
    t = (level - db[i]) / (db[j] - db[i])
    return float(f[i] + t * (f[j] - f[i]))


def insertion_loss(s: SParameters) -> tuple[float, float]:
    """Minimum loss over the sweep and the frequency where it occurs."""
    mag = np.abs(s.s21)
    if not np.any(mag > 0):
        raise NoPassbandError("no passband: |S21| is zero everywhere")
    i = int(np.argmax(mag))
    return float(-20.0 * np.log10(mag[i])) + 0.0, float(s.f[i])  # + 0.0 drops a negative zero


def passband_3db(s: SParameters, level_db: float = 3.0) -> Passband:
    il, _ = insertion_loss(s)
    db = _s21_db(s)
    f = s.f
    i = int(np.argmax(db))
    threshold = -il - level_db
    lo = i
    while lo >= 0 and db[lo] >= threshold:
        lo -= 1
    hi = i
    while hi < len(f) and db[hi] >= threshold:
        hi += 1
    if lo < 0 or hi >= len(f):
        raise BandEdgeError(f"no {level_db:g}-dB band: band edge outside sweep on the "
                            f"{'low' if lo < 0 else 'high'} side")
    f_lo = _cross(f, db, lo, lo + 1, threshold)
    f_hi = _cross(f, db, hi - 1, hi, threshold)
    fc = 0.5 * (f_lo + f_hi)
    return Passband(f_lo, f_hi, fc, (f_hi - f_lo) / fc)


def rejection_at(s: SParameters, freq, relative: bool = False, il_db: float = 0.0):
    """Rejection (dB, positive = suppression) at arbitrary in-sweep frequencies."""
    freq = np.asarray(freq, dtype=float)
    if np.any(freq < s.f[0]) or np.any(freq > s.f[-1]):
        raise MetricsError(
            f"evaluation point outside sweep {s.f[0]:.6g}..{s.f[-1]:.6g} Hz"
        )
    rej = -np.interp(freq, s.f, _s21_db(s))
    if relative:
        rej = rej - il_db
    return float(rej) if rej.ndim == 0 else rej


def close_in_rejection(
    s: SParameters,
    band: Passband,
    offset: float = 2.0,
    relative: bool = False,
) -> tuple[float, float]:
    """Rejection at ``f_center -/+ offset * (f_hi - f_lo)``."""
    bw = band.f_hi - band.f_lo
    il = insertion_loss(s)[0] if relative else 0.0
    points = [band.f_center - offset * bw, band.f_center + offset * bw]
    low, high = rejection_at(s, points, relative=relative, il_db=il)
    return float(low), float(high)


def rejection_bandwidth(
    s: SParameters,
    threshold_db: float,
    side: Literal["below", "above"],
    band: Optional[Passband] = None,
) -> Optional[tuple[float, float]]:
    """Widest contiguous span on one side of the passband with rejection >= ``threshold_db``.

    Returns ``None`` when no grid point meets the threshold.
    """
    if side not in ("below", "above"):
        raise ValueError(f"side must be 'below' or 'above', got {side!r}")
    if band is None:
        band = passband_3db(s)
    db = _s21_db(s)
    f = s.f
    level = -threshold_db
    if side == "below":
        region = np.flatnonzero(f < band.f_lo)
    else:
        region = np.flatnonzero(f > band.f_hi)
    ok = np.zeros(len(f), dtype=bool)
    ok[region] = db[region] <= level
    best = None
    i = 0
    n = len(f)
    while i < n:
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and ok[j + 1]:
            j += 1
        start = _cross(f, db, i - 1, i, level) if i > 0 else float(f[i])
        stop = _cross(f, db, j, j + 1, level) if j + 1 < n else float(f[j])
        if side == "below":
            stop = min(stop, band.f_lo)
        else:
            start = max(start, band.f_hi)
        if best is None or stop - start > best[1] - best[0]:
            best = (start, stop)
        i = j + 1
    return best


def extract_metrics(
    s: SParameters,
    thresholds: Sequence[float] = (40.0,),
    offset: float = 2.0,
    relative: bool = False,
) -> FilterMetrics:
    il, f_min = insertion_loss(s)
    band = passband_3db(s)
    rej_low, rej_high = close_in_rejection(s, band, offset=offset, relative=relative)
    bands = []
    for th in thresholds:
        for side in ("below", "above"):
            span = rejection_bandwidth(s, th, side, band)
            if span is not None:
                bands.append(RejectionBand(float(th), side, span[0], span[1]))
    return FilterMetrics(
        f_center=band.f_center,
        il_db=il,
        f_min_loss=f_min,
        f_lo_3db=band.f_lo,
        f_hi_3db=band.f_hi,
        fbw_3db=band.fbw,
        rej_low_db=rej_low,
        rej_high_db=rej_high,
        rejection_bands=tuple(bands),
    )
