"""Fringe metrics on sampled 2pi-periodic traces.

Peaks are strict three-point local maxima with the grid treated as periodic,
refined by a parabola through the peak sample and its two neighbours.  A
fringe is an excursion of the trace above ``threshold * max`` that ends when
the trace drops to half that level; when several local maxima share one
excursion (shot noise on a fringe top) only the highest counts.  A zero
threshold disables the grouping and counts every strict local maximum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import AnalysisError

TWO_PI = 2.0 * math.pi
DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class Trace:
    phis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        phis = np.asarray(self.phis, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if phis.shape != values.shape or phis.ndim != 1:
            raise ValueError("phis and values must be 1-D arrays of equal length")
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    @property
    def peak(self) -> float:
        return float(self.values.max()) if len(self) else 0.0

    def normalized(self) -> "Trace":
        top = self.peak
        if top <= 0:
            return Trace(self.phis, np.zeros_like(self.values))
        return Trace(self.phis, self.values / top)


@dataclass(frozen=True)
class FringeReport:
    fringe_count: int
    peak_positions: tuple[float, ...]
    first_peak: float
    visibility: float
    period: float

    def to_dict(self) -> dict:
        def clean(x):
            return None if x is None or not math.isfinite(x) else x

        return {
            "fringe_count": self.fringe_count,
            "peak_positions": list(self.peak_positions),
            "first_peak": clean(self.first_peak),
            "visibility": clean(self.visibility),
            "period": clean(self.period),
        }


def _grid_step(trace: Trace) -> float:
    if len(trace) > 1:
        return float(trace.phis[1] - trace.phis[0])
    return TWO_PI


def _local_maxima(y: np.ndarray) -> list[int]:
    """Indices of strict local maxima on a periodic grid; plateaus yield their centre."""
    n = len(y)
    if n == 0:
        return []
    # rotate so index 0 starts a run of equal values
    change = np.nonzero(y != np.roll(y, 1))[0]
    if len(change) == 0:
        return []
    start = int(change[0])
    rolled = np.roll(y, -start)
    bounds = np.nonzero(np.diff(rolled))[0] + 1
    run_starts = np.concatenate(([0], bounds))
    run_ends = np.concatenate((bounds, [n]))
    run_vals = rolled[run_starts]
    maxima = []
    k = len(run_vals)
    for j in range(k):
        if run_vals[j] > run_vals[j - 1] and run_vals[j] > run_vals[(j + 1) % k]:
            centre = (run_starts[j] + run_ends[j] - 1) // 2
            maxima.append(int((centre + start) % n))
    return sorted(maxima)


def _refine(trace: Trace, i: int) -> float:
    y = trace.values
    n = len(y)
    y0, y1, y2 = y[(i - 1) % n], y[i], y[(i + 1) % n]
    denom = y0 - 2.0 * y1 + y2
    offset = 0.0 if denom == 0 else 0.5 * (y0 - y2) / denom
    offset = min(max(offset, -0.5), 0.5)
    pos = (trace.phis[i] + offset * _grid_step(trace)) % TWO_PI
    return 0.0 if pos >= TWO_PI else float(pos)


def _excursions(y: np.ndarray, level: float):
    """Excursion id per sample, with hysteresis.

    An excursion opens when the trace rises above ``level`` and closes only
    once it falls to ``level / 2`` or below, so noise hovering at the
    threshold cannot split one fringe in two.  Returns None when the trace
    never closes an excursion (one fringe spanning the whole period).
    """
    low = y <= 0.5 * level
    if not low.any():
        return None
    n = len(y)
    start = int(np.argmax(low))
    label = np.full(n, -1)
    current, inside = -1, False
    for step in range(n):
        i = (start + step) % n
        if inside and low[i]:
            inside = False
        elif not inside and y[i] > level:
            inside = True
            current += 1
        if inside:
            label[i] = current
    return label


def peak_indices(trace: Trace, threshold: float = DEFAULT_THRESHOLD) -> list[int]:
    """Grid index of the highest sample of each fringe."""
    if not 0.0 <= threshold < 1.0:
        raise ValueError(f"threshold must lie in [0, 1), got {threshold}")
    y = trace.values
    if len(y) == 0:
        raise AnalysisError("empty trace")
    top = float(y.max())
    if top <= 0:
        return []
    level = threshold * top
    candidates = [i for i in _local_maxima(y) if y[i] > level]
    if not candidates or threshold == 0.0:
        return candidates
    label = _excursions(y, level)
    if label is None:
        return [max(candidates, key=lambda i: y[i])]
    best: dict[int, int] = {}
    for i in candidates:
        lab = int(label[i])
        if lab not in best or y[i] > y[best[lab]]:
            best[lab] = i
    return sorted(best.values())


def peak_positions(trace: Trace, threshold: float = DEFAULT_THRESHOLD) -> list[float]:
    return sorted(_refine(trace, i) for i in peak_indices(trace, threshold))


def count_fringes(trace: Trace, threshold: float = DEFAULT_THRESHOLD) -> int:
    return len(peak_indices(trace, threshold))


def first_peak(trace: Trace, threshold: float = DEFAULT_THRESHOLD) -> float:
    positions = peak_positions(trace, threshold)
    if not positions:
        raise AnalysisError("trace has no local maximum")
    return positions[0]


def visibility(trace: Trace) -> float:
    if len(trace) == 0:
        raise AnalysisError("empty trace")
    hi, lo = float(trace.values.max()), float(trace.values.min())
    if hi <= 0:
        raise AnalysisError("visibility undefined for an all-zero trace")
    return (hi - lo) / (hi + lo)


def period_estimate(trace: Trace, threshold: float = DEFAULT_THRESHOLD) -> float:
    """Mean spacing between adjacent fringe peaks."""
    positions = peak_positions(trace, threshold)
    if len(positions) < 2:
        raise AnalysisError(f"period needs at least 2 peaks, found {len(positions)}")
    return (positions[-1] - positions[0]) / (len(positions) - 1)


def analyze(trace: Trace, threshold: float = DEFAULT_THRESHOLD) -> FringeReport:
    positions = peak_positions(trace, threshold) if len(trace) else []
    try:
        vis = visibility(trace)
    except AnalysisError:
        vis = math.nan
    if len(positions) >= 2:
        period = (positions[-1] - positions[0]) / (len(positions) - 1)
    else:
        period = math.nan
    return FringeReport(
        fringe_count=len(positions),
        peak_positions=tuple(positions),
        first_peak=positions[0] if positions else math.nan,
        visibility=vis,
        period=period,
    )
