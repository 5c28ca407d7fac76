"""Sudden-death and extremum detection on metric series."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import find_peaks

from bellcav.metrics import MetricSeries
from bellcav.schema import EventReport, ExtremumKind, MetricField

ESD_ZERO_BAND = 1e-6
ESD_HOLD_WINDOW = 8
REVIVAL_THRESHOLD = 0.05
EXTREMUM_PROMINENCE = 0.02


def _first_esd_index(
    concurrence: np.ndarray, zero_band: float, hold_window: int
) -> int | None:
    if hold_window < 1:
        raise ValueError("hold_window must be at least 1")
    if len(concurrence) < hold_window:
        return None
    held = sliding_window_view(concurrence < zero_band, hold_window).all(axis=1)
    hits = np.flatnonzero(held)
    return int(hits[0]) if hits.size else None


def first_esd_time(
    series: MetricSeries,
    zero_band: float = ESD_ZERO_BAND,
    hold_window: int = ESD_HOLD_WINDOW,
) -> float | None:
    """Earliest grid time where concurrence stays below ``zero_band`` for
    ``hold_window`` consecutive samples, or ``None``."""
    if len(series) == 0:
        raise ValueError("Cannot detect sudden death on an empty series")
    index = _first_esd_index(series.concurrence, zero_band, hold_window)
    return None if index is None else float(series.omega_t[index])


def _extremum_indices(
    series: MetricSeries, field: MetricField, kind: ExtremumKind, min_prominence: float
) -> np.ndarray:
    if len(series) < 3:
        raise ValueError(f"Extremum search needs at least 3 samples, got {len(series)}")
    values = series.field(field)
    signal = values if kind == "peaks" else -values
    indices, _ = find_peaks(signal, prominence=min_prominence)
    return indices


def find_extrema(
    series: MetricSeries,
    field: MetricField,
    kind: ExtremumKind,
    min_prominence: float = EXTREMUM_PROMINENCE,
) -> list[float]:
    indices = _extremum_indices(series, field, kind, min_prominence)
    return [float(t) for t in series.omega_t[indices]]


def build_event_report(
    series: MetricSeries,
    zero_band: float = ESD_ZERO_BAND,
    hold_window: int = ESD_HOLD_WINDOW,
    min_prominence: float = EXTREMUM_PROMINENCE,
    revival_threshold: float = REVIVAL_THRESHOLD,
) -> EventReport:
    """Fidelity peaks, entropy valleys and the first sudden death with its revival."""
    if len(series) == 0:
        raise ValueError("Cannot build events for an empty series")
    report = EventReport()
    esd = _first_esd_index(series.concurrence, zero_band, hold_window)
    if esd is not None:
        report.first_esd_time = float(series.omega_t[esd])
        after = series.concurrence[esd:]
        peak = float(np.max(after))
        report.revival_flag = peak > revival_threshold
        report.revival_peak = peak if report.revival_flag else None

    if len(series) >= 3:
        peaks = _extremum_indices(series, "fidelity", "peaks", min_prominence)
        valleys = _extremum_indices(series, "entropy", "valleys", min_prominence)
        report.peak_times = [float(t) for t in series.omega_t[peaks]]
        report.peak_values = [float(v) for v in series.fidelity[peaks]]
        report.valley_times = [float(t) for t in series.omega_t[valleys]]
        report.valley_values = [float(v) for v in series.entropy[valleys]]
    return report
