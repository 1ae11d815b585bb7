"""Hourly frequency-stability indicators from 1 Hz grid-frequency traces.

For the hour starting at ``t_i`` the sample set is ``t_i, t_i + 1 s, ...,
t_i + 3600 s`` (3601 samples; the closing sample is shared with the next
hour).  Nadir, Integral and MSD are evaluated on this set, MSD always
divided by 3600.  RoCoF is the steepest smoothed slope in
``[t_i - T, t_i + T]``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from freqxai.errors import DataError, EmptyTrace, MissingData

logger = logging.getLogger(__name__)

NOMINAL_HZ = 50.0
GAMMA = 3600
SAMPLES_PER_HOUR = 3600
WINDOW_SAMPLES = GAMMA + 1
SANITY_BOUND_HZ = 2.0

INDICATORS = ("nadir", "rocof", "msd", "integral")
INDICATOR_COLUMNS = {
    "nadir": "nadir_hz",
    "rocof": "rocof_hz_per_s",
    "msd": "msd_hz2",
    "integral": "integral_hz_s",
}


@dataclass(frozen=True)
class RocofParams:
    """Smoothing window ``L`` and search half-width ``T``, both in seconds."""

    smoothing_window: int = 60
    search_half_width: int = 60

    def __post_init__(self):
        L, T = self.smoothing_window, self.search_half_width
        if int(L) != L or int(T) != T:
            raise ValueError("RoCoF windows must be whole seconds")
        if L < 1 or T < 1 or T > 1800:
            raise ValueError(f"invalid RoCoF params L={L}, T={T}: need L >= 1 and 1 <= T <= 1800")


# The Nordic RoCoF develops on a shorter time scale because of its fast hydro fleet.
AREA_ROCOF_PARAMS = {
    "CE": RocofParams(60, 60),
    "GB": RocofParams(60, 60),
    "Nordic": RocofParams(30, 30),
}


def rocof_params_for(area: str) -> RocofParams:
    try:
        return AREA_ROCOF_PARAMS[area]
    except KeyError:
        raise KeyError(f"no default RoCoF parameters for area {area!r}; "
                       f"known: {sorted(AREA_ROCOF_PARAMS)}") from None


def _as_utc(ts) -> pd.Timestamp:
    ts = pd.Timestamp(ts)
    if ts.tzinfo is None:
        return ts.tz_localize("UTC")
    return ts.tz_convert("UTC")


@dataclass(frozen=True)
class FrequencyTrace:
    """Centered frequency ``f(t) = f_raw(t) - 50 Hz`` sampled every second.

    Samples that are NaN or violate ``|f| < 2 Hz`` are folded into
    ``missing``; ``n_flagged`` counts the latter.
    """

    start: pd.Timestamp
    values: np.ndarray
    missing: np.ndarray = None
    resolution: float = 1.0
    n_flagged: int = field(default=0, init=False)

    def __post_init__(self):
        start = _as_utc(self.start)
        if start != start.floor("h"):
            raise ValueError(f"trace start {start} is not on an hour boundary")
        if self.resolution != 1.0:
            raise ValueError("only 1 s resolution is supported")
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if self.missing is None:
            missing = np.zeros(values.shape, dtype=bool)
        else:
            missing = np.array(self.missing, dtype=bool)
        if missing.shape != values.shape:
            raise ValueError("values and missing mask differ in length")
        missing = missing | np.isnan(values)
        with np.errstate(invalid="ignore"):
            out_of_range = ~missing & (np.abs(values) >= SANITY_BOUND_HZ)
        n_flagged = int(out_of_range.sum())
        if n_flagged:
            logger.warning("%d samples with |f| >= %.1f Hz flagged as missing", n_flagged, SANITY_BOUND_HZ)
        missing = missing | out_of_range
        values[missing] = np.nan
        values.flags.writeable = False
        missing.flags.writeable = False
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "missing", missing)
        object.__setattr__(self, "n_flagged", n_flagged)

    @classmethod
    def from_raw(cls, start, raw_hz, nominal: float = NOMINAL_HZ) -> "FrequencyTrace":
        return cls(start, np.asarray(raw_hz, dtype=float) - nominal)

    def __len__(self):
        return len(self.values)

    @property
    def n_hours(self) -> int:
        return len(self.values) // SAMPLES_PER_HOUR

    @property
    def hours(self) -> pd.DatetimeIndex:
        return pd.date_range(self.start, periods=self.n_hours, freq="h", name="hour_utc")

    def hour_window(self, i: int) -> np.ndarray:
        """The 3601-sample set of hour ``i``; samples past the trace end read as NaN."""
        lo = i * SAMPLES_PER_HOUR
        window = self.values[lo:lo + WINDOW_SAMPLES]
        if len(window) < WINDOW_SAMPLES:
            window = np.concatenate([window, np.full(WINDOW_SAMPLES - len(window), np.nan)])
        return window


def _check_window(window) -> np.ndarray:
    window = np.asarray(window, dtype=float)
    if window.size == 0:
        raise EmptyTrace("empty window")
    if np.isnan(window).any():
        raise MissingData("window contains missing samples")
    return window


def compute_nadir(window) -> float:
    """Signed frequency value at the largest absolute deviation (earliest on ties)."""
    window = _check_window(window)
    return float(window[np.argmax(np.abs(window))])


def compute_integral(window, tau: float = 1.0) -> float:
    window = _check_window(window)
    return float(tau * np.sum(window))


def compute_msd(window, gamma: int = GAMMA) -> float:
    window = _check_window(window)
    return float(np.sum(window * window) / gamma)


def estimate_derivative(trace, smoothing_window: int, tau: float = 1.0) -> np.ndarray:
    """Smoothed frequency derivative in Hz/s.

    Increments ``f(t) - f(t - tau)`` are averaged over a centered rectangle of
    ``L`` samples (positions ``t - L//2`` to ``t - L//2 + L - 1``).  Positions
    whose window touches a missing increment or the series boundary are NaN.
    """
    values = trace.values if isinstance(trace, FrequencyTrace) else np.asarray(trace, dtype=float)
    L = int(smoothing_window)
    if L < 1:
        raise ValueError("smoothing window must be >= 1")
    n = len(values)
    out = np.full(n, np.nan)
    if n < L + 1:
        return out
    increments = np.empty(n)
    increments[0] = np.nan
    np.subtract(values[1:], values[:-1], out=increments[1:])
    smoothed = sliding_window_view(increments, L).mean(axis=1) / tau
    offset = L // 2
    out[offset:offset + len(smoothed)] = smoothed
    return out


def compute_rocof(derivative, hour_start: int, search_half_width: int) -> float:
    """Signed derivative at the steepest slope within ``hour_start +- T`` samples."""
    derivative = np.asarray(derivative, dtype=float)
    T = int(search_half_width)
    lo, hi = hour_start - T, hour_start + T + 1
    if lo < 0 or hi > len(derivative):
        raise MissingData("RoCoF window extends beyond the trace")
    return compute_nadir(derivative[lo:hi])


@dataclass
class IndicatorTable:
    """Hourly indicators; NaN marks a missing entry."""

    hours: pd.DatetimeIndex
    nadir: np.ndarray
    rocof: np.ndarray
    msd: np.ndarray
    integral: np.ndarray
    area: str | None = None

    def __len__(self):
        return len(self.hours)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {name: getattr(self, name) for name in INDICATORS},
            index=pd.DatetimeIndex(self.hours, name="hour_utc"),
        )

    def to_csv(self, path) -> None:
        frame = self.to_frame().rename(columns=INDICATOR_COLUMNS)
        frame.index = frame.index.strftime("%Y-%m-%dT%H:%M:%SZ")
        frame.to_csv(path, na_rep="nan", lineterminator="\n")

    @classmethod
    def read_csv(cls, path, area=None) -> "IndicatorTable":
        frame = pd.read_csv(path, index_col="hour_utc", na_values=["nan"], float_precision="round_trip")
        frame.index = pd.to_datetime(frame.index, utc=True)
        inverse = {v: k for k, v in INDICATOR_COLUMNS.items()}
        frame = frame.rename(columns=inverse)
        return cls(frame.index, *(frame[name].to_numpy(float) for name in INDICATORS), area=area)


def extract_indicators(trace: FrequencyTrace, params: RocofParams | None = None,
                       missing_tolerance: int = 0) -> IndicatorTable:
    """One row of Nadir/RoCoF/MSD/Integral per complete hour of ``trace``.

    An hour with more than ``missing_tolerance`` missing samples is NaN for
    Nadir, Integral and MSD; with a nonzero tolerance the formulas run over
    the present samples only.  RoCoF is NaN whenever its window is not fully
    present, including hours too close to the trace boundaries.
    """
    params = params or RocofParams()
    n_hours = trace.n_hours
    if n_hours == 0:
        raise EmptyTrace(f"trace of {len(trace)} samples holds no complete hour")

    padded = trace.values
    needed = (n_hours - 1) * SAMPLES_PER_HOUR + WINDOW_SAMPLES
    if len(padded) < needed:
        padded = np.concatenate([padded, np.full(needed - len(padded), np.nan)])
    windows = sliding_window_view(padded, WINDOW_SAMPLES)[::SAMPLES_PER_HOUR][:n_hours]
    n_missing = np.isnan(windows).sum(axis=1)
    usable = n_missing <= missing_tolerance

    nadir = np.full(n_hours, np.nan)
    integral = np.full(n_hours, np.nan)
    msd = np.full(n_hours, np.nan)
    for i in np.flatnonzero(usable):
        w = windows[i]
        if n_missing[i]:
            w = w[~np.isnan(w)]
            if w.size == 0:
                continue
        peak = np.argmax(np.abs(w))
        nadir[i] = w[peak]
        integral[i] = trace.resolution * np.sum(w)
        msd[i] = np.sum(w * w) / GAMMA

    derivative = estimate_derivative(trace, params.smoothing_window, trace.resolution)
    rocof = np.full(n_hours, np.nan)
    T = params.search_half_width
    for i in range(n_hours):
        try:
            rocof[i] = compute_rocof(derivative, i * SAMPLES_PER_HOUR, T)
        except MissingData:
            pass

    return IndicatorTable(trace.hours, nadir, rocof, msd, integral)


def nadir_occurrence_histogram(trace: FrequencyTrace, density: bool = False) -> np.ndarray:
    """Counts of the minute-of-hour (0-59) at which ``|f|`` peaks, one entry per complete hour.

    Only the 3600 samples ``[t_i, t_i + 3600 s)`` are searched, so the shared
    closing sample is attributed to the following hour.  Hours with missing
    samples are skipped.
    """
    n_hours = len(trace) // SAMPLES_PER_HOUR
    if n_hours == 0:
        raise EmptyTrace("trace holds no complete hour")
    hours = trace.values[:n_hours * SAMPLES_PER_HOUR].reshape(n_hours, SAMPLES_PER_HOUR)
    complete = ~np.isnan(hours).any(axis=1)
    if not complete.any():
        raise EmptyTrace("no hour without missing samples")
    peaks = np.argmax(np.abs(hours[complete]), axis=1)
    counts = np.bincount(peaks // 60, minlength=60).astype(float)
    if density:
        counts /= counts.sum()
    return counts


def read_frequency_csv(path) -> FrequencyTrace:
    """Read ``timestamp_utc,frequency_hz`` rows of raw (uncentered) frequency.

    Absent seconds and ``nan`` values become missing samples.  The trace
    starts at the hour containing the first timestamp.
    """
    path = Path(path)
    raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    expected = ["timestamp_utc", "frequency_hz"]
    if list(raw.columns) != expected:
        raise DataError(f"{path}: expected header {','.join(expected)}, got {','.join(raw.columns)}")
    if raw.empty:
        raise EmptyTrace(f"{path}: no data rows")
    stamps = pd.to_datetime(raw["timestamp_utc"], utc=True, errors="coerce", format="ISO8601")
    text = raw["frequency_hz"].str.strip()
    freq = pd.to_numeric(text, errors="coerce")
    is_nan_token = text.str.lower().isin(["nan", ""])
    bad = stamps.isna() | (freq.isna() & ~is_nan_token)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DataError(f"{path}:{row + 2}: cannot parse row {raw.iloc[row].tolist()!r}")
    seconds = stamps.dt.floor("s")
    if (seconds != stamps).any() or seconds.duplicated().any() or not seconds.is_monotonic_increasing:
        row = int(np.flatnonzero(((seconds != stamps) | seconds.duplicated()
                                  | (seconds.diff() <= pd.Timedelta(0))).to_numpy())[0])
        raise DataError(f"{path}:{row + 2}: timestamps must be increasing whole seconds")
    start = seconds.iloc[0].floor("h")
    offsets = ((seconds - start) // pd.Timedelta(seconds=1)).to_numpy()
    values = np.full(int(offsets[-1]) + 1, np.nan)
    values[offsets] = text.replace("", "nan").astype(float).to_numpy() - NOMINAL_HZ
    return FrequencyTrace(start, values)


def write_frequency_csv(trace: FrequencyTrace, path, nominal: float = NOMINAL_HZ) -> None:
    stamps = pd.date_range(trace.start, periods=len(trace), freq="s")
    frame = pd.DataFrame({
        "timestamp_utc": stamps.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "frequency_hz": trace.values + nominal,
    })
    frame.to_csv(path, index=False, na_rep="nan", float_format="%.6f", lineterminator="\n")
