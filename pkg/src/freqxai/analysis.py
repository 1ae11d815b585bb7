"""Benchmarks, gain accounting, ramp-speed classification and correlations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from freqxai.errors import DataError, EmptySeries, MissingHourBin, ZeroVariance

DRIVING = "driving"
OFFSETTING = "offsetting"
BALANCING = "balancing"
UNCLASSIFIED = "unclassified"
DEFAULT_SPEED_THRESHOLD = 0.5


def r2_score(y_true, y_pred) -> float:
    """Coefficient of determination ``1 - SSE / SST``."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or len(y_true) < 2:
        raise DataError("r2_score needs two equal-length arrays of at least 2 values")
    sst = np.sum((y_true - y_true.mean()) ** 2)
    if sst == 0:
        raise ZeroVariance("target has zero variance")
    return float(1.0 - np.sum((y_true - y_pred) ** 2) / sst)


def _hours_of(hours) -> np.ndarray:
    if isinstance(hours, (pd.DatetimeIndex, pd.Series)) and hasattr(getattr(hours, "dt", hours), "hour"):
        return np.asarray(hours.hour if isinstance(hours, pd.DatetimeIndex) else hours.dt.hour)
    return np.asarray(hours, dtype=int)


@dataclass(frozen=True)
class DailyProfilePredictor:
    """Null model: predicts the training mean of the target for each hour of day."""

    profile: np.ndarray

    def __post_init__(self):
        if self.profile.shape != (24,) or not np.all(np.isfinite(self.profile)):
            raise DataError("daily profile needs 24 finite values")

    def predict(self, hours) -> np.ndarray:
        return self.profile[_hours_of(hours)]


def fit_daily_profile(hours, targets) -> DailyProfilePredictor:
    h = _hours_of(hours)
    y = np.asarray(targets, dtype=float)
    keep = ~np.isnan(y)
    h, y = h[keep], y[keep]
    counts = np.bincount(h, minlength=24)
    if np.any(counts[:24] == 0):
        raise MissingHourBin(f"no training rows for hours {np.flatnonzero(counts[:24] == 0).tolist()}")
    profile = np.bincount(h, weights=y, minlength=24) / counts
    return DailyProfilePredictor(profile)


def predict_daily_profile(predictor: DailyProfilePredictor, hours) -> np.ndarray:
    return predictor.predict(hours)


def _ratio(num, den):
    if num is None or den is None or not den > 0:
        return None
    return num / den


@dataclass
class PerformanceEntry:
    area: str
    indicator: str
    n_test: int
    r2_full: float
    r2_day_ahead: float | None
    r2_profile: float

    @property
    def gain_full_vs_profile(self):
        return _ratio(self.r2_full, self.r2_profile)

    @property
    def gain_day_ahead_vs_profile(self):
        return _ratio(self.r2_day_ahead, self.r2_profile)

    @property
    def gain_full_vs_day_ahead(self):
        return _ratio(self.r2_full, self.r2_day_ahead)

    def to_dict(self) -> dict:
        return {
            "area": self.area, "indicator": self.indicator, "n_test": self.n_test,
            "r2_full": self.r2_full, "r2_day_ahead": self.r2_day_ahead, "r2_profile": self.r2_profile,
            "gain_full_vs_profile": self.gain_full_vs_profile,
            "gain_day_ahead_vs_profile": self.gain_day_ahead_vs_profile,
            "gain_full_vs_day_ahead": self.gain_full_vs_day_ahead,
        }


@dataclass
class PerformanceReport:
    entries: list

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([e.to_dict() for e in self.entries])


def performance_entry(area, indicator, y_test, full_pred, profile_pred, day_ahead_pred=None) -> PerformanceEntry:
    """R^2 of the full, day-ahead-only and daily-profile predictors on the same test rows.

    A gain is ``None`` when its denominator R^2 is not positive.
    """
    y = np.asarray(y_test, dtype=float)
    return PerformanceEntry(
        area=area, indicator=indicator, n_test=len(y),
        r2_full=r2_score(y, full_pred),
        r2_day_ahead=None if day_ahead_pred is None else r2_score(y, day_ahead_pred),
        r2_profile=r2_score(y, profile_pred),
    )


def performance_report(evaluations) -> PerformanceReport:
    """Build a report from dicts holding the ``performance_entry`` arguments."""
    return PerformanceReport([performance_entry(**e) for e in evaluations])


def classify_rocof_role(speed: float, direction: float, threshold: float = DEFAULT_SPEED_THRESHOLD) -> str:
    """Quadrant rule on (relative ramp speed, SHAP direction).

    Fast and positive: driving.  Slow and negative: offsetting.  Fast and
    negative: balancing.  Slow and positive, or zero direction: unclassified.
    """
    fast = speed >= threshold
    if direction > 0:
        return DRIVING if fast else UNCLASSIFIED
    if direction < 0:
        return BALANCING if fast else OFFSETTING
    return UNCLASSIFIED


def relative_ramp_speeds(generation, ramp_rates, directions=None,
                         threshold: float = DEFAULT_SPEED_THRESHOLD) -> pd.DataFrame:
    """Relative ramping speed per technology.

    ``generation`` maps technology to an hourly actual-generation series,
    ``ramp_rates`` maps technology to its ramp rate (capacity fraction per
    minute).  With ``dX_k`` the median absolute hourly change, the fastest
    technology ``m`` maximises ``dX_k * r_k`` and ``s_k = dX_k r_k / (dX_m r_m)``.
    ``directions`` (technology -> SHAP direction) adds a role column.
    """
    rows = []
    for tech, series in generation.items():
        if tech not in ramp_rates:
            raise DataError(f"no ramp rate supplied for {tech!r}")
        rate = float(ramp_rates[tech])
        if not rate > 0:
            raise DataError(f"ramp rate of {tech!r} must be positive")
        values = pd.Series(series, dtype=float)
        changes = values.diff().abs().dropna()
        if changes.empty:
            raise EmptySeries(f"{tech!r} has no consecutive hourly values")
        rows.append({"technology": tech, "median_abs_ramp": float(changes.median()), "ramp_rate": rate})
    if not rows:
        raise EmptySeries("no generation series given")
    table = pd.DataFrame(rows)
    score = table["median_abs_ramp"] * table["ramp_rate"]
    top = float(score.max())
    table["relative_speed"] = score / top if top > 0 else 0.0
    table["degenerate"] = table["median_abs_ramp"] == 0
    table["fastest"] = False
    if top > 0:
        table.loc[int(np.argmax(score.to_numpy())), "fastest"] = True
    if directions is not None:
        table["direction"] = [directions.get(t, np.nan) for t in table["technology"]]
        table["role"] = [
            UNCLASSIFIED if np.isnan(rho) else classify_rocof_role(s, rho, threshold)
            for s, rho in zip(table["relative_speed"], table["direction"])
        ]
    return table


def pearson_matrix(frame: pd.DataFrame, others: pd.DataFrame | None = None, min_periods: int = 3) -> pd.DataFrame:
    """Pairwise-complete Pearson correlations; undefined pairs are NaN.

    With ``others``, returns the block of ``frame`` columns (rows) against
    ``others`` columns.
    """
    if others is None:
        return frame.corr(method="pearson", min_periods=min_periods)
    joined = pd.concat([frame, others.reindex(frame.index)], axis=1)
    corr = joined.corr(method="pearson", min_periods=min_periods)
    return corr.loc[list(frame.columns), list(others.columns)]
