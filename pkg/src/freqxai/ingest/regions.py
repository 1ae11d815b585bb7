"""Regional time series: resampling, area aggregation, price weighting, outliers."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from freqxai.errors import DataError, IrregularCadence, NoRegions

HOUR = pd.Timedelta(hours=1)


@dataclass
class RegionSeries:
    """One feature of one region on a UTC ``DatetimeIndex``; NaN marks missing."""

    region: str
    feature: str
    values: pd.Series
    unit: str = "MW"
    availability: str | None = None

    def __post_init__(self):
        index = pd.DatetimeIndex(self.values.index)
        index = index.tz_localize("UTC") if index.tz is None else index.tz_convert("UTC")
        self.values = pd.Series(self.values.to_numpy(float), index=index, name=self.feature)
        if not index.is_monotonic_increasing or index.has_duplicates:
            raise DataError(f"{self.region}/{self.feature}: timestamps must be strictly increasing")

    @property
    def missing_share(self) -> float:
        if len(self.values) == 0:
            return 1.0
        return float(self.values.isna().mean())


@dataclass
class AggregationPolicy:
    """How regions are combined into an area.

    ``region_types`` records which region granularity (country, bidding zone,
    control zone) was chosen per region; it is informational only.
    """

    nan_share_threshold: float = 0.30
    region_types: dict = field(default_factory=dict)
    outlier_bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.nan_share_threshold <= 1:
            raise ValueError("nan_share_threshold must lie in (0, 1]")
        self.outlier_bounds = {k: (None if v[0] is None else float(v[0]),
                                   None if v[1] is None else float(v[1]))
                               for k, v in self.outlier_bounds.items()}


def _infer_cadence(index: pd.DatetimeIndex) -> pd.Timedelta:
    if len(index) < 2:
        return HOUR
    steps = np.diff(index.asi8)
    cadence = int(steps.min())
    hour_ns = HOUR.value
    if cadence <= 0 or hour_ns % cadence or np.any(steps % cadence):
        raise IrregularCadence(f"sampling steps {sorted(set(steps.tolist()))[:5]} ns do not divide one hour")
    if np.any(index.asi8 % cadence):
        raise IrregularCadence("timestamps are not aligned to their cadence")
    return pd.Timedelta(cadence, unit="ns")


def downsample_to_hourly(series):
    """Hourly arithmetic mean of a sub-hourly series.

    An hour is missing if any of its sub-hourly slots is NaN or absent.
    Accepts a ``RegionSeries`` or a plain ``pd.Series``; returns the same kind.
    """
    if isinstance(series, RegionSeries):
        return replace(series, values=downsample_to_hourly(series.values))
    values = series.copy()
    if len(values) == 0:
        return values
    cadence = _infer_cadence(values.index)
    per_hour = HOUR // cadence
    first = values.index[0].floor("h")
    last = values.index[-1].floor("h")
    grid = pd.date_range(first, last + HOUR - cadence, freq=cadence)
    full = values.reindex(grid).to_numpy(float).reshape(-1, per_hour)
    hourly = np.where(np.isnan(full).any(axis=1), np.nan, full.mean(axis=1))
    return pd.Series(hourly, index=pd.date_range(first, last, freq="h"), name=series.name)


@dataclass
class AggregationResult:
    series: RegionSeries
    included: list
    omitted: list
    diagnostics: pd.DataFrame


def _sum_poisoned(frame: pd.DataFrame) -> pd.Series:
    return frame.sum(axis=1, min_count=frame.shape[1]).where(frame.notna().all(axis=1))


def aggregate_regions(regions: Sequence[RegionSeries], policy: AggregationPolicy | None = None,
                      reference_total: float | None = None) -> AggregationResult:
    """Sum region contributions in order of increasing missing share.

    Regions are added one at a time (ties broken by region id) and the
    process stops before the first addition that would push the aggregate's
    missing share above the threshold; that region and all later ones are
    omitted.  The first region is always kept.  A sum is missing wherever
    any included contribution is missing.

    ``diagnostics`` has one row per region with its missing share and, for
    omitted regions, the mean omitted value relative to the aggregate mean
    and (if ``reference_total`` is given, e.g. the area mean load) relative
    to that reference.
    """
    policy = policy or AggregationPolicy()
    if not regions:
        raise NoRegions("no regions to aggregate")
    features = {r.feature for r in regions}
    units = {r.unit for r in regions}
    if len(features) != 1 or len(units) != 1:
        raise DataError(f"regions mix features {sorted(features)} / units {sorted(units)}")
    index = regions[0].values.index
    for r in regions[1:]:
        index = index.union(r.values.index)
    frame = pd.DataFrame({r.region: r.values.reindex(index) for r in regions})
    shares = frame.isna().mean()
    order = sorted(frame.columns, key=lambda region: (shares[region], region))

    included = [order[0]]
    total = frame[order[0]].copy()
    for region in order[1:]:
        candidate = total + frame[region]
        if candidate.isna().mean() > policy.nan_share_threshold:
            break
        included.append(region)
        total = candidate
    omitted = [r for r in order if r not in included]

    agg_mean = total.mean()
    rows = []
    for region in order:
        mean_value = frame[region].mean()
        is_omitted = region in omitted
        rows.append({
            "region": region,
            "missing_share": float(shares[region]),
            "included": not is_omitted,
            "mean_value": float(mean_value),
            "omitted_relative_to_included": float(mean_value / agg_mean) if is_omitted and agg_mean else np.nan,
            "omitted_relative_to_reference": (float(mean_value / reference_total)
                                              if is_omitted and reference_total else np.nan),
        })
    diagnostics = pd.DataFrame(rows)
    diagnostics.insert(0, "feature", regions[0].feature)
    first = regions[0]
    area = RegionSeries("+".join(included), first.feature, total.rename(first.feature),
                        unit=first.unit, availability=first.availability)
    return AggregationResult(area, included, omitted, diagnostics)


def weighted_price_average(prices: Mapping[str, pd.Series], mean_loads: Mapping[str, float]):
    """Load-weighted area price.

    Each region's weight is its mean load over the whole data set.  In an
    hour where some regions lack a price the weights of the present regions
    are renormalized; an hour with no price at all is missing.  Returns the
    price series and a boolean series flagging renormalized hours.
    """
    if not prices:
        raise NoRegions("no price regions")
    missing_weights = set(prices) - set(mean_loads)
    if missing_weights:
        raise DataError(f"no mean load for price regions {sorted(missing_weights)}")
    weights = pd.Series({r: float(mean_loads[r]) for r in prices})
    if (weights <= 0).any() or weights.isna().any():
        raise DataError("price weights must be positive")
    frame = pd.DataFrame(dict(prices))
    present = frame.notna()
    w = present.mul(weights, axis=1)
    weighted = frame.fillna(0.0).mul(weights, axis=1).sum(axis=1)
    norm = w.sum(axis=1)
    price = (weighted / norm).where(norm > 0)
    renormalized = present.any(axis=1) & ~present.all(axis=1)
    return price.rename("Prices day-ahead"), renormalized.rename("renormalized")


def clean_outliers(series, bounds):
    """Set values outside the closed interval ``[lo, hi]`` to NaN.

    ``bounds`` is ``(lo, hi)`` with ``None`` for an open side.  Returns the
    cleaned series (same type as the input) and the number of values removed.
    """
    if isinstance(series, RegionSeries):
        cleaned, count = clean_outliers(series.values, bounds)
        return replace(series, values=cleaned), count
    lo, hi = bounds if bounds is not None else (None, None)
    values = series.copy()
    bad = pd.Series(False, index=values.index)
    if lo is not None:
        bad |= values < lo
    if hi is not None:
        bad |= values > hi
    values[bad] = np.nan
    return values, int(bad.sum())
