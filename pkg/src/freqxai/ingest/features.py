"""Feature engineering and the hourly feature frame."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import pandas as pd

from freqxai.errors import DataError, UnknownFeatureName
from freqxai.ingest.catalog import (
    DAY_AHEAD,
    DEFAULT_SYNCHRONOUS,
    FEATURE_CATALOG,
    FORECAST_ERRORS,
    GENERATION_COLUMNS,
    RAMPS,
    RAW_FEATURES,
    SYNCHRONOUS_GENERATION,
    TOTAL_GENERATION,
)

RAMP_HOURS = 1.0
SCOPES = ("full", "day-ahead")


@dataclass
class FeatureFrame:
    """Hourly feature matrix with per-column availability tag and unit."""

    data: pd.DataFrame
    availability: dict = field(default_factory=dict)
    units: dict = field(default_factory=dict)
    dropped: list = field(default_factory=list)

    def __post_init__(self):
        for name in self.data.columns:
            if name not in FEATURE_CATALOG:
                raise UnknownFeatureName(name)
            spec = FEATURE_CATALOG[name]
            self.availability.setdefault(name, spec.availability)
            self.units.setdefault(name, spec.unit)

    @property
    def columns(self) -> list:
        return list(self.data.columns)

    @property
    def index(self) -> pd.DatetimeIndex:
        return self.data.index

    def columns_for(self, scope: str = "full") -> list:
        if scope not in SCOPES:
            raise ValueError(f"scope must be one of {SCOPES}, got {scope!r}")
        if scope == "full":
            return self.columns
        return [c for c in self.columns if self.availability[c] == DAY_AHEAD]

    def select(self, scope: str = "full") -> pd.DataFrame:
        return self.data[self.columns_for(scope)]

    def missing_counts(self) -> dict:
        return {c: int(n) for c, n in self.data.isna().sum().items()}

    def metadata(self) -> dict:
        counts = self.missing_counts()
        return {
            "n_rows": len(self.data),
            "columns": [
                {"name": c, "availability": self.availability[c], "unit": self.units[c],
                 "missing": counts[c]}
                for c in self.columns
            ],
            "dropped": list(self.dropped),
        }

    def to_csv(self, path, extra_metadata: dict | None = None) -> Path:
        """Write the table and a ``<path>.meta.json`` sidecar; returns the sidecar path."""
        path = Path(path)
        frame = self.data.copy()
        frame.index = frame.index.strftime("%Y-%m-%dT%H:%M:%SZ")
        frame.index.name = "hour_utc"
        frame.to_csv(path, na_rep="nan", lineterminator="\n")
        meta = self.metadata()
        if extra_metadata:
            meta.update(extra_metadata)
        sidecar = path.with_name(path.name + ".meta.json")
        sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return sidecar

    @classmethod
    def read_csv(cls, path) -> "FeatureFrame":
        path = Path(path)
        data = pd.read_csv(path, index_col="hour_utc", na_values=["nan"], float_precision="round_trip")
        data.index = pd.to_datetime(data.index, utc=True)
        data = data.astype(float)
        sidecar = path.with_name(path.name + ".meta.json")
        availability, units, dropped = {}, {}, []
        if sidecar.exists():
            meta = json.loads(sidecar.read_text())
            availability = {c["name"]: c["availability"] for c in meta["columns"]}
            units = {c["name"]: c["unit"] for c in meta["columns"]}
            dropped = meta.get("dropped", [])
        return cls(data, availability, units, dropped)


def _poisoned_sum(frame: pd.DataFrame) -> pd.Series:
    return frame.sum(axis=1).where(frame.notna().all(axis=1))


def engineer_features(raw, synchronous=DEFAULT_SYNCHRONOUS,
                      nan_share_threshold: float | None = None) -> FeatureFrame:
    """Build the engineered hourly feature frame from area-level raw series.

    ``raw`` maps raw feature names (load, day-ahead forecasts, prices, actual
    generation per type) to hourly series.  Emitted on top of the levels:

    * ``Total generation`` and ``Synchronous generation`` (sum over the
      generation types listed in ``synchronous``, by default everything but
      wind and solar), missing whenever any summand is missing;
    * ramps ``(X(t) - X(t - 1 h)) / 1 h`` for every level that has one;
    * forecast errors ``day-ahead - actual`` for levels and ramps;
    * calendar features ``Hour`` (0-23), ``Weekday`` (0 = Monday) and
      ``Month`` (1-12) of the UTC hour.

    Columns whose missing share exceeds ``nan_share_threshold`` are dropped
    and listed in ``FeatureFrame.dropped``.
    """
    raw = pd.DataFrame(dict(raw)) if isinstance(raw, Mapping) else raw.copy()
    unknown = [c for c in raw.columns if c not in RAW_FEATURES]
    if unknown:
        raise UnknownFeatureName(f"not raw feature names: {unknown}")
    if raw.empty:
        raise DataError("no raw series given")
    index = pd.DatetimeIndex(raw.index)
    index = index.tz_localize("UTC") if index.tz is None else index.tz_convert("UTC")
    raw.index = index
    full_index = pd.date_range(index.min().floor("h"), index.max(), freq="h", name="hour_utc")
    if not index.isin(full_index).all():
        raise DataError("raw series are not on whole UTC hours")
    raw = raw.reindex(full_index).astype(float)

    levels = dict(raw.items())
    gen_present = [c for c in GENERATION_COLUMNS if c in levels]
    if gen_present:
        levels[TOTAL_GENERATION] = _poisoned_sum(raw[gen_present])
    sync_present = [c for c in synchronous if c in levels]
    unknown_sync = [c for c in synchronous if c not in GENERATION_COLUMNS]
    if unknown_sync:
        raise UnknownFeatureName(f"synchronous list holds non-generation names {unknown_sync}")
    if sync_present:
        levels[SYNCHRONOUS_GENERATION] = _poisoned_sum(raw[sync_present])

    columns = dict(levels)
    for ramp, parent in RAMPS.items():
        if parent in levels:
            columns[ramp] = levels[parent].diff() / RAMP_HOURS
    for name, (day_ahead, actual) in FORECAST_ERRORS.items():
        if day_ahead in columns and actual in columns:
            columns[name] = columns[day_ahead] - columns[actual]
    columns["Hour"] = pd.Series(full_index.hour, index=full_index, dtype=float)
    columns["Weekday"] = pd.Series(full_index.weekday, index=full_index, dtype=float)
    columns["Month"] = pd.Series(full_index.month, index=full_index, dtype=float)

    ordered = [name for name in FEATURE_CATALOG if name in columns]
    data = pd.DataFrame({name: columns[name] for name in ordered}, index=full_index)
    dropped = []
    if nan_share_threshold is not None:
        shares = data.isna().mean()
        dropped = [c for c in data.columns if shares[c] > nan_share_threshold]
        data = data.drop(columns=dropped)
    return FeatureFrame(data, dropped=dropped)


def join_target(frame: FeatureFrame, target: pd.Series, scope: str = "full"):
    """Align features with a target series; rows with a missing target are dropped."""
    X = frame.select(scope)
    y = target.reindex(X.index)
    keep = y.notna().to_numpy()
    return X.loc[keep], y.loc[keep]
