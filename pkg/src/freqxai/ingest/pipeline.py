"""Regional files -> area feature frame."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from freqxai.errors import DataError, NoRegions, UnknownFeatureName
from freqxai.ingest.catalog import DEFAULT_SYNCHRONOUS, LOAD, PRICES_DA, RAW_FEATURES, RAW_UNITS
from freqxai.ingest.features import FeatureFrame, engineer_features
from freqxai.ingest.regions import (
    AggregationPolicy,
    RegionSeries,
    aggregate_regions,
    clean_outliers,
    downsample_to_hourly,
    weighted_price_average,
)

MANIFEST_COLUMNS = ["file", "region", "feature", "unit", "availability"]


@dataclass
class AreaBuild:
    frame: FeatureFrame
    raw: pd.DataFrame
    diagnostics: pd.DataFrame
    outliers_removed: dict
    price_hours_renormalized: int


def build_area_frame(regions, policy: AggregationPolicy | None = None,
                     synchronous=DEFAULT_SYNCHRONOUS) -> AreaBuild:
    """Downsample, aggregate, clean and engineer one area's regional series.

    Load and generation are summed with the missing-share rule; prices are
    averaged with each region's mean load as weight.  Outlier bounds from
    the policy are applied to the aggregated series.
    """
    policy = policy or AggregationPolicy()
    if not regions:
        raise NoRegions("no regional series given")
    by_feature = defaultdict(list)
    for series in regions:
        if series.feature not in RAW_FEATURES:
            raise UnknownFeatureName(f"{series.region}: unknown feature {series.feature!r}")
        by_feature[series.feature].append(downsample_to_hourly(series))

    reference = None
    if LOAD in by_feature:
        reference = float(np.nanmean(sum(r.values for r in by_feature[LOAD]).to_numpy()))

    aggregated, diagnostics = {}, []
    renormalized = 0
    for feature in RAW_FEATURES:
        if feature not in by_feature:
            continue
        if feature == PRICES_DA:
            loads = {r.region: float(r.values.mean()) for r in by_feature.get(LOAD, [])}
            prices = {r.region: r.values for r in by_feature[feature]}
            series, flags = weighted_price_average(prices, loads)
            aggregated[feature] = series
            renormalized = int(flags.sum())
        else:
            result = aggregate_regions(by_feature[feature], policy, reference_total=reference)
            aggregated[feature] = result.series.values
            diagnostics.append(result.diagnostics)

    outliers = {}
    for feature, bounds in policy.outlier_bounds.items():
        if feature in aggregated:
            aggregated[feature], outliers[feature] = clean_outliers(aggregated[feature], bounds)

    raw = pd.DataFrame(aggregated)
    frame = engineer_features(raw, synchronous=synchronous,
                              nan_share_threshold=policy.nan_share_threshold)
    diag = pd.concat(diagnostics, ignore_index=True) if diagnostics else pd.DataFrame()
    return AreaBuild(frame, raw, diag, outliers, renormalized)


def read_region_file(path) -> pd.Series:
    """``timestamp_utc,value`` file -> float series (``nan`` allowed)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    if list(raw.columns) != ["timestamp_utc", "value"]:
        raise DataError(f"{path}: expected header timestamp_utc,value")
    stamps = pd.to_datetime(raw["timestamp_utc"], utc=True, errors="coerce", format="ISO8601")
    text = raw["value"].str.strip()
    values = pd.to_numeric(text, errors="coerce")
    bad = stamps.isna() | (values.isna() & ~text.str.lower().isin(["nan", ""]))
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DataError(f"{path}:{row + 2}: cannot parse row {raw.iloc[row].tolist()!r}")
    # exact decimal round trip; to_numeric only served to locate bad rows
    return pd.Series(text.replace("", "nan").astype(float).to_numpy(), index=pd.DatetimeIndex(stamps))


def write_region_file(series: pd.Series, path) -> None:
    frame = pd.DataFrame({
        "timestamp_utc": series.index.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "value": series.to_numpy(float),
    })
    frame.to_csv(path, index=False, na_rep="nan", lineterminator="\n")


def read_manifest(path) -> list:
    """Load every region file listed in a manifest (paths relative to the manifest)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: manifest not found")
    manifest = pd.read_csv(path, dtype=str, keep_default_na=False)
    if list(manifest.columns) != MANIFEST_COLUMNS:
        raise DataError(f"{path}: expected header {','.join(MANIFEST_COLUMNS)}")
    if manifest.empty:
        raise NoRegions(f"{path}: manifest lists no files")
    regions = []
    for row in manifest.itertuples(index=False):
        values = read_region_file(path.parent / row.file)
        regions.append(RegionSeries(row.region, row.feature, values, unit=row.unit or RAW_UNITS.get(row.feature, ""),
                                    availability=row.availability or None))
    return regions


def write_manifest(regions, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for series in regions:
        slug = series.feature.lower().replace(" ", "_").replace("-", "_")
        rel = Path(series.region) / f"{slug}.csv"
        (directory / rel.parent).mkdir(parents=True, exist_ok=True)
        write_region_file(series.values, directory / rel)
        rows.append([rel.as_posix(), series.region, series.feature, series.unit, series.availability or ""])
    manifest = directory / "manifest.csv"
    pd.DataFrame(rows, columns=MANIFEST_COLUMNS).to_csv(manifest, index=False, lineterminator="\n")
    return manifest
