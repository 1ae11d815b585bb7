"""Synthetic areas with known feature -> indicator relationships.

Every hour ``i`` of the generated frequency trace is

    f(t_i + k) = jump_i * edge(k) + jump_{i-1} * edge(k + 3600) + offset(t) + noise

where ``edge`` rises linearly over ``rise`` seconds and then decays with a
300 s time constant, and ``offset`` moves linearly from ``offset_{i-1}`` to
``offset_i`` during the same rise time.  The hourly ``jump`` and ``offset``
amplitudes are explicit functions of the generated energy-system features,
so Nadir is close to ``jump + offset``, RoCoF close to
``(jump + offset_i - offset_{i-1}) / rise`` and Integral dominated by
``3601 * offset``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from freqxai.ingest.catalog import (
    DAY_AHEAD,
    EX_POST,
    GENERATION_COLUMNS,
    LOAD,
    LOAD_DA,
    OFFSHORE_DA,
    ONSHORE_DA,
    PRICES_DA,
    RAW_UNITS,
    SCHEDULED,
    SOLAR_DA,
)
from freqxai.ingest.regions import RegionSeries, weighted_price_average
from freqxai.signal import SAMPLES_PER_HOUR, FrequencyTrace

SCENARIOS = ("ce_like", "gb_like", "nordic_like")
DEFAULT_START = pd.Timestamp("2019-01-07", tz="UTC")  # a Monday
DECAY_SECONDS = 300.0
REGION_SHARES = {"R1": 0.5, "R2": 0.3, "R3": 0.2}
PRICE_OFFSETS = {"R1": 2.0, "R2": -1.0, "R3": 0.5}

# Fraction of capacity per minute; only ratios matter for relative ramp speeds.
RAMP_RATES = {
    "Pumped hydro ramp": 0.40,
    "Reservoir hydro ramp": 0.40,
    "Run-off-river hydro ramp": 0.30,
    "Gas ramp": 0.15,
    "Oil ramp": 0.15,
    "Biomass ramp": 0.06,
    "Hard coal ramp": 0.04,
    "Waste ramp": 0.04,
    "Lignite ramp": 0.02,
    "Nuclear ramp": 0.02,
}


@dataclass
class SyntheticArea:
    scenario: str
    seed: int
    trace: FrequencyTrace
    raw: pd.DataFrame
    regions: list
    designed: pd.DataFrame
    truth: dict = field(default_factory=dict)


def _edge(rise: int) -> np.ndarray:
    k = np.arange(2 * SAMPLES_PER_HOUR + 1, dtype=float)
    return np.where(k < rise, k / rise, np.exp(-(k - rise) / DECAY_SECONDS))


def _ar1(rng, n, phi, sigma):
    out = np.empty(n)
    x = rng.normal(0, sigma / np.sqrt(1 - phi**2))
    for i in range(n):
        x = phi * x + rng.normal(0, sigma)
        out[i] = x
    return out


def _diff(x):
    return np.concatenate([[np.nan], np.diff(x)])


_SCENARIO_SYSTEM = {
    "ce_like": dict(load=320_000, daily=20_000, load_noise=4_000, solar=40_000, onshore=60_000,
                    offshore=8_000, price=45.0, rise=60,
                    mix={"Nuclear generation": 0.0, "Lignite generation": 0.12, "Hard coal generation": 0.12,
                         "Gas generation": 0.14, "Biomass generation": 0.06, "Run-off-river hydro generation": 0.08,
                         "Reservoir hydro generation": 0.04, "Waste generation": 0.02, "Oil generation": 0.01,
                         "Other generation": 0.04, "Other renewable generation": 0.01, "Coal gas generation": 0.01,
                         "Geothermal generation": 0.002},
                    absent=("Fossil peat generation",)),
    "nordic_like": dict(load=45_000, daily=4_000, load_noise=600, solar=600, onshore=9_000,
                        offshore=0, price=35.0, rise=30,
                        mix={"Nuclear generation": 0.0, "Reservoir hydro generation": 0.45,
                             "Run-off-river hydro generation": 0.10, "Biomass generation": 0.08,
                             "Other generation": 0.03, "Gas generation": 0.01, "Fossil peat generation": 0.01,
                             "Waste generation": 0.01, "Hard coal generation": 0.01, "Oil generation": 0.002},
                        absent=("Lignite generation", "Pumped hydro generation", "Coal gas generation",
                                "Geothermal generation", "Other renewable generation",
                                "Wind offshore generation")),
    "gb_like": dict(load=30_000, daily=6_000, load_noise=500, solar=6_000, onshore=8_000,
                    offshore=8_000, price=50.0, rise=60,
                    mix={"Nuclear generation": 0.0, "Gas generation": 0.35, "Hard coal generation": 0.05,
                         "Biomass generation": 0.08, "Other generation": 0.02, "Oil generation": 0.002,
                         "Run-off-river hydro generation": 0.02},
                    absent=("Lignite generation", "Fossil peat generation", "Coal gas generation",
                            "Geothermal generation", "Other renewable generation",
                            "Reservoir hydro generation", "Waste generation")),
}


def _energy_system(rng, index, cfg):
    """Hourly raw series (MW, Currency/MWh) plus the latent noise components."""
    n = len(index)
    hour = index.hour.to_numpy()
    doy = index.dayofyear.to_numpy()
    weekend = (index.weekday.to_numpy() >= 5).astype(float)
    shape = -np.cos(2 * np.pi * (hour - 4) / 24)
    smooth_load = (cfg["load"] + cfg["daily"] * shape * (1 - 0.3 * weekend)
                   + 0.05 * cfg["load"] * np.cos(2 * np.pi * doy / 365))
    u = rng.normal(0, cfg["load_noise"], n)
    load = smooth_load + u

    daylight = np.clip(np.sin(np.pi * (hour - 6) / 12), 0, None)
    cloud = 0.65 + 0.35 * np.tanh(_ar1(rng, n, 0.9, 0.4))
    solar = cfg["solar"] * daylight * cloud
    onshore = cfg["onshore"] / (1 + np.exp(-_ar1(rng, n, 0.95, 0.3)))
    offshore = cfg["offshore"] / (1 + np.exp(-_ar1(rng, n, 0.95, 0.3)))
    residual = smooth_load - solar - onshore - offshore

    latent = {"load_noise": u}
    gen = {"Solar generation": solar, "Wind onshore generation": onshore,
           "Wind offshore generation": offshore}
    for name, share in cfg["mix"].items():
        sigma = max(0.02 * share * cfg["load"], 1.0)
        noise = rng.normal(0, sigma, n)
        latent[name] = noise
        gen[name] = share * residual + noise
    # Nuclear counter-moves against load noise; correlated with load ramps, not causal.
    nuclear_noise = rng.normal(0, 0.01 * cfg["load"], n)
    gen["Nuclear generation"] = 0.2 * cfg["load"] - 0.7 * u + nuclear_noise
    latent["Nuclear generation"] = nuclear_noise
    pumped_noise = rng.normal(0, 0.0025 * cfg["load"], n)
    gen["Pumped hydro generation"] = 0.02 * cfg["load"] + pumped_noise + 0.02 * cfg["daily"] * shape
    latent["Pumped hydro generation"] = pumped_noise
    # Gas absorbs part of the load noise (it balances).
    gen["Gas generation"] = gen["Gas generation"] + 0.5 * u
    for name in cfg["absent"]:
        gen.pop(name, None)

    total = sum(gen.values())
    fe_load = rng.normal(0, 0.01 * cfg["load"], n)
    fe_gen = rng.normal(0, 0.008 * cfg["load"], n)
    fe_solar = rng.normal(0, 0.05, n) * solar
    fe_onshore = rng.normal(0, 0.05 * max(cfg["onshore"], 1), n)
    fe_offshore = rng.normal(0, 0.05 * max(cfg["offshore"], 1), n)
    price = (cfg["price"] + 12 * (smooth_load - cfg["load"]) / max(cfg["daily"], 1)
             - 10 * (onshore + offshore) / max(cfg["onshore"] + cfg["offshore"], 1)
             + rng.normal(0, 3, n))
    raw = {
        LOAD: load,
        LOAD_DA: load + fe_load,
        SCHEDULED: total + fe_gen,
        SOLAR_DA: solar + fe_solar,
        ONSHORE_DA: onshore + fe_onshore,
        PRICES_DA: price,
        **gen,
    }
    if cfg["offshore"]:
        raw[OFFSHORE_DA] = offshore + fe_offshore
    latent.update(fe_load=fe_load, fe_gen=fe_gen, fe_onshore=fe_onshore, total=total)
    ordered = {name: raw[name] for name in RAW_UNITS if name in raw}
    return pd.DataFrame(ordered, index=index), latent


def _design(scenario, raw, latent, rng, noise):
    """Hourly jump / offset amplitudes (Hz) and the ground-truth record."""
    n = len(raw)
    R = _diff(raw[LOAD].to_numpy())
    fe_load_ramp = _diff(latent["fe_load"])
    fe_gen_ramp = _diff(latent["fe_gen"])
    z = lambda x, s: np.nan_to_num(x / s)  # noqa: E731
    idio = noise * rng.normal(0, 1, n)

    if scenario == "ce_like":
        threshold = 6000.0
        pumped = _diff(raw["Pumped hydro generation"].to_numpy())
        lignite = _diff(raw["Lignite generation"].to_numpy())
        jump = (-0.04 * z(R, 6000) - 0.05 * (np.nan_to_num(R) > threshold)
                + 0.03 * z(latent["fe_onshore"], 3000) * z(fe_load_ramp, 4243)
                + 0.012 * z(pumped, 1131) - 0.012 * z(lignite, 1000)
                + 0.008 * idio)
        offset = -0.006 * z(latent["fe_load"], 3200) + 0.006 * z(latent["fe_gen"], 2560)
        truth = dict(target="nadir", driver="Load ramp", step_feature="Load ramp",
                     step_threshold=threshold,
                     interaction=("Forecast error onshore wind", "Forecast error load ramp"),
                     leaky_feature="Nuclear ramp", driving=["Pumped hydro ramp"],
                     offsetting=["Lignite ramp"], balancing=[])
    elif scenario == "nordic_like":
        hydro = _diff(raw["Reservoir hydro generation"].to_numpy())
        nuclear = _diff(raw["Nuclear generation"].to_numpy())
        scheduled_ramp = _diff(raw[SCHEDULED].to_numpy())
        jump = (0.02 * z(scheduled_ramp - np.nanmean(scheduled_ramp), 1500)
                + 0.015 * z(hydro, 600) - 0.01 * z(nuclear, 500)
                + 0.006 * idio)
        offset = -0.03 * z(fe_gen_ramp, 510) - 0.015 * z(fe_load_ramp, 640)
        truth = dict(target="nadir", driver="Forecast error generation ramp",
                     day_ahead_driver="Generation ramp day-ahead",
                     interaction=None, leaky_feature=None, driving=["Reservoir hydro ramp"],
                     offsetting=["Nuclear ramp"], balancing=[])
    elif scenario == "gb_like":
        wind_ramp = _diff(raw["Wind onshore generation"].to_numpy())
        gas = _diff(raw["Gas generation"].to_numpy() - 0.5 * latent["load_noise"])
        pumped = _diff(raw["Pumped hydro generation"].to_numpy())
        price = raw[PRICES_DA].to_numpy()
        sync = sum(raw[c].to_numpy() for c in raw.columns
                   if c in GENERATION_COLUMNS and "Wind" not in c and "Solar" not in c)
        low_inertia = sync < np.nanquantile(sync, 0.15)
        jump = (-0.02 * z(wind_ramp, 300) * (1 + low_inertia)
                - 0.015 * z(gas, 7500) + 0.008 * z(pumped, 100)
                + 0.02 * idio)
        offset = 0.01 * z(price - np.mean(price), 10) - 0.004 * z(fe_gen_ramp, 340)
        truth = dict(target="msd", driver="Prices day-ahead", interaction=None,
                     leaky_feature=None, driving=["Pumped hydro ramp"], offsetting=[],
                     balancing=["Gas ramp"])
    else:
        raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    return np.nan_to_num(jump), np.nan_to_num(offset), truth


def _trace(start, jump, offset, rise, noise_hz, rng) -> FrequencyTrace:
    edge = _edge(rise)
    k = np.arange(SAMPLES_PER_HOUR)
    prev_jump = np.concatenate([[0.0], jump[:-1]])
    prev_offset = np.concatenate([[offset[0]], offset[:-1]])
    blend = np.minimum(k / rise, 1.0)
    hours = (jump[:, None] * edge[None, :SAMPLES_PER_HOUR]
             + prev_jump[:, None] * edge[None, SAMPLES_PER_HOUR:2 * SAMPLES_PER_HOUR]
             + prev_offset[:, None] * (1 - blend)[None, :] + offset[:, None] * blend[None, :])
    closing = jump[-1] * edge[SAMPLES_PER_HOUR] + offset[-1]
    values = np.concatenate([hours.ravel(), [closing]])
    if noise_hz > 0:
        values = values + rng.normal(0, noise_hz, values.shape)
    return FrequencyTrace(start, values)


def _split_regions(raw: pd.DataFrame, rng) -> list:
    regions = []
    mean_loads = {r: share * raw[LOAD].mean() for r, share in REGION_SHARES.items()}
    prices = {}
    for name in raw.columns:
        availability = DAY_AHEAD if name in (LOAD_DA, SCHEDULED, SOLAR_DA, ONSHORE_DA,
                                             OFFSHORE_DA, PRICES_DA) else EX_POST
        for region, share in REGION_SHARES.items():
            if name == PRICES_DA:
                values = raw[name] + PRICE_OFFSETS[region]
                prices[region] = values
            else:
                values = raw[name] * share
            values = values.copy()
            if region == "R3" and name == "Waste generation":
                values[rng.random(len(values)) < 0.35] = np.nan
            if region == "R2" and name == "Biomass generation":
                values[rng.random(len(values)) < 0.03] = np.nan
            regions.append(RegionSeries(region, name, values, unit=RAW_UNITS[name],
                                        availability=availability))
    # The area price is by construction the load-weighted regional average.
    area_price, _ = weighted_price_average(prices, mean_loads)
    raw[PRICES_DA] = area_price
    # One region reports its load at 15-minute resolution.
    for series in regions:
        if series.region == "R1" and series.feature == LOAD:
            quarter = series.values.reindex(
                pd.date_range(series.values.index[0], periods=4 * len(series.values), freq="15min"),
                method="ffill")
            series.values = quarter + np.tile([150.0, -150.0, 50.0, -50.0], len(series.values))
    return regions


def generate_synthetic_area(seed: int, n_days: int, scenario: str = "ce_like", noise: float = 1.0,
                            start=DEFAULT_START) -> SyntheticArea:
    """Deterministic synthetic area: frequency trace, raw features, regional split, ground truth.

    ``noise=0`` removes both the measurement noise of the trace and the
    idiosyncratic hourly component, leaving indicators that are functions of
    the features alone.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    if n_days < 1:
        raise ValueError("n_days must be >= 1")
    rng = np.random.default_rng(seed)
    cfg = _SCENARIO_SYSTEM[scenario]
    start = pd.Timestamp(start)
    start = start.tz_localize("UTC") if start.tzinfo is None else start.tz_convert("UTC")
    # One extra leading hour so that the first indicator hour has defined ramps.
    index = pd.date_range(start - pd.Timedelta(hours=1), periods=24 * n_days + 1, freq="h",
                          name="hour_utc")
    raw, latent = _energy_system(rng, index, cfg)
    jump, offset, truth = _design(scenario, raw, latent, rng, noise)
    trace = _trace(start, jump[1:], offset[1:], cfg["rise"], 0.002 * noise, rng)
    regions = _split_regions(raw, rng)
    designed = pd.DataFrame({"jump": jump, "offset": offset}, index=index).iloc[1:]
    truth.update(scenario=scenario, seed=seed, noise=noise, rise_seconds=cfg["rise"],
                 ramp_rates={k: v for k, v in RAMP_RATES.items()
                             if k.replace(" ramp", "") in " ".join(raw.columns)})
    return SyntheticArea(scenario, seed, trace, raw, regions, designed, truth)
