"""Vocabulary of the 66 external features and the raw series they derive from."""
from __future__ import annotations

from dataclasses import dataclass

DAY_AHEAD = "day-ahead"
EX_POST = "ex-post"


@dataclass(frozen=True)
class GenerationType:
    generation: str
    ramp: str
    synchronous: bool = True


GENERATION_TYPES = (
    GenerationType("Biomass generation", "Biomass ramp"),
    GenerationType("Coal gas generation", "Coal gas ramp"),
    GenerationType("Fossil peat generation", "Fossil peat ramp"),
    GenerationType("Gas generation", "Gas ramp"),
    GenerationType("Geothermal generation", "Geothermal ramp"),
    GenerationType("Hard coal generation", "Hard coal ramp"),
    GenerationType("Lignite generation", "Lignite ramp"),
    GenerationType("Nuclear generation", "Nuclear ramp"),
    GenerationType("Oil generation", "Oil ramp"),
    GenerationType("Other generation", "Other ramp"),
    GenerationType("Other renewable generation", "Other renewables ramp"),
    GenerationType("Pumped hydro generation", "Pumped hydro ramp"),
    GenerationType("Reservoir hydro generation", "Reservoir hydro ramp"),
    GenerationType("Run-off-river hydro generation", "Run-off-river hydro ramp"),
    GenerationType("Solar generation", "Solar ramp", synchronous=False),
    GenerationType("Waste generation", "Waste ramp"),
    GenerationType("Wind offshore generation", "Offshore wind ramp", synchronous=False),
    GenerationType("Wind onshore generation", "Onshore wind ramp", synchronous=False),
)
GENERATION_COLUMNS = tuple(g.generation for g in GENERATION_TYPES)
DEFAULT_SYNCHRONOUS = tuple(g.generation for g in GENERATION_TYPES if g.synchronous)

LOAD = "Load"
LOAD_DA = "Load day-ahead"
SCHEDULED = "Scheduled generation"
SOLAR_DA = "Solar day-ahead"
OFFSHORE_DA = "Offshore wind day-ahead"
ONSHORE_DA = "Onshore wind day-ahead"
PRICES_DA = "Prices day-ahead"
TOTAL_GENERATION = "Total generation"
SYNCHRONOUS_GENERATION = "Synchronous generation"

# Raw (aggregated) inputs: 7 load/forecast/price series plus actual generation per type.
RAW_UNITS = {
    LOAD: "MW", LOAD_DA: "MW", SCHEDULED: "MW", SOLAR_DA: "MW",
    OFFSHORE_DA: "MW", ONSHORE_DA: "MW", PRICES_DA: "Currency/MWh",
    **{name: "MW" for name in GENERATION_COLUMNS},
}
RAW_FEATURES = tuple(RAW_UNITS)


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    availability: str
    unit: str
    group: str
    parents: tuple = ()


def _build():
    specs = []

    def add(name, availability, unit, group, parents=()):
        specs.append(FeatureSpec(name, availability, unit, group, tuple(parents)))

    # ex-post ramps: (X(t) - X(t - 1 h)) / 1 h
    add("Load ramp", EX_POST, "MW/h", "ramp", [LOAD])
    add("Total generation ramp", EX_POST, "MW/h", "ramp", [TOTAL_GENERATION])
    for g in GENERATION_TYPES:
        add(g.ramp, EX_POST, "MW/h", "ramp", [g.generation])
    # ex-post levels
    add(LOAD, EX_POST, "MW", "level")
    add(TOTAL_GENERATION, EX_POST, "MW", "level", GENERATION_COLUMNS)
    add(SYNCHRONOUS_GENERATION, EX_POST, "MW", "level", DEFAULT_SYNCHRONOUS)
    for g in GENERATION_TYPES:
        add(g.generation, EX_POST, "MW", "level")
    # forecast errors: day-ahead minus actual
    add("Forecast error load", EX_POST, "MW", "forecast_error", [LOAD_DA, LOAD])
    add("Forecast error total generation", EX_POST, "MW", "forecast_error", [SCHEDULED, TOTAL_GENERATION])
    add("Forecast error solar", EX_POST, "MW", "forecast_error", [SOLAR_DA, "Solar generation"])
    add("Forecast error offshore wind", EX_POST, "MW", "forecast_error",
        [OFFSHORE_DA, "Wind offshore generation"])
    add("Forecast error onshore wind", EX_POST, "MW", "forecast_error",
        [ONSHORE_DA, "Wind onshore generation"])
    add("Forecast error load ramp", EX_POST, "MW/h", "forecast_error_ramp",
        ["Load ramp day-ahead", "Load ramp"])
    add("Forecast error generation ramp", EX_POST, "MW/h", "forecast_error_ramp",
        ["Generation ramp day-ahead", "Total generation ramp"])
    add("Forecast error solar ramp", EX_POST, "MW/h", "forecast_error_ramp",
        ["Solar ramp day-ahead", "Solar ramp"])
    add("Forecast error offshore wind ramp", EX_POST, "MW/h", "forecast_error_ramp",
        ["Offshore wind ramp day-ahead", "Offshore wind ramp"])
    add("Forecast error onshore wind ramp", EX_POST, "MW/h", "forecast_error_ramp",
        ["Onshore wind ramp day-ahead", "Onshore wind ramp"])
    # day-ahead levels
    for name in (LOAD_DA, SCHEDULED, SOLAR_DA, OFFSHORE_DA, ONSHORE_DA):
        add(name, DAY_AHEAD, "MW", "level")
    # day-ahead ramps
    add("Load ramp day-ahead", DAY_AHEAD, "MW/h", "ramp", [LOAD_DA])
    add("Generation ramp day-ahead", DAY_AHEAD, "MW/h", "ramp", [SCHEDULED])
    add("Solar ramp day-ahead", DAY_AHEAD, "MW/h", "ramp", [SOLAR_DA])
    add("Offshore wind ramp day-ahead", DAY_AHEAD, "MW/h", "ramp", [OFFSHORE_DA])
    add("Onshore wind ramp day-ahead", DAY_AHEAD, "MW/h", "ramp", [ONSHORE_DA])
    # prices and calendar
    add("Price ramp day-ahead", DAY_AHEAD, "Currency/MWh/h", "ramp", [PRICES_DA])
    add(PRICES_DA, DAY_AHEAD, "Currency/MWh", "level")
    add("Hour", DAY_AHEAD, "1", "calendar")
    add("Weekday", DAY_AHEAD, "1", "calendar")
    add("Month", DAY_AHEAD, "1", "calendar")
    return {s.name: s for s in specs}


FEATURE_CATALOG = _build()
FEATURE_NAMES = tuple(FEATURE_CATALOG)
DAY_AHEAD_FEATURES = tuple(n for n, s in FEATURE_CATALOG.items() if s.availability == DAY_AHEAD)

RAMPS = {s.name: s.parents[0] for s in FEATURE_CATALOG.values() if s.group == "ramp"}
FORECAST_ERRORS = {s.name: s.parents for s in FEATURE_CATALOG.values()
                   if s.group in ("forecast_error", "forecast_error_ramp")}
