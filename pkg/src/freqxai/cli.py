"""Command-line pipeline: synth -> extract -> features -> train -> explain -> report.

Every stage reads one YAML config; relative paths in it are resolved against
the config file's directory.  Each command only reads files written by
earlier commands and writes deterministic artifacts with a JSON sidecar
carrying the config hash, the seed and the package version.

Exit codes: 0 success, 1 usage or config error, 2 data error,
3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from freqxai import __version__
from freqxai.analysis import (
    DEFAULT_SPEED_THRESHOLD,
    fit_daily_profile,
    pearson_matrix,
    performance_entry,
    relative_ramp_speeds,
)
from freqxai.boosting import DEFAULT_GRID, DatasetSplit, GbtModel, GbtParams, grid_search_cv, split_dataset, train_gbt
from freqxai.errors import ConstantFeature, DataError, InvariantViolation
from freqxai.explain import (
    daily_profile_decomposition,
    dependency_data,
    interventional_shap,
    mean_abs_importance,
    sample_background,
    shap_feature_direction,
    shap_interactions,
    union_of_top,
)
from freqxai.ingest import AggregationPolicy, FeatureFrame, build_area_frame, join_target, read_manifest, write_manifest
from freqxai.ingest.catalog import DEFAULT_SYNCHRONOUS, RAMPS
from freqxai.ingest.synthetic import SCENARIOS, generate_synthetic_area
from freqxai.signal import (
    AREA_ROCOF_PARAMS,
    INDICATORS,
    IndicatorTable,
    RocofParams,
    extract_indicators,
    read_frequency_csv,
    write_frequency_csv,
)

logger = logging.getLogger("freqxai")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANT = 0, 1, 2, 3
SCOPES = ("full", "day-ahead")
AUDIT_TOLERANCE = 1e-8
DAILY_TOLERANCE = 1e-10
SCENARIO_AREAS = {"ce_like": "CE", "gb_like": "GB", "nordic_like": "Nordic"}


class UsageError(Exception):
    """Bad command line or config; exit code 1."""


# ---------------------------------------------------------------- config


@dataclass
class AreaConfig:
    name: str
    frequency: Path
    manifest: Path
    rocof: RocofParams
    policy: AggregationPolicy
    synchronous: tuple
    ramp_rates: dict


@dataclass
class PipelineConfig:
    path: Path
    raw: dict
    seed: int
    output_dir: Path
    areas: list
    targets: list
    scopes: list
    params: GbtParams
    grid: dict | None
    cv_folds: int
    background_size: int
    top_k: int
    daily_top_k: int
    interactions: bool
    interaction_rows: int
    speed_threshold: float
    missing_tolerance: int = 0
    hash: str = field(default="")

    def area(self, name: str) -> AreaConfig:
        for area in self.areas:
            if area.name == name:
                return area
        raise UsageError(f"area {name!r} not in config (have {[a.name for a in self.areas]})")


def config_hash(raw: dict) -> str:
    """Hash of the parsed config; the output location does not affect artifact content."""
    raw = {k: v for k, v in raw.items() if k != "output_dir"}
    text = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _section(raw, key):
    value = raw.get(key) or {}
    if not isinstance(value, dict):
        raise UsageError(f"config section {key!r} must be a mapping")
    return value


def load_config(path, overrides: dict | None = None) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise UsageError(f"{path}: config file not found")
    try:
        raw = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        raise UsageError(f"{path}: invalid YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError(f"{path}: config must be a mapping")
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    base = path.parent
    seed = raw.get("seed")
    if not isinstance(seed, int):
        raise UsageError("config needs an integer 'seed'")

    areas = []
    for entry in raw.get("areas") or []:
        try:
            name = entry["name"]
            rocof = entry.get("rocof")
            if rocof is None and name not in AREA_ROCOF_PARAMS:
                raise UsageError(f"area {name!r}: no default RoCoF parameters; set 'rocof'")
            rocof = RocofParams(**rocof) if rocof else AREA_ROCOF_PARAMS[name]
            policy_raw = entry.get("policy") or {}
            policy = AggregationPolicy(
                nan_share_threshold=policy_raw.get("nan_share_threshold", 0.30),
                region_types=policy_raw.get("region_types") or {},
                outlier_bounds=policy_raw.get("outlier_bounds") or {},
            )
            areas.append(AreaConfig(
                name=name,
                frequency=base / entry["frequency"],
                manifest=base / entry["manifest"],
                rocof=rocof,
                policy=policy,
                synchronous=tuple(entry.get("synchronous") or DEFAULT_SYNCHRONOUS),
                ramp_rates=dict(entry.get("ramp_rates") or {}),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"bad area entry {entry!r}: {exc}") from None
    if not areas:
        raise UsageError("config lists no areas")

    train = _section(raw, "train")
    targets = list(train.get("targets") or INDICATORS)
    for t in targets:
        if t not in INDICATORS:
            raise UsageError(f"unknown target {t!r}; choose from {list(INDICATORS)}")
    scopes = list(train.get("scopes") or SCOPES)
    for s in scopes:
        if s not in SCOPES:
            raise UsageError(f"unknown feature scope {s!r}; choose from {list(SCOPES)}")
    try:
        params = GbtParams.from_dict({**(train.get("params") or {}), "seed": seed})
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad GBT parameters: {exc}") from None
    grid = train.get("grid")
    if grid == "default":
        grid = DEFAULT_GRID
    elif grid is not None and not isinstance(grid, dict):
        raise UsageError("train.grid must be null, 'default' or a mapping of parameter lists")

    explain = _section(raw, "explain")
    report = _section(raw, "report")
    cfg = PipelineConfig(
        path=path, raw=raw, seed=seed,
        output_dir=base / raw.get("output_dir", "results"),
        areas=areas, targets=targets, scopes=scopes, params=params, grid=grid,
        cv_folds=int(train.get("cv_folds", 5)),
        background_size=int(explain.get("background_size", 100)),
        top_k=int(explain.get("top_k", 5)),
        daily_top_k=int(explain.get("daily_top_k", 4)),
        interactions=bool(explain.get("interactions", True)),
        interaction_rows=int(explain.get("interaction_rows", 500)),
        speed_threshold=float(report.get("speed_threshold", DEFAULT_SPEED_THRESHOLD)),
        missing_tolerance=int(raw.get("missing_tolerance", 0)),
    )
    cfg.hash = config_hash(raw)
    return cfg


# ---------------------------------------------------------------- artifacts


def provenance(cfg: PipelineConfig, **extra) -> dict:
    return {"config_hash": cfg.hash, "seed": cfg.seed, "version": __version__, **extra}


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False, default=_jsonable) + "\n")


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.ndarray, tuple)):
        return list(value)
    raise TypeError(f"cannot serialize {type(value)}")


def _clean(value):
    """NaN/inf -> None so JSON stays strict."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (float, np.floating)):
        return float(value) if np.isfinite(value) else None
    return value


def write_table(frame: pd.DataFrame, path: Path, meta: dict, index: bool = False) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=index, na_rep="nan", lineterminator="\n")
    write_json(path.with_name(path.name + ".meta.json"), _clean(meta))


def file_digest(*paths) -> str:
    digest = hashlib.sha256()
    for p in paths:
        digest.update(Path(p).read_bytes())
    return digest.hexdigest()[:16]


def slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def _stamp(index) -> pd.Index:
    return pd.DatetimeIndex(index).strftime("%Y-%m-%dT%H:%M:%SZ")


def area_dir(cfg, area) -> Path:
    return cfg.output_dir / area.name


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise DataError(f"{path}: {what} not found; run the earlier pipeline stage first")
    return path


# ---------------------------------------------------------------- commands


def cmd_synth(args) -> int:
    """Write synthetic frequency and regional files plus a ready-to-run config."""
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scenarios = args.scenarios.split(",")
    for s in scenarios:
        if s not in SCENARIOS:
            raise UsageError(f"unknown scenario {s!r}; choose from {list(SCENARIOS)}")
    areas = []
    for k, scenario in enumerate(scenarios):
        name = SCENARIO_AREAS[scenario]
        area = generate_synthetic_area(args.seed + k, args.days, scenario, noise=args.noise)
        folder = out / name
        folder.mkdir(parents=True, exist_ok=True)
        write_frequency_csv(area.trace, folder / "frequency.csv")
        write_manifest(area.regions, folder / "regions")
        write_json(folder / "truth.json", _clean({**area.truth, "version": __version__}))
        areas.append({
            "name": name,
            "frequency": f"{name}/frequency.csv",
            "manifest": f"{name}/regions/manifest.csv",
            "policy": {"nan_share_threshold": 0.30},
            "ramp_rates": area.truth["ramp_rates"],
        })
        logger.info("wrote synthetic %s area (%s) to %s", name, scenario, folder)
    config = {
        "seed": args.seed,
        "output_dir": "results",
        "areas": areas,
        "train": {"targets": list(INDICATORS), "scopes": list(SCOPES), "grid": None, "cv_folds": 5,
                  "params": {"max_depth": 4, "learning_rate": 0.1, "subsample": 0.8, "max_rounds": 500,
                             "early_stopping_rounds": 20}},
        "explain": {"background_size": 100, "top_k": 5, "daily_top_k": 4, "interactions": True,
                    "interaction_rows": 500},
        "report": {"speed_threshold": DEFAULT_SPEED_THRESHOLD},
    }
    (out / "config.yaml").write_text(yaml.safe_dump(config, sort_keys=False))
    print(out / "config.yaml")
    return EXIT_OK


def _areas(cfg, args):
    return [cfg.area(args.area)] if getattr(args, "area", None) else cfg.areas


def cmd_extract(cfg: PipelineConfig, args) -> int:
    for area in _areas(cfg, args):
        trace = read_frequency_csv(_require(area.frequency, "frequency file"))
        table = extract_indicators(trace, area.rocof, missing_tolerance=cfg.missing_tolerance)
        path = area_dir(cfg, area) / "indicators.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(path)
        write_json(path.with_name(path.name + ".meta.json"), _clean(provenance(
            cfg, area=area.name, input=file_digest(area.frequency), rows=len(table.hours),
            rocof={"smoothing_window": area.rocof.smoothing_window,
                   "search_half_width": area.rocof.search_half_width},
            flagged_samples=int(trace.n_flagged), missing_tolerance=cfg.missing_tolerance)))
        print(f"{area.name}: {len(table.hours)} indicator rows -> {path}")
    return EXIT_OK


def cmd_features(cfg: PipelineConfig, args) -> int:
    for area in _areas(cfg, args):
        regions = read_manifest(_require(area.manifest, "manifest"))
        build = build_area_frame(regions, area.policy, synchronous=area.synchronous)
        folder = area_dir(cfg, area)
        folder.mkdir(parents=True, exist_ok=True)
        build.frame.to_csv(folder / "features.csv", provenance(
            cfg, area=area.name, outliers_removed=build.outliers_removed,
            price_hours_renormalized=build.price_hours_renormalized))
        write_table(build.diagnostics, folder / "aggregation.csv", provenance(cfg, area=area.name))
        omitted = build.diagnostics[~build.diagnostics["included"]] if len(build.diagnostics) else []
        print(f"{area.name}: {len(build.frame.columns)} features, {len(omitted)} omitted region series")
    return EXIT_OK


def _load_inputs(cfg, area):
    folder = area_dir(cfg, area)
    frame = FeatureFrame.read_csv(_require(folder / "features.csv", "feature table"))
    indicators = IndicatorTable.read_csv(_require(folder / "indicators.csv", "indicator table")).to_frame()
    return frame, indicators


def _model_stem(target, scope):
    return f"{target}_{scope}"


def cmd_train(cfg: PipelineConfig, args) -> int:
    targets = [args.target] if args.target else cfg.targets
    scopes = [args.scope] if args.scope else cfg.scopes
    for t in targets:
        if t not in INDICATORS:
            raise UsageError(f"unknown target {t!r}; choose from {list(INDICATORS)}")
    for area in _areas(cfg, args):
        frame, indicators = _load_inputs(cfg, area)
        folder = area_dir(cfg, area) / "models"
        for target in targets:
            # one split per target so both scopes are scored on the same test rows
            X_all, y_all = join_target(frame, indicators[target], "full")
            split = split_dataset(y_all.to_numpy(), cfg.seed)
            for scope in scopes:
                X = X_all[frame.columns_for(scope)]
                _train_one(cfg, area, folder, target, scope, X, y_all, split)
    return EXIT_OK


def _train_one(cfg, area, folder, target, scope, X, y, split: DatasetSplit):
    from freqxai.analysis import r2_score

    stem = _model_stem(target, scope)
    y_np = y.to_numpy()
    X_train, y_train = X.iloc[split.train], y_np[split.train]
    params = cfg.params
    grid_results = None
    if cfg.grid:
        params, grid_results = grid_search_cv(X_train, y_train, cfg.grid, params, k=cfg.cv_folds, seed=cfg.seed)
    model = train_gbt(X_train, y_train, X.iloc[split.valid], y_np[split.valid], params)
    profile = fit_daily_profile(X.index[split.train], y_train)
    test_index = X.index[split.test]
    pred = model.predict(X.iloc[split.test])
    r2_test = r2_score(y_np[split.test], pred)
    model.metadata.update(provenance(cfg, area=area.name, target=target, scope=scope, r2_test=r2_test))
    folder.mkdir(parents=True, exist_ok=True)
    model.save(folder / f"{stem}.json")
    write_json(folder / f"{stem}.split.json", {**split.to_dict(), "hours": list(_stamp(X.index))})
    meta = provenance(cfg, area=area.name, target=target, scope=scope)
    log = pd.DataFrame(model.metadata["curve"])
    write_table(log, folder / f"{stem}.log.csv", meta)
    predictions = pd.DataFrame({
        "hour_utc": _stamp(test_index),
        "target": y_np[split.test],
        "prediction": pred,
        "daily_profile": profile.predict(test_index),
    })
    write_table(predictions, folder / f"{stem}.predictions.csv", {**meta, "r2_test": r2_test})
    if grid_results is not None:
        grid_results = grid_results.assign(fold_r2=grid_results["fold_r2"].map(json.dumps))
        write_table(grid_results, folder / f"{stem}.grid.csv", meta)
    print(f"{area.name} {stem}: {len(model.trees)} trees, test R2 = {r2_test:.4f}")


def _audit(value: float, tolerance: float, what: str) -> None:
    if not value <= tolerance:
        raise InvariantViolation(f"{what}: additivity error {value:.3e} exceeds {tolerance:.0e}")


def cmd_explain(cfg: PipelineConfig, args) -> int:
    targets = [args.target] if args.target else cfg.targets
    scope = args.scope or "full"
    for area in _areas(cfg, args):
        frame, _ = _load_inputs(cfg, area)
        models = area_dir(cfg, area) / "models"
        out = area_dir(cfg, area) / "explain"
        selections, daily_tops = {}, {}
        for target in targets:
            stem = _model_stem(target, scope)
            model = GbtModel.load(models / f"{stem}.json")
            split = DatasetSplit.from_dict(json.loads(_require(models / f"{stem}.split.json", "split").read_text()))
            split_hours = pd.DatetimeIndex(json.loads((models / f"{stem}.split.json").read_text())["hours"])
            rows = frame.data.loc[split_hours][model.feature_names]
            train_rows, test_rows = rows.iloc[split.train], rows.iloc[split.test]
            background = sample_background(train_rows, cfg.background_size, cfg.seed)
            shap = interventional_shap(model, test_rows, background)
            _audit(shap.additivity_error(), AUDIT_TOLERANCE, f"{area.name} {stem} SHAP")
            meta = provenance(cfg, area=area.name, target=target, scope=scope, mode=shap.mode,
                              base_value=shap.base_value, background_rows=len(background))
            table = shap.to_frame()
            table.insert(0, "hour_utc", _stamp(table.index))
            table["base_value"] = shap.base_value
            table["prediction"] = shap.predictions
            write_table(table, out / f"{stem}.shap.csv", meta)

            ranking = mean_abs_importance(shap)
            write_table(ranking, out / f"{stem}.importance.csv", meta)
            top = ranking["feature"].head(cfg.top_k).tolist()
            selections[target] = top

            directions = []
            for name in model.feature_names:
                try:
                    rho = shap_feature_direction(shap, name)
                except ConstantFeature:
                    rho = np.nan
                directions.append({"feature": name, "rho": rho})
            write_table(pd.DataFrame(directions), out / f"{stem}.directions.csv", meta)

            daily = daily_profile_decomposition(shap, top_k=cfg.daily_top_k)
            _audit(daily.additivity_error(), DAILY_TOLERANCE, f"{area.name} {stem} daily decomposition")
            daily_tops[target] = daily.top_features
            write_table(daily.table.reset_index(), out / f"{stem}.daily.csv",
                        {**meta, "top_features": daily.top_features})

            partner = {}
            if cfg.interactions:
                inter_rows = test_rows.iloc[: cfg.interaction_rows]
                inter = shap_interactions(model, inter_rows)
                err = float(np.max(np.abs(inter.values.sum(axis=(1, 2)) + inter.base_value - inter.predictions)))
                _audit(err, AUDIT_TOLERANCE, f"{area.name} {stem} interactions")
                if not np.array_equal(inter.values, np.transpose(inter.values, (0, 2, 1))):
                    raise InvariantViolation(f"{area.name} {stem}: interaction matrix not symmetric")
                long = inter.to_long()
                long.insert(1, "hour_utc", np.asarray(_stamp(inter_rows.index))[long["sample"].to_numpy()])
                write_table(long, out / f"{stem}.interactions.csv",
                            {**meta, "mode": "path_dependent", "rows": len(inter_rows)})
                strength = inter.mean_abs()
                write_table(strength.reset_index(names="feature"), out / f"{stem}.interaction_strength.csv",
                            {**meta, "mode": "path_dependent"})
                for name in top:
                    col = strength[name].drop(name)
                    partner[name] = col.idxmax() if col.max() > 0 else name
            parts = []
            for name in top:
                dep = dependency_data(shap, name, partner.get(name, name))
                dep.insert(0, "hour_utc", _stamp(dep.index))
                dep.insert(1, "feature", name)
                dep.insert(2, "color_feature", partner.get(name, name))
                parts.append(dep)
            write_table(pd.concat(parts, ignore_index=True), out / f"{stem}.dependency.csv", meta)
            print(f"{area.name} {stem}: top features {top}")
        write_json(out / f"selection_{scope}.json", _clean(provenance(
            cfg, area=area.name, scope=scope, top_per_target=selections,
            union_top=union_of_top(selections.values()), daily_top_per_target=daily_tops)))
    return EXIT_OK


def cmd_report(cfg: PipelineConfig, args) -> int:
    entries, speed_tables, correlations = [], [], {}
    inputs = []
    for area in _areas(cfg, args):
        folder = area_dir(cfg, area)
        inputs += [folder / "features.csv", folder / "indicators.csv"]
        models = folder / "models"
        for target in cfg.targets:
            preds = {}
            for scope in cfg.scopes:
                path = models / f"{_model_stem(target, scope)}.predictions.csv"
                preds[scope] = pd.read_csv(_require(path, "prediction file"), float_precision="round_trip")
            full = preds.get("full", next(iter(preds.values())))
            day_ahead = preds.get("day-ahead")
            if day_ahead is not None and not day_ahead["hour_utc"].equals(full["hour_utc"]):
                raise InvariantViolation(f"{area.name} {target}: scopes evaluated on different test rows")
            entry = performance_entry(
                area.name, target, full["target"], full["prediction"], full["daily_profile"],
                None if day_ahead is None else day_ahead["prediction"])
            entries.append(entry.to_dict())

        frame, indicators = _load_inputs(cfg, area)
        correlations[area.name] = pearson_matrix(frame.data, indicators)
        if area.ramp_rates:
            directions_path = folder / "explain" / f"{_model_stem('rocof', 'full')}.directions.csv"
            directions = {}
            if directions_path.exists():
                d = pd.read_csv(directions_path, float_precision="round_trip")
                directions = dict(zip(d["feature"], d["rho"]))
            generation, rates, rho = {}, {}, {}
            for ramp, rate in area.ramp_rates.items():
                parent = RAMPS.get(ramp)
                if parent is None:
                    raise UsageError(f"{area.name}: ramp_rates key {ramp!r} is not a ramp feature")
                if parent in frame.data and ramp in frame.data:
                    generation[ramp] = frame.data[parent]
                    rates[ramp] = rate
                    rho[ramp] = directions.get(ramp, np.nan)
            if generation:
                table = relative_ramp_speeds(generation, rates, rho, cfg.speed_threshold)
                table.insert(0, "area", area.name)
                speed_tables.append(table)

    out = cfg.output_dir
    meta = provenance(cfg, dataset=file_digest(*inputs))
    performance = pd.DataFrame(entries)
    write_table(performance, out / "report_performance.csv", meta)
    speeds = pd.concat(speed_tables, ignore_index=True) if speed_tables else pd.DataFrame()
    write_table(speeds, out / "report_ramp_speeds.csv", meta)
    for name, corr in correlations.items():
        write_table(corr.reset_index(names="feature"), out / f"report_correlations_{name}.csv",
                    {**meta, "display_note": "undefined coefficients are NaN; plots may show them as 0"})
    write_json(out / "report.json", _clean({
        **meta,
        "performance": entries,
        "ramp_speeds": speeds.to_dict(orient="records"),
        "shap_mode_first_order": "interventional",
        "shap_mode_interactions": "path_dependent",
    }))
    for e in entries:
        gains = ", ".join(f"{k}={e[k]:.2f}" if e[k] is not None else f"{k}=undefined"
                          for k in ("gain_full_vs_profile", "gain_day_ahead_vs_profile", "gain_full_vs_day_ahead"))
        print(f"{e['area']} {e['indicator']}: R2 full={e['r2_full']:.3f} profile={e['r2_profile']:.3f}; {gains}")
    return EXIT_OK


# ---------------------------------------------------------------- entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="freqxai", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    synth = sub.add_parser("synth", help="generate a synthetic data set and a config for it")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--scenarios", default="ce_like", help="comma-separated: " + ",".join(SCENARIOS))
    synth.add_argument("--days", type=int, default=30)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--noise", type=float, default=1.0)

    for name, text in (("extract", "frequency files -> hourly indicator tables"),
                       ("features", "regional files -> engineered feature tables"),
                       ("train", "fit boosted-tree models"),
                       ("explain", "SHAP artifacts for trained models"),
                       ("report", "performance gains, ramp speeds and correlations")):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", required=True)
        cmd.add_argument("--area", help="restrict to one configured area")
        cmd.add_argument("--seed", type=int, help="override the config seed")
        cmd.add_argument("--output-dir", help="override the config output directory")
        if name in ("train", "explain"):
            cmd.add_argument("--target", help="one of " + ",".join(INDICATORS))
            cmd.add_argument("--scope", choices=SCOPES)
    return parser


COMMANDS = {"extract": cmd_extract, "features": cmd_features, "train": cmd_train,
            "explain": cmd_explain, "report": cmd_report}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.command == "synth":
            return cmd_synth(args)
        cfg = load_config(args.config, {"seed": args.seed, "output_dir": args.output_dir})
        return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"freqxai: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"freqxai: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (DataError, OSError) as exc:
        print(f"freqxai: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
