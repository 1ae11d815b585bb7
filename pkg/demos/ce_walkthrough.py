"""Walk through one synthetic continental-style area from raw trace to explanations.

The generator plants a known mechanism: the hourly frequency jump follows the
load ramp, drops sharply once the ramp exceeds a threshold, and carries a
product of two forecast errors.  We check that the trained model and its SHAP
values find each piece.

    python3 demos/ce_walkthrough.py [n_days]
"""
import sys

from freqxai.analysis import fit_daily_profile, r2_score
from freqxai.boosting import GbtParams, split_dataset, train_gbt
from freqxai.explain import (
    daily_profile_decomposition,
    dependency_data,
    interventional_shap,
    locate_step,
    mean_abs_importance,
    sample_background,
    shap_interactions,
)
from freqxai.ingest import build_area_frame, generate_synthetic_area, join_target
from freqxai.signal import extract_indicators, rocof_params_for

n_days = int(sys.argv[1]) if len(sys.argv) > 1 else 60
area = generate_synthetic_area(seed=0, n_days=n_days, scenario="ce_like")
truth = area.truth
print(f"{n_days} days of 1 s frequency samples: {len(area.trace):,} values")

# Per-hour indicators from the raw trace.
indicators = extract_indicators(area.trace, rocof_params_for("CE")).to_frame()
print(indicators.describe().loc[["mean", "std"]].round(4), "\n")

# Regional inputs are aggregated, then engineered into the feature catalog.
build = build_area_frame(area.regions)
X, y = join_target(build.frame, indicators[truth["target"]], scope="full")
print(f"feature matrix {X.shape}, target {truth['target']!r}")

split = split_dataset(y, seed=0)
model = train_gbt(X.iloc[split.train], y.iloc[split.train], X.iloc[split.valid], y.iloc[split.valid],
                  GbtParams(max_depth=4, subsample=0.8))
test = X.iloc[split.test]
profile = fit_daily_profile(X.index[split.train], y.iloc[split.train])
r2_model = r2_score(y.iloc[split.test], model.predict(test))
r2_profile = r2_score(y.iloc[split.test], profile.predict(test.index))
print(f"{len(model.trees)} trees; test R2 {r2_model:.3f} against {r2_profile:.3f} for the daily profile\n")

shap = interventional_shap(model, test, sample_background(X.iloc[split.train], 100, seed=0))
print("largest mean |SHAP|:")
print(mean_abs_importance(shap).head(6).to_string(index=False), "\n")

dep = dependency_data(shap, truth["step_feature"])
print(f"step in the {truth['step_feature']!r} dependency located at {locate_step(dep['x'], dep['shap']):.0f} MW/h "
      f"(planted at {truth['step_threshold']:.0f})")

inter = shap_interactions(model, test)
j, k = inter.strongest_pair()
strength = inter.mean_abs().loc[j, k]
print(f"strongest interaction: {j!r} x {k!r} (mean |value| {strength:.2e}); planted {truth['interaction']}\n")

daily = daily_profile_decomposition(shap, test.index, top_k=4)
print("mean prediction by hour of day, split into base value, top features and the rest:")
print(daily.table.round(4).iloc[::3].to_string())
print(f"largest additivity error {daily.additivity_error():.1e}")
