"""Sort generation technologies into RoCoF roles.

A technology's role combines how fast it ramps relative to the area's fastest
unit with the sign of its SHAP-feature correlation for the RoCoF model.  The
synthetic continental area plants pumped hydro as a driver and lignite as an
offsetting technology.

    python3 demos/ramp_roles.py
"""
from freqxai.analysis import relative_ramp_speeds
from freqxai.boosting import GbtParams, split_dataset, train_gbt
from freqxai.explain import interventional_shap, sample_background, shap_feature_direction
from freqxai.ingest import build_area_frame, generate_synthetic_area, join_target
from freqxai.ingest.catalog import RAMPS
from freqxai.signal import extract_indicators

area = generate_synthetic_area(seed=0, n_days=40, scenario="ce_like")
indicators = extract_indicators(area.trace).to_frame()
frame = build_area_frame(area.regions).frame
X, y = join_target(frame, indicators["rocof"])

split = split_dataset(y, seed=0)
model = train_gbt(X.iloc[split.train], y.iloc[split.train], X.iloc[split.valid], y.iloc[split.valid],
                  GbtParams(max_depth=4, subsample=0.8))
shap = interventional_shap(model, X.iloc[split.test], sample_background(X.iloc[split.train], 100))

generation, rates, directions = {}, {}, {}
for ramp, rate in area.truth["ramp_rates"].items():
    if ramp in X.columns and RAMPS[ramp] in frame.data:
        generation[ramp] = frame.data[RAMPS[ramp]]
        rates[ramp] = rate
        directions[ramp] = shap_feature_direction(shap, ramp)

table = relative_ramp_speeds(generation, rates, directions)
print(table[["technology", "relative_speed", "direction", "role"]].round(3).to_string(index=False))
print(f"\nplanted driving {area.truth['driving']}, offsetting {area.truth['offsetting']}")
