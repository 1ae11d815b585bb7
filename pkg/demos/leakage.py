"""Correlation is not attribution.

In the synthetic continental area nuclear output shadows the load, so its
ramp correlates with the frequency jump even though it never enters the
generating formula.  The model gives it almost no SHAP mass.

    python3 demos/leakage.py
"""
from freqxai.analysis import pearson_matrix
from freqxai.boosting import GbtParams, split_dataset, train_gbt
from freqxai.explain import interventional_shap, mean_abs_importance, sample_background
from freqxai.ingest import build_area_frame, generate_synthetic_area, join_target
from freqxai.signal import extract_indicators

area = generate_synthetic_area(seed=1, n_days=40, scenario="ce_like")
truth = area.truth
indicators = extract_indicators(area.trace).to_frame()
X, y = join_target(build_area_frame(area.regions).frame, indicators[truth["target"]])

split = split_dataset(y, seed=1)
model = train_gbt(X.iloc[split.train], y.iloc[split.train], X.iloc[split.valid], y.iloc[split.valid],
                  GbtParams(max_depth=4, subsample=0.8))
shap = interventional_shap(model, X.iloc[split.test], sample_background(X.iloc[split.train], 100))

importance = mean_abs_importance(shap).set_index("feature")
corr = pearson_matrix(X, y.to_frame("target"))["target"]
rows = [truth["driver"], truth["leaky_feature"]]
table = importance.loc[rows, ["mean_abs_shap", "rank"]].assign(pearson=corr[rows])
print(table.round(4).to_string())
ratio = table.loc[truth["leaky_feature"], "mean_abs_shap"] / table.loc[truth["driver"], "mean_abs_shap"]
print(f"\n{truth['leaky_feature']!r} correlates with the target but carries {ratio:.1%} of the driver's SHAP mass")
