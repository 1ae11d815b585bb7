import numpy as np
import pandas as pd
import pytest

from freqxai.boosting import GbtModel, GbtParams, RegressionTree, train_gbt
from freqxai.errors import ConstantFeature, EmptyBackground, MisalignedRows, UnknownFeature
from freqxai.explain import (
    RESIDUAL,
    ShapResult,
    daily_profile_decomposition,
    dependency_data,
    interventional_shap,
    locate_step,
    mean_abs_importance,
    path_dependent_shap,
    sample_background,
    shap_feature_direction,
    shap_interactions,
    top_features,
    union_of_top,
)
from shap_oracles import interaction_oracle, interventional_value, path_value, shapley_from_value


def tree_from_nodes(nodes):
    """nodes: list of (feature, threshold, left, right, value, cover)."""
    return RegressionTree(
        feature=np.array([n[0] for n in nodes], dtype=np.int64),
        threshold=np.array([n[1] for n in nodes], dtype=float),
        default_left=np.zeros(len(nodes), dtype=bool),
        left=np.array([n[2] for n in nodes], dtype=np.int64),
        right=np.array([n[3] for n in nodes], dtype=np.int64),
        value=np.array([n[4] for n in nodes], dtype=float),
        cover=np.array([n[5] for n in nodes], dtype=float),
        gain=np.array([1.0 if n[2] >= 0 else 0.0 for n in nodes]),
    )


def stump(a, b, cover_a=1.0, cover_b=1.0):
    mean = (cover_a * a + cover_b * b) / (cover_a + cover_b)
    return tree_from_nodes([(0, 0.5, 1, 2, mean, cover_a + cover_b),
                            (-1, 0, -1, -1, a, cover_a), (-1, 0, -1, -1, b, cover_b)])


def random_model(seed, p=5, n=300, rounds=6, depth=3, missing=0.1):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    y = X[:, 0] * X[:, 1] + np.sin(2 * X[:, 2]) + 0.5 * X[:, 3] + 0.05 * rng.normal(size=n)
    X[rng.random(X.shape) < missing] = np.nan
    params = GbtParams(max_rounds=rounds, max_depth=depth, subsample=0.8, colsample=0.8, seed=seed,
                       early_stopping_rounds=None)
    return train_gbt(X, y, params=params), X


def test_interventional_single_split():
    model = GbtModel(0.0, [stump(2.0, 7.0)], ["x1", "x2"])
    background = np.array([[0.0, 5.0], [0.2, -1.0], [0.4, 3.0]])
    result = interventional_shap(model, np.array([[1.0, 0.0]]), background)
    np.testing.assert_allclose(result.values, [[5.0, 0.0]], atol=1e-15)
    assert result.base_value == 2.0


def test_interventional_identical_rows_give_zero():
    model, X = random_model(0)
    row = X[:1]
    result = interventional_shap(model, row, np.repeat(row, 4, axis=0))
    np.testing.assert_allclose(result.values, 0.0, atol=1e-15)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_interventional_matches_brute_force(seed):
    model, X = random_model(seed)
    rows, background = X[:6], X[200:240]
    result = interventional_shap(model, rows, background)
    oracle, _ = shapley_from_value(interventional_value(model, rows, background), X.shape[1], len(rows))
    np.testing.assert_allclose(result.values, oracle, atol=1e-8)
    assert result.additivity_error() < 1e-8


def test_path_dependent_single_leaf_model():
    leaf = tree_from_nodes([(-1, 0, -1, -1, 0.7, 10.0)])
    model = GbtModel(1.0, [leaf], ["a"])
    result = path_dependent_shap(model, np.array([[3.0], [np.nan]]))
    np.testing.assert_array_equal(result.values, 0.0)
    assert result.base_value == pytest.approx(1.7)


def test_path_dependent_balanced_split():
    model = GbtModel(0.0, [stump(-1.0, 1.0)], ["x"])
    result = path_dependent_shap(model, np.array([[1.0]]))
    assert result.values[0, 0] == pytest.approx(1.0)
    assert result.base_value == pytest.approx(0.0)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_path_dependent_matches_brute_force(seed):
    model, X = random_model(seed, depth=4)
    rows = X[:8]
    result = path_dependent_shap(model, rows)
    oracle, v = shapley_from_value(path_value(model, rows), X.shape[1], len(rows))
    np.testing.assert_allclose(result.values, oracle, atol=1e-8)
    np.testing.assert_allclose(result.base_value, v(set())[0], atol=1e-12)
    assert result.additivity_error() < 1e-8


def test_dummy_feature_gets_zero():
    model, X = random_model(3)
    used = {int(f) for t in model.trees for f in t.feature if f >= 0}
    unused = [j for j in range(X.shape[1]) if j not in used]
    X2 = np.column_stack([X, np.random.default_rng(0).normal(size=len(X))])
    model2 = GbtModel(model.base_score, model.trees, model.feature_names + ["dummy"])
    for result in (interventional_shap(model2, X2[:20], X2[50:80]), path_dependent_shap(model2, X2[:20])):
        assert np.all(result.values[:, -1] == 0)
        for j in unused:
            assert np.all(result.values[:, j] == 0)


def test_local_accuracy_on_many_rows():
    model, X = random_model(4, rounds=30, depth=5)
    rows = np.random.default_rng(1).normal(size=(1000, X.shape[1]))
    assert interventional_shap(model, rows, X[:100]).additivity_error() < 1e-8
    assert path_dependent_shap(model, rows).additivity_error() < 1e-8


def test_empty_background():
    model, X = random_model(0)
    with pytest.raises(EmptyBackground):
        interventional_shap(model, X[:2], X[:0])
    with pytest.raises(EmptyBackground):
        sample_background(X[:0])


def test_sample_background_is_seeded():
    frame = pd.DataFrame({"a": np.arange(500.0)})
    first = sample_background(frame, 100, seed=3)
    assert len(first) == 100
    assert first.equals(sample_background(frame, 100, seed=3))
    assert len(sample_background(frame.iloc[:40], 100)) == 40


def test_interactions_additive_model_has_no_off_diagonal():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(400, 3))
    y = np.sin(X[:, 0]) + X[:, 1] ** 2
    model = train_gbt(X, y, params=GbtParams(max_depth=1, max_rounds=40, early_stopping_rounds=None))
    inter = shap_interactions(model, X[:50])
    off = ~np.eye(3, dtype=bool)
    assert np.max(np.abs(inter.values[:, off])) <= 1e-8


def test_interactions_product_tree():
    leaves = [(-1, 0, -1, -1, v, 1.0) for v in (1.0, -1.0, -1.0, 1.0)]
    tree = tree_from_nodes([
        (0, 0.0, 1, 2, 0.0, 4.0),
        (1, 0.0, 3, 4, 0.0, 2.0),
        (1, 0.0, 5, 6, 0.0, 2.0),
        leaves[0], leaves[1], leaves[2], leaves[3],
    ])
    model = GbtModel(0.0, [tree], ["x1", "x2"])
    rows = np.array([[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]])
    np.testing.assert_array_equal(model.predict(rows), rows[:, 0] * rows[:, 1])
    inter = shap_interactions(model, rows)
    np.testing.assert_array_equal(inter.values, np.transpose(inter.values, (0, 2, 1)))
    oracle = interaction_oracle(path_value(model, rows), 2, 4)
    np.testing.assert_allclose(inter.values[:, 0, 1], oracle[:, 0, 1], atol=1e-12)
    np.testing.assert_allclose(inter.values[:, 0, 1], 0.5 * rows[:, 0] * rows[:, 1], atol=1e-12)
    first = path_dependent_shap(model, rows)
    np.testing.assert_allclose(inter.main_effects(), first.values, atol=1e-12)


@pytest.mark.parametrize("seed", [5, 6])
def test_interactions_match_brute_force_and_row_sums(seed):
    model, X = random_model(seed, p=4, depth=4)
    rows = X[:6]
    inter = shap_interactions(model, rows)
    oracle = interaction_oracle(path_value(model, rows), 4, len(rows))
    off = ~np.eye(4, dtype=bool)
    np.testing.assert_allclose(inter.values[:, off], oracle[:, off], atol=1e-8)
    np.testing.assert_allclose(inter.main_effects(), path_dependent_shap(model, rows).values, atol=1e-8)
    assert np.array_equal(inter.values, np.transpose(inter.values, (0, 2, 1)))


def test_interaction_long_format():
    model, X = random_model(1, p=4)
    inter = shap_interactions(model, X[:3])
    long = inter.to_long()
    assert list(long.columns) == ["sample", "feature_j", "feature_k", "value"]
    assert (long["value"] != 0).all()


def test_importance_ranking():
    values = np.array([[1.0, 0.0, -3.0], [-1.0, 0.0, 1.0]])
    result = ShapResult(0.0, values, ["a", "b", "c"], pd.DataFrame(values, columns=list("abc")),
                        values.sum(axis=1), "interventional")
    ranking = mean_abs_importance(result)
    assert ranking["feature"].tolist() == ["c", "a", "b"]
    assert ranking["mean_abs_shap"].iloc[-1] == 0
    assert top_features(result, 2) == ["c", "a"]
    assert union_of_top([["c", "a"], ["b", "c"]]) == ["c", "a", "b"]


def test_duplicate_features_symmetrized_importance():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(300, 2))
    X = np.column_stack([x[:, 0], x[:, 0], x[:, 1]])
    y = 2 * x[:, 0] + x[:, 1]
    params = GbtParams(max_rounds=20, early_stopping_rounds=None)
    swap = [1, 0, 2]
    totals = np.zeros(3)
    for seed in range(2):
        for order in ([0, 1, 2], swap):
            model = train_gbt(X[:, order], y, params=GbtParams(**{**params.__dict__, "seed": seed}))
            imp = np.abs(interventional_shap(model, X[:100, order], X[100:150, order]).values).mean(axis=0)
            totals[order] += imp
    assert abs(totals[0] - totals[1]) <= 1e-12 * max(1.0, totals[0])


def test_dependency_of_additive_model_is_main_effect():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(400, 2))
    y = 3 * X[:, 0] - X[:, 1]
    model = train_gbt(X, y, params=GbtParams(max_depth=1, max_rounds=50, early_stopping_rounds=None))
    background = X[300:]
    result = interventional_shap(model, X[:100], background)
    g0 = GbtModel(0.0, [t for t in model.trees if t.feature[0] == 0], model.feature_names)
    main = g0.predict(X[:100]) - g0.predict(background).mean()
    dep = dependency_data(result, "x0", "x1")
    assert np.max(np.abs(dep["shap"].to_numpy() - main)) < 1e-8
    assert list(dep.columns) == ["x", "shap", "color"]


def test_dependency_shows_step():
    rng = np.random.default_rng(3)
    X = rng.uniform(-1, 1, size=(800, 2))
    y = 0.5 * X[:, 0] + 2.0 * (X[:, 0] > 0.3) + 0.3 * X[:, 1]
    model = train_gbt(X, y, params=GbtParams(max_rounds=200, early_stopping_rounds=None, max_depth=3))
    result = interventional_shap(model, X[:400], X[400:500])
    dep = dependency_data(result, "x0")
    assert locate_step(dep["x"], dep["shap"]) == pytest.approx(0.3, abs=0.03)


def test_dependency_constant_color_and_unknown():
    model, X = random_model(0, missing=0.0)
    frame = pd.DataFrame(X, columns=model.feature_names)
    frame["x4"] = 1.5
    result = interventional_shap(model, frame.iloc[:20], frame.iloc[50:70])
    dep = dependency_data(result, "x0", "x4")
    assert (dep["color"] == 1.5).all()
    with pytest.raises(UnknownFeature):
        dependency_data(result, "nope")


def test_feature_direction():
    x = np.linspace(-1, 1, 11)
    data = pd.DataFrame({"a": x, "b": x**3})
    values = np.column_stack([-x, np.tanh(x)])
    result = ShapResult(0.0, values, ["a", "b"], data, values.sum(axis=1), "interventional")
    assert shap_feature_direction(result, "a") == pytest.approx(-1.0)
    assert shap_feature_direction(result, "b") > 0
    flat = ShapResult(0.0, values, ["a", "b"], data.assign(a=2.0), values.sum(axis=1), "interventional")
    with pytest.raises(ConstantFeature):
        shap_feature_direction(flat, "a")


def hourly_frame(n_days=10, seed=0):
    idx = pd.date_range("2019-01-01", periods=24 * n_days, freq="h", tz="UTC")
    rng = np.random.default_rng(seed)
    frame = pd.DataFrame({"Hour": idx.hour.astype(float), "noise": rng.normal(size=len(idx))}, index=idx)
    return frame


def test_daily_decomposition_featureless_model():
    frame = hourly_frame()
    model = GbtModel(0.4, [], list(frame.columns))
    result = interventional_shap(model, frame, frame.iloc[:10])
    dec = daily_profile_decomposition(result)
    assert len(dec.table) == 24
    assert (dec.table["base"] == 0.4).all()
    assert np.all(dec.table.drop(columns=["base", "prediction"]).to_numpy() == 0)
    assert dec.additivity_error() <= 1e-10


def test_daily_decomposition_hour_only_model():
    frame = hourly_frame()
    y = np.sin(2 * np.pi * frame["Hour"].to_numpy() / 24)
    model = train_gbt(frame[["Hour"]], y, params=GbtParams(max_rounds=100, early_stopping_rounds=None))
    frame = frame.assign(extra=0.0)
    result = interventional_shap(model, frame[["Hour"]], frame[["Hour"]].iloc[::7])
    dec = daily_profile_decomposition(result, top_k=4)
    profile = pd.Series(model.predict(frame[["Hour"]])).groupby(frame.index.hour).mean()
    np.testing.assert_allclose(dec.table["prediction"].to_numpy(), profile.to_numpy(), atol=1e-12)
    assert (dec.table[RESIDUAL] == 0).all()
    assert dec.top_features == ["Hour"]
    assert dec.additivity_error() <= 1e-10


def test_daily_decomposition_additivity_and_alignment():
    model, X = random_model(7, rounds=20)
    idx = pd.date_range("2020-03-01", periods=len(X), freq="h", tz="UTC")
    result = interventional_shap(model, pd.DataFrame(X, index=idx, columns=model.feature_names), X[:50])
    dec = daily_profile_decomposition(result, top_k=2)
    assert len(dec.top_features) == 2
    assert dec.additivity_error() <= 1e-10
    with pytest.raises(MisalignedRows):
        daily_profile_decomposition(result, idx[:-1])


def test_locate_step_needs_variation():
    with pytest.raises(ConstantFeature):
        locate_step([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])
