"""Exact Shapley attributions for GbtModel ensembles.

Every leaf of a tree contributes a small game over the distinct features on
its root-to-leaf path, and Shapley values are additive over games, so each
attribution is a sum of per-leaf closed forms:

* interventional: for an explicand x and a background row r the leaf game is
  ``v * [S covers U_x] * [S misses U_r]`` where ``U_x`` (``U_r``) holds the
  path features whose constraint only x (only r) satisfies;
* path-dependent: the leaf game is ``v * prod_{f in S} o_f * prod_{f not in S} z_f``
  with ``o_f`` the indicator that x satisfies feature f's constraints and
  ``z_f`` the product of cover fractions at f's nodes.

Rows share results whenever their satisfaction patterns coincide, so the
per-leaf work runs on unique patterns only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from freqxai.boosting import GbtModel
from freqxai.errors import (
    ConstantFeature,
    DataError,
    EmptyBackground,
    MisalignedRows,
    UnknownFeature,
    ZeroCoverNode,
)

INTERVENTIONAL = "interventional"
PATH_DEPENDENT = "path_dependent"
DEFAULT_BACKGROUND_SIZE = 100

_FACT = np.array([math.factorial(k) for k in range(70)], dtype=float)


@dataclass
class ShapResult:
    base_value: float
    values: np.ndarray
    feature_names: list
    data: pd.DataFrame
    predictions: np.ndarray
    mode: str
    background: pd.DataFrame | None = None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=self.data.index, columns=self.feature_names)

    def additivity_error(self) -> float:
        total = self.base_value + self.values.sum(axis=1)
        return float(np.max(np.abs(total - self.predictions))) if len(total) else 0.0

    def column(self, feature: str) -> np.ndarray:
        if feature not in self.feature_names:
            raise UnknownFeature(feature)
        return self.values[:, self.feature_names.index(feature)]


@dataclass
class InteractionResult:
    base_value: float
    values: np.ndarray  # (n, p, p)
    feature_names: list
    data: pd.DataFrame
    predictions: np.ndarray

    def main_effects(self) -> np.ndarray:
        return self.values.sum(axis=2)

    def mean_abs(self) -> pd.DataFrame:
        return pd.DataFrame(np.abs(self.values).mean(axis=0), index=self.feature_names,
                            columns=self.feature_names)

    def strongest_pair(self) -> tuple:
        m = self.mean_abs().to_numpy().copy()
        np.fill_diagonal(m, -np.inf)
        j, k = np.unravel_index(int(np.argmax(m)), m.shape)
        return self.feature_names[j], self.feature_names[k]

    def to_long(self) -> pd.DataFrame:
        """Nonzero upper-triangle entries (diagonal included) as (sample, j, k, value)."""
        n, p, _ = self.values.shape
        iu, ju = np.triu_indices(p)
        vals = self.values[:, iu, ju]
        sample, pair = np.nonzero(vals)
        names = np.array(self.feature_names, dtype=object)
        return pd.DataFrame({
            "sample": sample,
            "feature_j": names[iu[pair]],
            "feature_k": names[ju[pair]],
            "value": vals[sample, pair],
        })


@dataclass
class _Leaf:
    value: float
    features: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    nan_ok: np.ndarray
    zfrac: np.ndarray = field(default=None)

    def satisfied(self, X: np.ndarray) -> np.ndarray:
        x = X[:, self.features]
        with np.errstate(invalid="ignore"):
            inside = (x >= self.lo) & (x < self.hi)
        return np.where(np.isnan(x), self.nan_ok, inside)


def _leaf_paths(tree) -> list:
    leaves = []
    # per feature on the current path: [lo, hi, nan_ok, zfrac]
    stack = [(0, {})]
    while stack:
        node, cons = stack.pop()
        if tree.left[node] < 0:
            feats = np.array(sorted(cons), dtype=np.int64)
            leaves.append(_Leaf(
                value=float(tree.value[node]),
                features=feats,
                lo=np.array([cons[f][0] for f in feats], dtype=float),
                hi=np.array([cons[f][1] for f in feats], dtype=float),
                nan_ok=np.array([cons[f][2] for f in feats], dtype=bool),
                zfrac=np.array([cons[f][3] for f in feats], dtype=float),
            ))
            continue
        cover = tree.cover[node]
        if not cover > 0:
            raise ZeroCoverNode(f"node {node} has cover {cover}")
        f, thr = int(tree.feature[node]), float(tree.threshold[node])
        for child, is_left in ((tree.right[node], False), (tree.left[node], True)):
            lo, hi, nan_ok, z = cons.get(f, (-np.inf, np.inf, True, 1.0))
            if is_left:
                hi = min(hi, thr)
            else:
                lo = max(lo, thr)
            nan_ok = nan_ok and (bool(tree.default_left[node]) == is_left)
            new = dict(cons)
            new[f] = (lo, hi, nan_ok, z * tree.cover[child] / cover)
            stack.append((child, new))
    return leaves


def _codes(sat: np.ndarray) -> np.ndarray:
    return sat.astype(np.int64) @ (np.int64(1) << np.arange(sat.shape[1], dtype=np.int64))


def _bits(codes: np.ndarray, d: int) -> np.ndarray:
    return ((codes[:, None] >> np.arange(d, dtype=np.int64)) & 1).astype(bool)


def _model_matrix(model: GbtModel, rows) -> tuple:
    if isinstance(rows, pd.DataFrame):
        frame = rows
        X = model._matrix(rows)
        frame = pd.DataFrame(X, index=frame.index, columns=model.feature_names)
    else:
        X = model._matrix(rows)
        frame = pd.DataFrame(X, columns=model.feature_names)
    return X, frame


def sample_background(rows, size: int = DEFAULT_BACKGROUND_SIZE, seed: int = 0):
    """Uniform sample without replacement of ``size`` rows (all rows when fewer)."""
    n = len(rows)
    if n == 0:
        raise EmptyBackground("no rows to draw a background from")
    if n <= size:
        return rows
    idx = np.sort(np.random.default_rng(seed).choice(n, size, replace=False))
    return rows.iloc[idx] if isinstance(rows, pd.DataFrame) else np.asarray(rows)[idx]


def interventional_shap(model: GbtModel, rows, background) -> ShapResult:
    """Exact interventional SHAP values against a background sample."""
    X, frame = _model_matrix(model, rows)
    R, background_frame = _model_matrix(model, background)
    if R.shape[0] == 0:
        raise EmptyBackground("background sample is empty")
    n, p = X.shape
    b = R.shape[0]
    phi = np.zeros((n, p))
    for tree in model.trees:
        for leaf in _leaf_paths(tree):
            d = len(leaf.features)
            if d == 0:
                continue
            a_codes = _codes(leaf.satisfied(X))
            ua, inv = np.unique(a_codes, return_inverse=True)
            uc, cnt = np.unique(_codes(leaf.satisfied(R)), return_counts=True)
            A, C = _bits(ua, d), _bits(uc, d)
            full = (1 << d) - 1
            valid = (ua[:, None] | uc[None, :]) == full
            only_x = A[:, None, :] & ~C[None, :, :]
            only_r = ~A[:, None, :] & C[None, :, :]
            nx, nr = only_x.sum(axis=2), only_r.sum(axis=2)
            total = _FACT[nx + nr]
            wx = _FACT[np.maximum(nx - 1, 0)] * _FACT[nr] / total
            wr = _FACT[nx] * _FACT[np.maximum(nr - 1, 0)] / total
            contrib = only_x * wx[..., None] - only_r * wr[..., None]
            contrib *= (valid * cnt[None, :])[..., None]
            table = contrib.sum(axis=1) * (leaf.value / b)
            phi[:, leaf.features] += table[inv]
    base = float(np.mean(model.predict(R)))
    return ShapResult(base, phi, list(model.feature_names), frame, model.predict(X),
                      INTERVENTIONAL, background_frame)


def _poly_excluding(o: np.ndarray, z: np.ndarray, skip) -> np.ndarray:
    """Coefficients of prod_{f not in skip} (z_f + o_f y), one row per pattern."""
    poly = np.ones((o.shape[0], 1))
    for f in range(o.shape[1]):
        if f in skip:
            continue
        nxt = np.zeros((poly.shape[0], poly.shape[1] + 1))
        nxt[:, :-1] += poly * z[f]
        nxt[:, 1:] += poly * o[:, f:f + 1]
        poly = nxt
    return poly


def _first_order_weights(d: int) -> np.ndarray:
    k = np.arange(d)
    return _FACT[k] * _FACT[d - k - 1] / _FACT[d]


def _pair_weights(d: int) -> np.ndarray:
    s = np.arange(d - 1)
    return _FACT[s] * _FACT[d - s - 2] / (2 * _FACT[d - 1])


def _path_base(model: GbtModel) -> float:
    return float(model.base_score + sum(t.value[0] for t in model.trees))


def path_dependent_shap(model: GbtModel, rows) -> ShapResult:
    """Exact SHAP values of the cover-weighted conditional expectation game."""
    X, frame = _model_matrix(model, rows)
    n, p = X.shape
    phi = np.zeros((n, p))
    for tree in model.trees:
        for leaf in _leaf_paths(tree):
            d = len(leaf.features)
            if d == 0:
                continue
            ua, inv = np.unique(_codes(leaf.satisfied(X)), return_inverse=True)
            o = _bits(ua, d).astype(float)
            z = leaf.zfrac
            w = _first_order_weights(d)
            table = np.empty((len(ua), d))
            for j in range(d):
                poly = _poly_excluding(o, z, (j,))
                table[:, j] = leaf.value * (o[:, j] - z[j]) * (poly @ w)
            phi[:, leaf.features] += table[inv]
    return ShapResult(_path_base(model), phi, list(model.feature_names), frame, model.predict(X),
                      PATH_DEPENDENT)


def shap_interactions(model: GbtModel, rows) -> InteractionResult:
    """Path-dependent Shapley interaction values; the diagonal holds main effects.

    Off-diagonal entries split the interaction index evenly between (j, k)
    and (k, j), so each row of the matrix sums to the first-order value.
    """
    X, frame = _model_matrix(model, rows)
    n, p = X.shape
    phi = np.zeros((n, p))
    inter = np.zeros((n, p, p))
    for tree in model.trees:
        for leaf in _leaf_paths(tree):
            d = len(leaf.features)
            if d == 0:
                continue
            ua, inv = np.unique(_codes(leaf.satisfied(X)), return_inverse=True)
            o = _bits(ua, d).astype(float)
            z = leaf.zfrac
            delta = o - z
            w1 = _first_order_weights(d)
            first = np.empty((len(ua), d))
            for j in range(d):
                first[:, j] = leaf.value * delta[:, j] * (_poly_excluding(o, z, (j,)) @ w1)
            phi[:, leaf.features] += first[inv]
            if d < 2:
                continue
            w2 = _pair_weights(d)
            pairs = np.zeros((len(ua), d, d))
            for j in range(d):
                for k in range(j + 1, d):
                    val = leaf.value * delta[:, j] * delta[:, k] * (_poly_excluding(o, z, (j, k)) @ w2)
                    pairs[:, j, k] = pairs[:, k, j] = val
            f = leaf.features
            inter[:, f[:, None], f[None, :]] += pairs[inv]
    off = inter.sum(axis=2)
    idx = np.arange(p)
    inter[:, idx, idx] = phi - off
    return InteractionResult(_path_base(model), inter, list(model.feature_names), frame, model.predict(X))


def mean_abs_importance(result: ShapResult) -> pd.DataFrame:
    """Features ranked by mean |phi| (descending; ties keep column order)."""
    if result.values.shape[0] == 0:
        raise DataError("no rows to rank importance on")
    imp = np.abs(result.values).mean(axis=0)
    order = np.argsort(-imp, kind="stable")
    return pd.DataFrame({
        "feature": [result.feature_names[i] for i in order],
        "mean_abs_shap": imp[order],
        "rank": np.arange(1, len(order) + 1),
    })


def top_features(result: ShapResult, k: int = 5) -> list:
    return mean_abs_importance(result)["feature"].head(k).tolist()


def union_of_top(selections) -> list:
    """Union of feature lists, in order of first appearance."""
    seen = []
    for names in selections:
        for name in names:
            if name not in seen:
                seen.append(name)
    return seen


def dependency_data(result: ShapResult, feature: str, color: str | None = None) -> pd.DataFrame:
    """Per-sample (x_j, phi_j, x_k) triples for a dependency plot."""
    if feature not in result.feature_names:
        raise UnknownFeature(feature)
    color = color or feature
    if color not in result.data.columns:
        raise UnknownFeature(color)
    return pd.DataFrame({
        "x": result.data[feature].to_numpy(),
        "shap": result.column(feature),
        "color": result.data[color].to_numpy(),
    }, index=result.data.index)


def locate_step(x, effect) -> float:
    """Location of the largest jump in ``effect`` as a function of ``x``.

    Fits ``a + b x + c [x > t]`` by least squares for every threshold ``t``
    between consecutive distinct values and returns the best midpoint, so a
    linear trend around the jump does not pull the estimate.
    """
    x = np.asarray(x, dtype=float)
    effect = np.asarray(effect, dtype=float)
    keep = ~np.isnan(x)
    x, effect = x[keep], effect[keep]
    order = np.argsort(x, kind="stable")
    xs, es = x[order], effect[order]
    if len(xs) < 3 or xs[0] == xs[-1]:
        raise ConstantFeature("need at least three samples and two distinct values to locate a step")
    n = len(xs)
    base = np.column_stack([np.ones(n), (xs - xs.mean()) / xs.std()])
    best, best_sse = None, np.inf
    for i in np.flatnonzero(xs[:-1] < xs[1:]):
        design = np.column_stack([base, np.arange(n) > i])
        coef, *_ = np.linalg.lstsq(design, es, rcond=None)
        sse = float(np.sum((design @ coef - es) ** 2))
        if sse < best_sse:
            best, best_sse = i, sse
    return float((xs[best] + xs[best + 1]) / 2)


def shap_feature_direction(result: ShapResult, feature: str) -> float:
    """Pearson correlation between a feature's value and its SHAP value."""
    x = result.data[feature].to_numpy(dtype=float) if feature in result.data.columns else None
    if x is None:
        raise UnknownFeature(feature)
    phi = result.column(feature)
    keep = ~np.isnan(x)
    x, phi = x[keep], phi[keep]
    if len(np.unique(x)) < 2:
        raise ConstantFeature(f"{feature} takes fewer than two distinct values")
    if np.all(phi == phi[0]):
        raise ConstantFeature(f"SHAP values of {feature} are constant")
    return float(np.corrcoef(x, phi)[0, 1])


@dataclass
class DailyDecomposition:
    table: pd.DataFrame  # index hour 0-23; columns base, top features, residual, prediction
    top_features: list
    base_value: float

    def additivity_error(self) -> float:
        parts = self.table.drop(columns=["prediction"]).sum(axis=1)
        return float(np.max(np.abs(parts - self.table["prediction"])))


RESIDUAL = "residual"


def daily_profile_decomposition(result: ShapResult, timestamps=None, top_k: int = 4) -> DailyDecomposition:
    """Hour-of-day means of SHAP values, top-k features kept, the rest summed.

    Hours with no samples are left out of the table.
    """
    if timestamps is None:
        timestamps = result.data.index
    timestamps = pd.DatetimeIndex(timestamps)
    if len(timestamps) != result.values.shape[0]:
        raise MisalignedRows(f"{len(timestamps)} timestamps for {result.values.shape[0]} SHAP rows")
    hours = timestamps.hour.to_numpy()
    shap = pd.DataFrame(result.values, columns=result.feature_names)
    hourly = shap.groupby(hours).mean()
    pred = pd.Series(result.predictions).groupby(hours).mean()
    strength = hourly.abs().mean(axis=0).to_numpy()
    order = np.argsort(-strength, kind="stable")[:top_k]
    top = [result.feature_names[i] for i in order]
    rest = [c for c in result.feature_names if c not in top]
    table = pd.DataFrame({"base": result.base_value}, index=hourly.index)
    for name in top:
        table[name] = hourly[name]
    table[RESIDUAL] = hourly[rest].sum(axis=1) if rest else 0.0
    table["prediction"] = pred
    table.index.name = "hour"
    return DailyDecomposition(table, top, result.base_value)
