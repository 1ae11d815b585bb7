"""Second-order gradient-boosted regression trees with missing-value routing.

Squared-error objective only, so every row has gradient ``prediction -
target`` and hessian 1.  Splits are found by an exact scan over the sorted
values of each candidate feature; rows with a missing value are tried on
both sides and the better side is stored as the node's default direction.
"""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd

from freqxai.errors import DataError, EmptyGrid, FeatureMismatch, TooFewRows

logger = logging.getLogger(__name__)

FORMAT_NAME = "freqxai-gbt"
FORMAT_VERSION = 1
MIN_SPLIT_ROWS = 50
SPLIT_FRACTIONS = (0.64, 0.16, 0.20)

DEFAULT_GRID = {
    "max_depth": [4, 6, 8],
    "learning_rate": [0.05, 0.1],
    "min_child_weight": [1.0, 5.0],
    "subsample": [0.8, 1.0],
    "reg_lambda": [1.0, 10.0],
}


@dataclass(frozen=True)
class GbtParams:
    learning_rate: float = 0.1
    max_depth: int = 6
    min_child_weight: float = 1.0
    reg_lambda: float = 1.0
    gamma: float = 0.0
    subsample: float = 1.0
    colsample: float = 1.0
    max_rounds: int = 500
    early_stopping_rounds: int | None = 20
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.max_depth < 1 or self.max_rounds < 1:
            raise ValueError("max_depth and max_rounds must be >= 1")
        if not (0 < self.subsample <= 1 and 0 < self.colsample <= 1):
            raise ValueError("subsample and colsample must lie in (0, 1]")
        if self.reg_lambda < 0 or self.gamma < 0 or self.min_child_weight < 0:
            raise ValueError("regularization terms must be non-negative")
        if self.early_stopping_rounds is not None and self.early_stopping_rounds < 1:
            raise ValueError("early_stopping_rounds must be >= 1 or None")

    @classmethod
    def from_dict(cls, d: dict) -> "GbtParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown GBT parameters {sorted(unknown)}")
        return cls(**d)


@dataclass
class RegressionTree:
    """Array-encoded binary tree; node 0 is the root, ``-1`` marks no child / no feature.

    ``value`` holds the (learning-rate scaled) leaf weight at leaves and the
    cover-weighted mean of the leaves below at internal nodes.
    """

    feature: np.ndarray
    threshold: np.ndarray
    default_left: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    cover: np.ndarray
    gain: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def is_leaf(self) -> np.ndarray:
        return self.left < 0

    @property
    def n_leaves(self) -> int:
        return int(self.is_leaf.sum())

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=int)
        for node in range(self.n_nodes):
            if self.left[node] >= 0:
                depths[self.left[node]] = depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def leaf_index(self, X: np.ndarray) -> np.ndarray:
        n = X.shape[0]
        node = np.zeros(n, dtype=np.int64)
        rows = np.arange(n)
        for _ in range(self.depth()):
            feat = self.feature[node]
            internal = feat >= 0
            if not internal.any():
                break
            x = X[rows, np.where(internal, feat, 0)]
            go_left = np.where(np.isnan(x), self.default_left[node], x < self.threshold[node])
            child = np.where(go_left, self.left[node], self.right[node])
            node = np.where(internal, child, node)
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.leaf_index(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "default_left": self.default_left.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "cover": self.cover.tolist(),
            "gain": self.gain.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        return cls(
            feature=np.array(d["feature"], dtype=np.int64),
            threshold=np.array(d["threshold"], dtype=float),
            default_left=np.array(d["default_left"], dtype=bool),
            left=np.array(d["left"], dtype=np.int64),
            right=np.array(d["right"], dtype=np.int64),
            value=np.array(d["value"], dtype=float),
            cover=np.array(d["cover"], dtype=float),
            gain=np.array(d["gain"], dtype=float),
        )


def split_gain(G_left, H_left, G_right, H_right, reg_lambda, gamma=0.0):
    """Loss reduction of a split; the parent statistics are the children's sums."""
    G, H = G_left + G_right, H_left + H_right
    return 0.5 * (G_left**2 / (H_left + reg_lambda) + G_right**2 / (H_right + reg_lambda)
                  - G**2 / (H + reg_lambda)) - gamma


def leaf_weight(G, H, reg_lambda, learning_rate=1.0):
    """Optimal (learning-rate scaled) weight ``-eta * G / (H + lambda)`` of a leaf."""
    return -learning_rate * G / (H + reg_lambda)


def _best_split(x, g, h, reg_lambda, gamma, min_child_weight):
    """Best split of one node over the columns of ``x``.

    Returns ``(gain, column, threshold, default_left)`` or ``None``.  Among
    equal gains the lowest column, then the lowest threshold wins.
    """
    m, c = x.shape
    if m < 2 or c == 0:
        return None
    order = np.argsort(x, axis=0, kind="stable")
    xs = np.take_along_axis(x, order, axis=0)
    gs, hs = g[order], h[order]
    missing = np.isnan(xs)
    gs_present = np.where(missing, 0.0, gs)
    hs_present = np.where(missing, 0.0, hs)
    G_miss = gs.sum(axis=0) - gs_present.sum(axis=0)
    H_miss = hs.sum(axis=0) - hs_present.sum(axis=0)
    GL = np.cumsum(gs_present, axis=0)[:-1]
    HL = np.cumsum(hs_present, axis=0)[:-1]
    G_present, H_present = gs_present.sum(axis=0), hs_present.sum(axis=0)
    GR, HR = G_present - GL, H_present - HL

    with np.errstate(invalid="ignore", divide="ignore"):
        candidate = xs[:-1] < xs[1:]
        # missing rows routed right
        gain_r = split_gain(GL, HL, GR + G_miss, HR + H_miss, reg_lambda, gamma)
        # missing rows routed left
        gain_l = split_gain(GL + G_miss, HL + H_miss, GR, HR, reg_lambda, gamma)
    ok_r = candidate & (HL >= min_child_weight) & (HR + H_miss >= min_child_weight)
    ok_l = candidate & (HL + H_miss >= min_child_weight) & (HR >= min_child_weight)
    gain_r = np.where(ok_r, gain_r, -np.inf)
    gain_l = np.where(ok_l, gain_l, -np.inf)
    has_missing = H_miss > 0
    # without missing rows at the node, missing values at predict time follow the heavier child
    prefer_left = np.where(has_missing, gain_l > gain_r, HL >= HR)
    best = np.where(has_missing, np.maximum(gain_l, gain_r), gain_r)
    flat = best.T.ravel()
    pos = int(np.argmax(flat))
    gain = flat[pos]
    if not np.isfinite(gain) or gain <= 0:
        return None
    col, p = divmod(pos, m - 1)
    lo, hi = xs[p, col], xs[p + 1, col]
    threshold = lo + (hi - lo) / 2
    if not lo < threshold:
        threshold = hi
    return float(gain), col, float(threshold), bool(prefer_left[p, col])


def fit_tree(X, gradients, hessians, params: GbtParams, features=None) -> RegressionTree:
    """Grow one tree on gradient statistics.

    ``features`` restricts the candidate columns (column subsampling).  A
    node becomes a leaf when it is at ``max_depth`` or no split has positive
    gain; the leaf weight is ``-learning_rate * G / (H + reg_lambda)``.
    """
    X = np.asarray(X, dtype=float)
    g = np.asarray(gradients, dtype=float)
    h = np.asarray(hessians, dtype=float)
    if X.ndim != 2 or len(g) != X.shape[0] or len(h) != X.shape[0]:
        raise ValueError("X, gradients and hessians must agree in length")
    cols = np.arange(X.shape[1]) if features is None else np.sort(np.asarray(features, dtype=np.int64))
    lam, eta = params.reg_lambda, params.learning_rate

    nodes = []

    def new_node():
        nodes.append({"feature": -1, "threshold": 0.0, "default_left": False, "left": -1,
                      "right": -1, "value": 0.0, "cover": 0.0, "gain": 0.0})
        return len(nodes) - 1

    stack = [(new_node(), np.arange(X.shape[0]), 0)]
    while stack:
        node, rows, depth = stack.pop()
        G, H = float(g[rows].sum()), float(h[rows].sum())
        nodes[node]["cover"] = H
        split = None
        if depth < params.max_depth and len(rows) >= 2:
            split = _best_split(X[np.ix_(rows, cols)], g[rows], h[rows], lam, params.gamma,
                                params.min_child_weight)
        if split is None:
            nodes[node]["value"] = leaf_weight(G, H, lam, eta)
            continue
        gain, col, threshold, default_left = split
        feat = int(cols[col])
        x = X[rows, feat]
        go_left = np.where(np.isnan(x), default_left, x < threshold)
        left, right = new_node(), new_node()
        nodes[node].update(feature=feat, threshold=threshold, default_left=default_left,
                           left=left, right=right, gain=gain)
        # right pushed first so the left subtree is expanded first
        stack.append((right, rows[~go_left], depth + 1))
        stack.append((left, rows[go_left], depth + 1))

    tree = RegressionTree(
        feature=np.array([n["feature"] for n in nodes], dtype=np.int64),
        threshold=np.array([n["threshold"] for n in nodes], dtype=float),
        default_left=np.array([n["default_left"] for n in nodes], dtype=bool),
        left=np.array([n["left"] for n in nodes], dtype=np.int64),
        right=np.array([n["right"] for n in nodes], dtype=np.int64),
        value=np.array([n["value"] for n in nodes], dtype=float),
        cover=np.array([n["cover"] for n in nodes], dtype=float),
        gain=np.array([n["gain"] for n in nodes], dtype=float),
    )
    for node in range(tree.n_nodes - 1, -1, -1):
        if tree.left[node] >= 0:
            l, r = tree.left[node], tree.right[node]
            tree.value[node] = (tree.cover[l] * tree.value[l] + tree.cover[r] * tree.value[r]) / tree.cover[node]
    return tree


@dataclass
class GbtModel:
    base_score: float
    trees: list
    feature_names: list
    params: GbtParams = field(default_factory=GbtParams)
    metadata: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def _matrix(self, X) -> np.ndarray:
        if isinstance(X, pd.DataFrame):
            missing = [c for c in self.feature_names if c not in X.columns]
            if missing:
                raise FeatureMismatch(f"rows lack model features {missing}")
            return X[self.feature_names].to_numpy(dtype=float)
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise FeatureMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def tree_contributions(self, X) -> np.ndarray:
        X = self._matrix(X)
        out = np.zeros((X.shape[0], len(self.trees)))
        for k, tree in enumerate(self.trees):
            out[:, k] = tree.predict(X)
        return out

    def predict(self, X) -> np.ndarray:
        X = self._matrix(X)
        pred = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            pred += tree.predict(X)
        return pred

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "params": asdict(self.params),
            "base_score": self.base_score,
            "feature_names": list(self.feature_names),
            "trees": [t.to_dict() for t in self.trees],
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, allow_nan=False)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def from_dict(cls, d: dict) -> "GbtModel":
        if d.get("format") != FORMAT_NAME:
            raise DataError(f"not a {FORMAT_NAME} model")
        if d.get("version") != FORMAT_VERSION:
            raise DataError(f"unsupported model version {d.get('version')}")
        return cls(
            base_score=float(d["base_score"]),
            trees=[RegressionTree.from_dict(t) for t in d["trees"]],
            feature_names=list(d["feature_names"]),
            params=GbtParams.from_dict(d["params"]),
            metadata=d.get("metadata", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "GbtModel":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "GbtModel":
        path = Path(path)
        if not path.exists():
            raise DataError(f"{path}: model file not found")
        return cls.from_json(path.read_text())


def predict(model: GbtModel, rows) -> np.ndarray:
    return model.predict(rows)


def _names_and_matrix(X):
    if isinstance(X, pd.DataFrame):
        return list(X.columns), X.to_numpy(dtype=float)
    X = np.asarray(X, dtype=float)
    return [f"x{j}" for j in range(X.shape[1])], X


def train_gbt(X_train, y_train, X_valid=None, y_valid=None, params: GbtParams | None = None) -> GbtModel:
    """Boost trees until the validation error stops improving.

    The base score is the training-target mean.  After each round the
    validation mean squared error is recorded; once it has not improved for
    ``early_stopping_rounds`` rounds, training stops and the model is cut back
    to the best round (possibly zero trees).  Without a validation set, or
    with ``early_stopping_rounds`` unset or at least ``max_rounds``, exactly
    ``max_rounds`` trees are kept.
    """
    params = params or GbtParams()
    names, X = _names_and_matrix(X_train)
    y = np.asarray(y_train, dtype=float)
    if len(y) != X.shape[0] or len(y) == 0:
        raise DataError("training rows and targets differ in length or are empty")
    if np.isnan(y).any():
        raise DataError("training targets contain missing values")
    has_valid = X_valid is not None
    if has_valid:
        Xv = X_valid[names].to_numpy(float) if isinstance(X_valid, pd.DataFrame) else np.asarray(X_valid, float)
        yv = np.asarray(y_valid, dtype=float)
    patience = params.early_stopping_rounds
    early_stop = has_valid and patience is not None and patience < params.max_rounds

    rng = np.random.default_rng(params.seed)
    n, p = X.shape
    base = float(np.mean(y))
    pred = np.full(n, base)
    pred_v = np.full(len(yv), base) if has_valid else None
    hess = np.ones(n)
    trees, curve = [], []

    def record(round_):
        curve.append({
            "round": round_,
            "train_mse": float(np.mean((pred - y) ** 2)),
            "valid_mse": float(np.mean((pred_v - yv) ** 2)) if has_valid else None,
        })

    record(0)
    best_round, best_err = 0, curve[0]["valid_mse"]
    n_cols = max(1, int(round(params.colsample * p)))
    n_rows = max(1, int(round(params.subsample * n)))
    for round_ in range(1, params.max_rounds + 1):
        rows = np.arange(n) if n_rows == n else np.sort(rng.choice(n, n_rows, replace=False))
        cols = np.arange(p) if n_cols == p else np.sort(rng.choice(p, n_cols, replace=False))
        grad = pred - y
        tree = fit_tree(X[rows], grad[rows], hess[rows], params, features=cols)
        trees.append(tree)
        pred += tree.predict(X)
        if has_valid:
            pred_v += tree.predict(Xv)
        record(round_)
        if has_valid and curve[-1]["valid_mse"] < best_err:
            best_round, best_err = round_, curve[-1]["valid_mse"]
        if early_stop and round_ - best_round >= patience:
            break

    n_keep = best_round if early_stop else len(trees)
    metadata = {
        "rounds_trained": len(trees),
        "rounds_used": n_keep,
        "best_valid_mse": best_err,
        "curve": curve,
    }
    return GbtModel(base, trees[:n_keep], names, params, metadata)


def training_log(model: GbtModel) -> pd.DataFrame:
    return pd.DataFrame(model.metadata.get("curve", []))


@dataclass
class DatasetSplit:
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray
    seed: int

    def to_dict(self) -> dict:
        return {"seed": self.seed, "train": self.train.tolist(), "valid": self.valid.tolist(),
                "test": self.test.tolist()}

    @classmethod
    def from_dict(cls, d) -> "DatasetSplit":
        return cls(np.array(d["train"], dtype=np.int64), np.array(d["valid"], dtype=np.int64),
                   np.array(d["test"], dtype=np.int64), int(d["seed"]))


def split_dataset(targets, seed: int) -> DatasetSplit:
    """Random 64/16/20 partition of the rows whose target is present.

    Returned indices are positions into ``targets`` and are sorted.
    """
    y = np.asarray(targets, dtype=float)
    rows = np.flatnonzero(~np.isnan(y))
    n = len(rows)
    if n < MIN_SPLIT_ROWS:
        raise TooFewRows(f"{n} rows with a target; need at least {MIN_SPLIT_ROWS}")
    n_train = int(round(SPLIT_FRACTIONS[0] * n))
    n_valid = int(round(SPLIT_FRACTIONS[1] * n))
    perm = np.random.default_rng(seed).permutation(rows)
    return DatasetSplit(np.sort(perm[:n_train]), np.sort(perm[n_train:n_train + n_valid]),
                        np.sort(perm[n_train + n_valid:]), seed)


def expand_grid(grid: dict) -> list:
    """Grid points in deterministic order (last key varies fastest)."""
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise EmptyGrid("parameter grid is empty")
    keys = list(grid)
    return [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]


def grid_search_cv(X, y, grid: dict, base_params: GbtParams | None = None, k: int = 5, seed: int = 0):
    """k-fold cross-validated grid search on the training set.

    Each fold's held-out part doubles as that fit's early-stopping set.  The
    grid point with the highest mean held-out R^2 wins, the first one on ties.
    Returns ``(best_params, results)`` with one results row per grid point.
    """
    from freqxai.analysis import r2_score

    base_params = base_params or GbtParams()
    points = expand_grid(grid)
    names, Xm = _names_and_matrix(X)
    y = np.asarray(y, dtype=float)
    if k < 2 or len(y) < k:
        raise DataError(f"cannot build {k} folds from {len(y)} rows")
    folds = np.array_split(np.random.default_rng(seed).permutation(len(y)), k)
    rows = []
    for point in points:
        params = replace(base_params, **point)
        scores = []
        for i, held in enumerate(folds):
            fit_rows = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
            held = np.sort(held)
            model = train_gbt(Xm[fit_rows], y[fit_rows], Xm[held], y[held], params)
            scores.append(r2_score(y[held], model.predict(Xm[held])))
        rows.append({**point, "mean_r2": float(np.mean(scores)), "fold_r2": scores})
        logger.info("grid point %s: mean R2 %.4f", point, rows[-1]["mean_r2"])
    results = pd.DataFrame(rows)
    best = int(np.argmax(results["mean_r2"].to_numpy()))
    return replace(base_params, **points[best]), results
