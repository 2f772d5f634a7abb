"""Gradient-boosted decision trees for 3-class trend labels, from scratch.

Softmax objective with second-order split gains, L2 leaf regularization
fixed at lambda = 1. One regression tree per class per round. The split
search is exact greedy over sorted unique values; ties resolve by the total
order (gain, lower feature index, lower threshold), so results are
schedule-independent. Identical (data, config, seed) give bit-identical
serialized models.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

LAMBDA = 1.0
CLASSES = (-1, 0, 1)


@dataclass(frozen=True)
class BoostConfig:
    n_estimators: int = 100
    max_depth: int = 3
    colsample_bytree: float = 1.0
    min_child_weight: float = 1.0
    learning_rate: float = 0.1
    gamma: float = 0.0
    subsample: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not (0.0 < self.colsample_bytree <= 1.0):
            raise ValueError("colsample_bytree must be in (0, 1]")
        if not (0.0 < self.subsample <= 1.0):
            raise ValueError("subsample must be in (0, 1]")
        # rate 0 is allowed as a degenerate baseline: every leaf scales to
        # zero, so the model predicts uniform probabilities
        if self.learning_rate < 0.0:
            raise ValueError("learning_rate must be >= 0")
        if self.gamma < 0.0:
            raise ValueError("gamma must be >= 0")
        if self.min_child_weight < 0.0:
            raise ValueError("min_child_weight must be >= 0")

    def as_dict(self) -> dict:
        return asdict(self)


# Tree nodes are plain dicts:
#   split: {"feature": int, "threshold": float, "gain": float, "cover": int,
#           "left": node, "right": node}
#   leaf:  {"value": float, "cover": int}
# Rows with x[feature] < threshold go left.


def _split_node(node: dict) -> bool:
    return "feature" in node


class BoostedEnsemble:
    def __init__(self, config: BoostConfig, feature_names: list[str],
                 trees: list[dict]):
        self.config = config
        self.feature_names = list(feature_names)
        self.trees = trees          # [{"round": r, "class_index": k, "root": node}]

    # -- prediction ---------------------------------------------------------

    def _resolve_matrix(self, rows) -> np.ndarray:
        if hasattr(rows, "frame"):               # FeatureMatrix
            rows = rows.frame.drop(columns="label")
        if hasattr(rows, "columns"):             # DataFrame
            extra = [c for c in rows.columns if c not in self.feature_names]
            missing = [c for c in self.feature_names if c not in rows.columns]
            if extra or missing:
                raise ValueError(
                    f"feature schema mismatch: unknown {extra}, missing {missing}")
            return rows[self.feature_names].to_numpy(dtype=np.float64)
        x = np.asarray(rows, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != len(self.feature_names):
            raise ValueError("row width does not match the training schema")
        return x

    def margins(self, rows) -> np.ndarray:
        x = self._resolve_matrix(rows)
        out = np.zeros((x.shape[0], len(CLASSES)))
        for t in self.trees:
            out[:, t["class_index"]] += _apply_tree(t["root"], x)
        return out

    def predict_proba(self, rows) -> np.ndarray:
        return _softmax(self.margins(rows))

    def predict(self, rows) -> np.ndarray:
        p = self.predict_proba(rows)
        return np.array(CLASSES, dtype=np.int64)[np.argmax(p, axis=1)]

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "kind": "boosted-trees",
            "version": 1,
            "classes": list(CLASSES),
            "config": self.config.as_dict(),
            "feature_names": self.feature_names,
            "trees": self.trees,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "BoostedEnsemble":
        doc = json.loads(text)
        if doc.get("kind") != "boosted-trees":
            raise ValueError("not a boosted-trees model document")
        return cls(BoostConfig(**doc["config"]), doc["feature_names"],
                   doc["trees"])

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "BoostedEnsemble":
        with open(path) as fh:
            return cls.from_json(fh.read())


def _softmax(margins: np.ndarray) -> np.ndarray:
    z = margins - margins.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _apply_tree(node: dict, x: np.ndarray) -> np.ndarray:
    out = np.empty(x.shape[0])
    _apply_into(node, x, np.arange(x.shape[0]), out)
    return out


def _apply_into(node, x, idx, out) -> None:
    if not _split_node(node):
        out[idx] = node["value"]
        return
    go_left = x[idx, node["feature"]] < node["threshold"]
    _apply_into(node["left"], x, idx[go_left], out)
    _apply_into(node["right"], x, idx[~go_left], out)


class _TreeGrower:
    """Exact greedy builder over a presorted feature matrix."""

    def __init__(self, x: np.ndarray, presort_t: np.ndarray, cfg: BoostConfig):
        self.x = x
        self.xt = np.ascontiguousarray(x.T)
        self.presort_t = presort_t          # (n_features, n_rows) int32
        self.cfg = cfg

    def grow(self, mask: np.ndarray, g: np.ndarray, h: np.ndarray,
             cols: np.ndarray) -> dict:
        """mask selects this tree's rows; g/h are full-length arrays."""
        sel_t = self.presort_t[cols]
        sel_t = sel_t[mask[sel_t]].reshape(cols.size, -1)
        return self._node(sel_t, cols, g, h, depth=0)

    def _node(self, sel_t, cols, g, h, depth) -> dict:
        n = sel_t.shape[1]
        gs = g[sel_t]
        hs = h[sel_t]
        g_tot = float(gs[0].sum())
        h_tot = float(hs[0].sum())
        cfg = self.cfg

        def leaf() -> dict:
            return {"value": -g_tot / (h_tot + LAMBDA) * cfg.learning_rate,
                    "cover": n}

        if depth >= cfg.max_depth or n < 2:
            return leaf()

        vals = np.take_along_axis(self.xt[cols], sel_t, axis=1)
        cg = np.cumsum(gs, axis=1)[:, :-1]
        ch = np.cumsum(hs, axis=1)[:, :-1]
        gl, hl = cg, ch
        gr = g_tot - gl
        hr = h_tot - hl
        parent_score = g_tot * g_tot / (h_tot + LAMBDA)
        gains = 0.5 * (gl * gl / (hl + LAMBDA) + gr * gr / (hr + LAMBDA)
                       - parent_score)
        valid = ((vals[:, :-1] < vals[:, 1:])
                 & (hl >= cfg.min_child_weight)
                 & (hr >= cfg.min_child_weight))
        if not valid.any():
            return leaf()
        gains = np.where(valid, gains, -np.inf)
        # first flat maximum = best gain, then lowest feature, then lowest
        # threshold (cols are ascending, positions scan left to right)
        flat = int(np.argmax(gains))
        fi, pos = divmod(flat, gains.shape[1])
        best_gain = float(gains[fi, pos])
        if not best_gain - cfg.gamma > 0.0:
            return leaf()
        threshold = float((vals[fi, pos] + vals[fi, pos + 1]) / 2.0)

        left_rows = sel_t[fi, :pos + 1]
        left_mask = np.zeros(self.x.shape[0], dtype=bool)
        left_mask[left_rows] = True
        in_left = left_mask[sel_t]
        left_t = sel_t[in_left].reshape(cols.size, pos + 1)
        right_t = sel_t[~in_left].reshape(cols.size, n - pos - 1)
        return {
            "feature": int(cols[fi]),
            "threshold": threshold,
            "gain": best_gain,
            "cover": n,
            "left": self._node(left_t, cols, g, h, depth + 1),
            "right": self._node(right_t, cols, g, h, depth + 1),
        }


def _resolve_xy(train, columns=None):
    if hasattr(train, "frame"):          # FeatureMatrix
        cols = list(columns) if columns is not None else train.feature_columns
        return train.x(cols), train.y, cols
    raise TypeError("expected a FeatureMatrix; use fit_arrays for raw arrays")


def fit(train, cfg: BoostConfig, columns: Sequence[str] | None = None
        ) -> BoostedEnsemble:
    x, y, names = _resolve_xy(train, columns)
    return fit_arrays(x, y, cfg, names)


def fit_arrays(x: np.ndarray, y: np.ndarray, cfg: BoostConfig,
               feature_names: Sequence[str] | None = None) -> BoostedEnsemble:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("x and y must align")
    n, n_feat = x.shape
    if feature_names is None:
        feature_names = [f"f{j}" for j in range(n_feat)]
    if len(set(np.unique(y)) - set(CLASSES)) > 0:
        raise ValueError(f"labels must lie in {CLASSES}")
    if np.unique(y).size < 2:
        raise ValueError("training labels are single-class")

    classes = np.array(CLASSES, dtype=np.int64)
    y_idx = np.searchsorted(classes, y)
    y_onehot = np.zeros((n, 3))
    y_onehot[np.arange(n), y_idx] = 1.0

    rng = np.random.default_rng(cfg.seed)
    presort_t = np.argsort(x, axis=0, kind="stable").T.astype(np.int64)
    presort_t = np.ascontiguousarray(presort_t)
    grower = _TreeGrower(x, presort_t, cfg)

    n_sub = max(1, int(round(cfg.subsample * n)))
    n_cols = max(1, int(round(cfg.colsample_bytree * n_feat)))

    margins = np.zeros((n, 3))
    trees: list[dict] = []
    for r in range(cfg.n_estimators):
        p = _softmax(margins)
        if cfg.subsample < 1.0:
            mask = np.zeros(n, dtype=bool)
            mask[rng.permutation(n)[:n_sub]] = True
        else:
            mask = np.ones(n, dtype=bool)
        for k in range(3):
            if cfg.colsample_bytree < 1.0:
                cols = np.sort(rng.choice(n_feat, size=n_cols, replace=False))
            else:
                cols = np.arange(n_feat)
            g = p[:, k] - y_onehot[:, k]
            h = p[:, k] * (1.0 - p[:, k])
            root = grower.grow(mask, g, h, cols)
            margins[:, k] += _apply_tree(root, x)
            trees.append({"round": r, "class_index": k, "root": root})
    return BoostedEnsemble(cfg, list(feature_names), trees)


def predict(model: BoostedEnsemble, rows) -> tuple[np.ndarray, np.ndarray]:
    """(labels, class probabilities) for the given rows."""
    proba = model.predict_proba(rows)
    labels = np.array(CLASSES, dtype=np.int64)[np.argmax(proba, axis=1)]
    return labels, proba


def log_loss(model: BoostedEnsemble, rows, y: np.ndarray) -> float:
    p = model.predict_proba(rows)
    classes = np.array(CLASSES, dtype=np.int64)
    idx = np.searchsorted(classes, np.asarray(y))
    picked = np.clip(p[np.arange(len(idx)), idx], 1e-15, 1.0)
    return float(-np.log(picked).mean())


# -- importances -------------------------------------------------------------


def _walk_splits(node: dict):
    if _split_node(node):
        yield node
        yield from _walk_splits(node["left"])
        yield from _walk_splits(node["right"])


def importances(model: BoostedEnsemble, metric: str = "gain",
                normalize: bool = False) -> dict[str, float]:
    """Accumulated split statistics per feature.

    Raw totals by default: gain sums split gains, cover sums observation
    counts at split nodes, weight counts splits. With normalize=True, gain
    and cover become per-split averages and weight becomes a share of all
    splits. Features never split score 0.
    """
    if metric not in ("gain", "cover", "weight"):
        raise ValueError("metric must be gain, cover or weight")
    gain = {name: 0.0 for name in model.feature_names}
    cover = {name: 0.0 for name in model.feature_names}
    weight = {name: 0.0 for name in model.feature_names}
    for t in model.trees:
        for node in _walk_splits(t["root"]):
            name = model.feature_names[node["feature"]]
            gain[name] += node["gain"]
            cover[name] += node["cover"]
            weight[name] += 1.0
    raw = {"gain": gain, "cover": cover, "weight": weight}[metric]
    if not normalize:
        return raw
    if metric == "weight":
        total = sum(weight.values())
        return {k: (v / total if total else 0.0) for k, v in raw.items()}
    return {k: (v / weight[k] if weight[k] else 0.0) for k, v in raw.items()}


def permutation_importance(
    model: BoostedEnsemble,
    test,
    metric: str = "accuracy",
    n_repeats: int = 5,
    seed: int = 0,
) -> dict[str, float]:
    """Mean score drop per shuffled column.

    accuracy: fraction of correct labels. impurity: one minus the Gini
    impurity of the true labels within groups sharing a predicted label, so
    a degraded model that mixes the classes inside its predicted groups
    scores lower.
    """
    if metric not in ("accuracy", "impurity"):
        raise ValueError("metric must be accuracy or impurity")
    if isinstance(test, tuple):
        rows, y = test
        x = model._resolve_matrix(np.asarray(rows))
    else:
        x = model._resolve_matrix(test)
        y = test.y
    y = np.asarray(y)
    if x.shape[0] == 0:
        raise ValueError("empty evaluation set")

    def score(mat):
        labels = np.array(CLASSES, dtype=np.int64)[
            np.argmax(model.predict_proba(mat), axis=1)]
        if metric == "accuracy":
            return float((labels == y).mean())
        weighted = 0.0
        for c in CLASSES:
            group = y[labels == c]
            if group.size == 0:
                continue
            shares = np.array([(group == k).mean() for k in CLASSES])
            weighted += group.size / y.size * (1.0 - (shares ** 2).sum())
        return 1.0 - weighted

    base = score(x)
    rng = np.random.default_rng(seed)
    out = {}
    for j, name in enumerate(model.feature_names):
        drops = []
        for _ in range(n_repeats):
            shuffled = x.copy()
            shuffled[:, j] = shuffled[rng.permutation(x.shape[0]), j]
            drops.append(base - score(shuffled))
        out[name] = float(np.mean(drops))
    return out


# -- model selection ----------------------------------------------------------


def _binary_auc(scores: np.ndarray, positive: np.ndarray) -> float:
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    ranks = rankdata(scores)
    r_pos = float(ranks[positive].sum())
    return (r_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def macro_auc(proba: np.ndarray, y: np.ndarray) -> float:
    """One-vs-rest AUC averaged over classes present on both sides."""
    classes = np.array(CLASSES, dtype=np.int64)
    vals = []
    for k, c in enumerate(classes):
        auc = _binary_auc(proba[:, k], np.asarray(y) == c)
        if not math.isnan(auc):
            vals.append(auc)
    if not vals:
        return float("nan")
    return float(np.mean(vals))


def forward_folds(n: int, n_folds: int = 4):
    """Forward-chaining indices: fold i trains on [0, b*(i+1)) and validates
    on the following block."""
    if n < (n_folds + 1) * 2:
        raise ValueError("too few rows for the requested folds")
    b = n // (n_folds + 1)
    for i in range(1, n_folds + 1):
        hi = (i + 1) * b if i < n_folds else n
        yield np.arange(0, i * b), np.arange(i * b, hi)


@dataclass
class GridSearchResult:
    best: BoostConfig
    table: list[dict]
    folds_skipped: int


_GRID_ORDER = ("n_estimators", "max_depth", "colsample_bytree",
               "min_child_weight", "learning_rate", "gamma", "subsample")


def grid_search(train, grid: dict[str, list], n_folds: int = 4,
                seed: int = 0, columns: Sequence[str] | None = None
                ) -> GridSearchResult:
    """Best config by mean macro AUC across forward-chaining folds.

    Ties keep the earliest config in canonical enumeration order.
    """
    if not grid:
        raise ValueError("empty grid")
    unknown = set(grid) - set(_GRID_ORDER)
    if unknown:
        raise ValueError(f"unknown grid parameters: {sorted(unknown)}")
    x, y, names = _resolve_xy(train, columns)

    # outer product in canonical parameter order, later keys varying fastest
    combos: list[dict] = [{}]
    for key in _GRID_ORDER:
        if key in grid:
            combos = [dict(c, **{key: v}) for c in combos for v in grid[key]]

    table: list[dict] = []
    skipped_total = 0
    best_cfg = None
    best_score = -np.inf
    for combo in combos:
        cfg = BoostConfig(seed=seed, **combo)
        scores = []
        skipped = 0
        for tr_idx, va_idx in forward_folds(len(y), n_folds):
            if np.unique(y[tr_idx]).size < 2 or np.unique(y[va_idx]).size < 2:
                skipped += 1
                continue
            model = fit_arrays(x[tr_idx], y[tr_idx], cfg, names)
            auc = macro_auc(model.predict_proba(x[va_idx]), y[va_idx])
            if not math.isnan(auc):
                scores.append(auc)
        mean_auc = float(np.mean(scores)) if scores else float("nan")
        table.append({"params": combo, "mean_auc": mean_auc,
                      "n_folds_used": len(scores), "folds_skipped": skipped})
        skipped_total += skipped
        if scores and mean_auc > best_score:
            best_score = mean_auc
            best_cfg = cfg
    if best_cfg is None:
        raise ValueError("no grid point could be scored")
    return GridSearchResult(best_cfg, table, skipped_total)


def select_features(train, cfg: BoostConfig, k: int = 15,
                    columns: Sequence[str] | None = None
                    ) -> tuple[list[str], BoostedEnsemble]:
    """Top-k columns by raw gain of a preliminary fit, then a refit on them."""
    x, y, names = _resolve_xy(train, columns)
    if k > len(names):
        raise ValueError("k exceeds the feature count")
    prelim = fit_arrays(x, y, cfg, names)
    scores = importances(prelim, "gain")
    order = sorted(range(len(names)),
                   key=lambda j: (-scores[names[j]], j))
    keep_idx = sorted(order[:k])
    keep = [names[j] for j in keep_idx]
    refit = fit_arrays(x[:, keep_idx], y, cfg, keep)
    return keep, refit
