"""From-scratch bagged decision-tree classifier and threshold metrics.

Axis-aligned binary trees split on Gini impurity; each tree trains on a
bootstrap sample with a random feature subset per split.  A leaf stores the
class-1 fraction of its training rows and the forest score is the mean leaf
fraction across trees, so scores live in [0, 1] and thresholding them yields
the sensitivity/specificity pair that drives claim frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.model_selection import StratifiedKFold
from sklearn.utils.validation import check_array, check_X_y

from .data import TabularDataset

__all__ = [
    "DecisionTree",
    "ForestClassifier",
    "ThresholdMetrics",
    "DEFAULT_GRID",
    "train_forest",
    "predict_scores",
    "metrics_at_threshold",
    "roc_auc",
]

#: cross-validation grid when none is supplied
DEFAULT_GRID = {"n_trees": [50, 100, 200], "max_depth": [3, 5, 8, None]}


@dataclass
class DecisionTree:
    """Flat array representation; children index into the same arrays."""

    feature: np.ndarray  # -1 for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # class-1 fraction at leaves

    def predict(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(x.shape[0])
        stack = [(0, np.arange(x.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            f = self.feature[node]
            if f < 0:
                out[idx] = self.value[node]
                continue
            go_left = x[idx, f] <= self.threshold[node]
            stack.append((self.left[node], idx[go_left]))
            stack.append((self.right[node], idx[~go_left]))
        return out

    @property
    def depth(self) -> int:
        depths = np.zeros(self.feature.size, dtype=int)
        for node in range(self.feature.size):
            if self.feature[node] >= 0:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max()) if depths.size else 0


def _best_split(x: np.ndarray, y: np.ndarray, features: np.ndarray, min_leaf: int):
    """Lowest-weighted-Gini split over the candidate features, or None."""
    n = y.size
    best = None  # (score, feature, threshold)
    for f in features:
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        ones = np.cumsum(y[order])[:-1]  # class-1 count left of each cut
        total1 = ones[-1] + y[order][-1] if n > 1 else y.sum()
        sizes = np.arange(1, n)
        valid = (xs[:-1] < xs[1:]) & (sizes >= min_leaf) & (n - sizes >= min_leaf)
        if not valid.any():
            continue
        left1 = ones[valid]
        left_n = sizes[valid]
        right1 = total1 - left1
        right_n = n - left_n
        score = left1 * (left_n - left1) / left_n + right1 * (right_n - right1) / right_n
        k = int(np.argmin(score))
        cut = np.flatnonzero(valid)[k]
        thr = 0.5 * (xs[cut] + xs[cut + 1])
        cand = (float(score[k]), int(f), float(thr))
        if best is None or cand[0] < best[0] - 1e-12:
            best = cand
    return best


def _grow_tree(
    x: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    max_depth: int | None,
    min_leaf: int,
    mtry: int,
) -> DecisionTree:
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    stack = [(new_node(), np.arange(y.size), 0)]
    d = x.shape[1]
    while stack:
        node, idx, depth = stack.pop()
        ysub = y[idx]
        value[node] = float(ysub.mean())
        if (
            idx.size < 2 * min_leaf
            or (max_depth is not None and depth >= max_depth)
            or ysub.min() == ysub.max()
        ):
            continue
        cand_features = rng.choice(d, size=min(mtry, d), replace=False)
        split = _best_split(x[idx], ysub, cand_features, min_leaf)
        if split is None:
            continue
        _, f, thr = split
        go_left = x[idx, f] <= thr
        if not go_left.any() or go_left.all():
            continue
        feature[node] = f
        threshold[node] = thr
        left[node] = new_node()
        right[node] = new_node()
        stack.append((left[node], idx[go_left], depth + 1))
        stack.append((right[node], idx[~go_left], depth + 1))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value),
    )


class ForestClassifier(BaseEstimator, ClassifierMixin):
    """Bagging ensemble of Gini decision trees with sklearn estimator API.

    Deterministic for a fixed ``random_state``: tree t draws its bootstrap
    sample and split features from a stream keyed by (random_state, t).
    """

    def __init__(
        self,
        n_trees: int = 100,
        max_depth: int | None = None,
        min_leaf: int = 1,
        features_per_split: int | None = None,
        random_state: int = 0,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.features_per_split = features_per_split
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        classes = np.unique(y)
        if not np.isin(classes, (0, 1)).all() or classes.size != 2:
            raise ValueError("binary labels in {0, 1} with both classes required")
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        mtry = self.features_per_split or math.ceil(math.sqrt(X.shape[1]))
        y = y.astype(float)
        self.trees_ = []
        for t in range(self.n_trees):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=self.random_state, spawn_key=(t,))
            )
            boot = rng.integers(0, X.shape[0], X.shape[0])
            self.trees_.append(
                _grow_tree(X[boot], y[boot], rng, self.max_depth, self.min_leaf, mtry)
            )
        return self

    def _tree_scores(self, X) -> np.ndarray:
        """(n_trees, n_samples) per-tree leaf fractions."""
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        return np.array([tree.predict(X) for tree in self.trees_])

    def predict_scores(self, X) -> np.ndarray:
        """Mean leaf fraction across trees, in [0, 1]."""
        return self._tree_scores(X).mean(axis=0)

    def predict_proba(self, X) -> np.ndarray:
        s = self.predict_scores(X)
        return np.column_stack([1.0 - s, s])

    def predict(self, X) -> np.ndarray:
        return (self.predict_scores(X) > 0.5).astype(int)


def predict_scores(model: ForestClassifier, features) -> np.ndarray:
    return model.predict_scores(features)


@dataclass(frozen=True)
class ThresholdMetrics:
    tau: float
    sensitivity: float  # lambda_tau
    specificity: float  # kappa_tau
    tp: int
    fp: int
    tn: int
    fn: int


def metrics_at_threshold(scores, labels, tau: float) -> ThresholdMetrics:
    """Confusion counts with the strict rule: predict 1 iff score > tau."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=int)
    if s.shape != y.shape:
        raise ValueError("scores and labels must have the same length")
    pred = s > tau
    tp = int(np.sum(pred & (y == 1)))
    fp = int(np.sum(pred & (y == 0)))
    tn = int(np.sum(~pred & (y == 0)))
    fn = int(np.sum(~pred & (y == 1)))
    sens = tp / (tp + fn) if tp + fn else float("nan")
    spec = tn / (tn + fp) if tn + fp else float("nan")
    return ThresholdMetrics(tau, sens, spec, tp, fp, tn, fn)


def roc_auc(scores, labels) -> float:
    """Tie-aware trapezoidal area under the ROC curve."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=int)
    n1 = int(np.sum(y == 1))
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("both classes required for AUC")
    order = np.argsort(-s, kind="stable")
    s_sorted, y_sorted = s[order], y[order]
    # group tied scores so ties contribute a diagonal segment
    boundary = np.flatnonzero(np.diff(s_sorted)) + 1
    group_ends = np.append(boundary, s_sorted.size)
    tps = np.cumsum(y_sorted)[group_ends - 1]
    fps = group_ends - tps
    tpr = np.concatenate([[0.0], tps / n1])
    fpr = np.concatenate([[0.0], fps / n0])
    return float(np.trapezoid(tpr, fpr))


def train_forest(
    train: TabularDataset,
    grid: dict | None = None,
    cv_folds: int = 10,
    seed: int = 0,
) -> ForestClassifier:
    """Select (n_trees, max_depth) by mean cross-validated AUC, then refit.

    Tree counts are evaluated as prefixes of one ensemble per (fold, depth),
    which is equivalent to training each count separately with this RNG
    keying and an order of magnitude cheaper.
    """
    grid = grid or DEFAULT_GRID
    tree_counts = sorted(grid["n_trees"])
    depths = list(grid["max_depth"])
    if not tree_counts or not depths:
        raise ValueError("hyperparameter grid must be non-empty")

    x, y = train.features, train.labels
    skf = StratifiedKFold(n_splits=cv_folds, shuffle=True, random_state=seed)
    folds = list(skf.split(x, y))
    mean_auc = {}
    for depth in depths:
        fold_aucs = np.zeros((len(folds), len(tree_counts)))
        for i, (tr, te) in enumerate(folds):
            model = ForestClassifier(
                n_trees=tree_counts[-1], max_depth=depth, random_state=seed
            ).fit(x[tr], y[tr])
            per_tree = model._tree_scores(x[te])
            cum = np.cumsum(per_tree, axis=0)
            for k, n_trees in enumerate(tree_counts):
                fold_aucs[i, k] = roc_auc(cum[n_trees - 1] / n_trees, y[te])
        for k, n_trees in enumerate(tree_counts):
            mean_auc[(n_trees, depth)] = float(fold_aucs[:, k].mean())

    best = None
    for depth in depths:
        for n_trees in tree_counts:
            key = (n_trees, depth)
            if best is None or mean_auc[key] > mean_auc[best] + 1e-12:
                best = key
    n_trees, depth = best
    final = ForestClassifier(n_trees=n_trees, max_depth=depth, random_state=seed)
    final.fit(x, y)
    final.cv_results_ = mean_auc
    return final
