"""Dataset container, file loaders, imputation, and stratified splitting.

Two Breast Cancer Wisconsin schemas are supported:

* ``original-699``: id, 9 integer features (1-10, '?' for missing), class 2/4.
  A copy ships with the package and is the default experiment dataset.
* ``wdbc-569``: id, diagnosis M/B, 30 numeric features.

Labels are mapped to {0, 1} with malignant = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

__all__ = [
    "TabularDataset",
    "DatasetError",
    "SCHEMAS",
    "load_dataset",
    "bundled_dataset_path",
    "load_and_impute",
    "feature_means",
    "stratified_split",
    "DATASET_URLS",
]

SCHEMAS = ("original-699", "wdbc-569")

ORIGINAL_FEATURE_NAMES = [
    "Clump Thickness",
    "Cell Size Uniformity",
    "Cell Shape Uniformity",
    "Marginal Adhesion",
    "Single Epithelial Cell Size",
    "Bare Nuclei",
    "Bland Chromatin",
    "Normal Nucleoli",
    "Mitoses",
]

DATASET_URLS = {
    "original-699": "https://archive.ics.uci.edu/ml/machine-learning-databases/breast-cancer-wisconsin/breast-cancer-wisconsin.data",
    "wdbc-569": "https://archive.ics.uci.edu/ml/machine-learning-databases/breast-cancer-wisconsin/wdbc.data",
}


class DatasetError(ValueError):
    """Malformed dataset file or degenerate dataset."""


@dataclass(frozen=True)
class TabularDataset:
    features: np.ndarray  # (N, D), NaN marks a missing value
    labels: np.ndarray  # (N,) in {0, 1}
    feature_names: tuple

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=int)
        if x.ndim != 2 or y.shape != (x.shape[0],):
            raise DatasetError("features must be (N, D) with one label per row")
        if len(self.feature_names) != x.shape[1]:
            raise DatasetError("one feature name per column required")
        if not np.isin(y, (0, 1)).all():
            raise DatasetError("labels must be 0/1")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_missing(self) -> int:
        return int(np.isnan(self.features).sum())


def bundled_dataset_path() -> str:
    """Path of the packaged original-699 file."""
    return str(resources.files("algoinsure") / "datasets" / "breast-cancer-wisconsin.data")


def load_dataset(path: str, schema: str = "original-699") -> TabularDataset:
    """Parse a dataset file; raises DatasetError with the offending line number."""
    if schema not in SCHEMAS:
        raise DatasetError(f"unknown schema {schema!r}, expected one of {SCHEMAS}")
    rows, labels = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                if schema == "original-699":
                    if len(parts) != 11:
                        raise ValueError(f"expected 11 fields, got {len(parts)}")
                    feats = [float("nan") if v == "?" else float(v) for v in parts[1:10]]
                    cls = int(parts[10])
                    if cls not in (2, 4):
                        raise ValueError(f"class must be 2 or 4, got {cls}")
                    labels.append(1 if cls == 4 else 0)
                else:
                    if len(parts) != 32:
                        raise ValueError(f"expected 32 fields, got {len(parts)}")
                    if parts[1] not in ("M", "B"):
                        raise ValueError(f"diagnosis must be M or B, got {parts[1]!r}")
                    feats = [float(v) for v in parts[2:]]
                    labels.append(1 if parts[1] == "M" else 0)
            except ValueError as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from exc
            rows.append(feats)
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    names = (
        ORIGINAL_FEATURE_NAMES
        if schema == "original-699"
        else [f"feature_{i}" for i in range(30)]
    )
    return TabularDataset(np.array(rows), np.array(labels), tuple(names))


def feature_means(dataset: TabularDataset) -> np.ndarray:
    """Per-feature means over the non-missing entries."""
    observed = ~np.isnan(dataset.features)
    if not np.all(observed.any(axis=0)):
        bad = [
            dataset.feature_names[i]
            for i in np.flatnonzero(~observed.any(axis=0))
        ]
        raise DatasetError(f"feature(s) with no observed values: {bad}")
    return np.nanmean(dataset.features, axis=0)


def load_and_impute(dataset: TabularDataset, means: np.ndarray | None = None) -> TabularDataset:
    """Fill missing entries with feature means.

    Pass the training partition's means when imputing a held-out partition so
    no information leaks from it.
    """
    if means is None:
        means = feature_means(dataset)
    x = np.where(np.isnan(dataset.features), means, dataset.features)
    return replace(dataset, features=x)


def stratified_split(
    dataset: TabularDataset, train_fraction: float = 0.75, seed: int = 0
) -> tuple[TabularDataset, TabularDataset]:
    """Disjoint, exhaustive train/test partition, stratified by label."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    y = dataset.labels
    if len(np.unique(y)) < 2:
        raise DatasetError("both classes must be present to split")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        n_train = int(round(train_fraction * idx.size))
        n_train = min(max(n_train, 1), idx.size - 1)
        train_idx.append(idx[:n_train])
        test_idx.append(idx[n_train:])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    subset = lambda idx: replace(
        dataset, features=dataset.features[idx], labels=dataset.labels[idx]
    )
    return subset(train_idx), subset(test_idx)
