"""Shared data model: multi-feature datasets, co-training views and pseudo-labels.

Class labels are 1-based (``1..K``). An unlabeled row carries ``None``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np


class View(str, Enum):
    EF = "EF"
    LF = "LF"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MultiFeatureDataset:
    """S feature matrices over the same N samples, plus optional labels.

    ``label_names`` records the original label token for each class index
    when labels were remapped at ingestion (entry ``k-1`` names class ``k``).
    """

    features: tuple
    labels: tuple
    n_classes: Optional[int]
    feature_names: tuple
    label_names: tuple = ()

    def __init__(
        self,
        features: Sequence[np.ndarray],
        labels: Optional[Sequence[Optional[int]]] = None,
        n_classes: Optional[int] = None,
        feature_names: Optional[Sequence[str]] = None,
        label_names: Sequence[str] = (),
    ):
        feats = tuple(_readonly(np.atleast_2d(np.asarray(f))) for f in features)
        n = feats[0].shape[0] if feats else 0
        if labels is None:
            labels = [None] * n
        labs = tuple(None if v is None else int(v) for v in labels)
        if n_classes is None:
            present = [v for v in labs if v is not None]
            n_classes = max(present) if present else None
        if feature_names is None:
            feature_names = [f"f{s + 1}" for s in range(len(feats))]
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)
        object.__setattr__(self, "n_classes", n_classes)
        object.__setattr__(self, "feature_names", tuple(feature_names))
        object.__setattr__(self, "label_names", tuple(label_names))

    @property
    def n_samples(self) -> int:
        return self.features[0].shape[0] if self.features else 0

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def dims(self) -> list[int]:
        return [f.shape[1] for f in self.features]

    @property
    def labeled_ids(self) -> np.ndarray:
        return np.array([i for i, v in enumerate(self.labels) if v is not None], dtype=np.int64)

    @property
    def unlabeled_ids(self) -> np.ndarray:
        return np.array([i for i, v in enumerate(self.labels) if v is None], dtype=np.int64)

    def label_array(self, ids: Optional[Sequence[int]] = None) -> np.ndarray:
        """Labels of ``ids`` as an int array; raises if any of them is unlabeled."""
        ids = range(self.n_samples) if ids is None else ids
        out = []
        for i in ids:
            v = self.labels[int(i)]
            if v is None:
                raise ValueError(f"sample {int(i)} has no label")
            out.append(v)
        return np.asarray(out, dtype=np.int64)

    def subset(self, ids: Sequence[int]) -> "MultiFeatureDataset":
        ids = np.asarray(ids, dtype=np.int64)
        return MultiFeatureDataset(
            [f[ids] for f in self.features],
            [self.labels[int(i)] for i in ids],
            n_classes=self.n_classes,
            feature_names=self.feature_names,
            label_names=self.label_names,
        )

    def without_labels(self) -> "MultiFeatureDataset":
        return MultiFeatureDataset(
            self.features, None, n_classes=self.n_classes, feature_names=self.feature_names
        )


def validate_dataset(d: MultiFeatureDataset) -> list[str]:
    """Return the list of invariant violations; empty iff the dataset is well formed."""
    problems: list[str] = []
    if not d.features:
        return ["dataset has no feature matrices"]
    n = d.features[0].shape[0]
    for name, f in zip(d.feature_names, d.features):
        if f.ndim != 2:
            problems.append(f"feature {name!r} is not a matrix (ndim={f.ndim})")
            continue
        if f.shape[0] != n:
            problems.append(
                f"feature {name!r} has {f.shape[0]} rows, expected {n} "
                f"(from feature {d.feature_names[0]!r})"
            )
        if f.shape[1] < 1:
            problems.append(f"feature {name!r} has zero columns")
        if not np.all(np.isfinite(f)):
            problems.append(f"feature {name!r} contains non-finite values")
    if len(set(d.feature_names)) != len(d.feature_names):
        problems.append("feature names are not unique")
    if len(d.feature_names) != len(d.features):
        problems.append("feature_names length differs from number of features")
    if len(d.labels) != n:
        problems.append(f"labels has length {len(d.labels)}, expected {n}")
    k = d.n_classes
    bad = [(i, v) for i, v in enumerate(d.labels) if v is not None and (k is None or not 1 <= v <= k)]
    for i, v in bad:
        problems.append(f"label {v} of sample {i} outside 1..{k}")
    return problems


def class_coverage(d: MultiFeatureDataset) -> dict[int, int]:
    """Number of labeled samples per class 1..K."""
    counts = {k: 0 for k in range(1, (d.n_classes or 0) + 1)}
    for v in d.labels:
        if v is not None:
            counts[v] = counts.get(v, 0) + 1
    return counts


@dataclass(frozen=True, eq=False)
class ViewPair:
    """EF and LF representations of the labeled and unlabeled pools.

    Row ``i`` of each labeled matrix is global sample ``labeled_ids[i]``;
    likewise for the unlabeled matrices.
    """

    ef_labeled: np.ndarray
    ef_unlabeled: np.ndarray
    lf_labeled: np.ndarray
    lf_unlabeled: np.ndarray
    labeled_ids: np.ndarray
    unlabeled_ids: np.ndarray

    def __post_init__(self):
        for name in ("ef_labeled", "ef_unlabeled", "lf_labeled", "lf_unlabeled"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        for name in ("labeled_ids", "unlabeled_ids"):
            a = np.asarray(getattr(self, name), dtype=np.int64).copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.ef_labeled.shape[0] != len(self.labeled_ids) or self.lf_labeled.shape[0] != len(self.labeled_ids):
            raise ValueError("labeled view rows do not match labeled_ids")
        if self.ef_unlabeled.shape[0] != len(self.unlabeled_ids) or self.lf_unlabeled.shape[0] != len(self.unlabeled_ids):
            raise ValueError("unlabeled view rows do not match unlabeled_ids")

    def labeled(self, view: View) -> np.ndarray:
        return self.ef_labeled if View(view) is View.EF else self.lf_labeled

    def unlabeled(self, view: View) -> np.ndarray:
        return self.ef_unlabeled if View(view) is View.EF else self.lf_unlabeled

    def unlabeled_row(self) -> dict[int, int]:
        return {int(g): i for i, g in enumerate(self.unlabeled_ids)}


def check_confidence_vector(scores: np.ndarray, atol: float = 1e-9) -> bool:
    s = np.asarray(scores, dtype=np.float64)
    return bool(s.ndim == 1 and np.all(s >= 0) and np.all(s <= 1 + atol) and abs(s.sum() - 1.0) <= atol)


@dataclass(frozen=True)
class PseudoLabel:
    sample_id: int
    label: int
    confidence: float
    source_view: View
    round: int
    relaxed: bool = False

    def __post_init__(self):
        if self.round < 1:
            raise ValueError("pseudo-labels are assigned from round 1 on")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        object.__setattr__(self, "source_view", View(self.source_view))
