"""Scenario splits (inductive / transductive / self-taught) and MAP scoring."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .core_types import MultiFeatureDataset


class Scenario(str, Enum):
    INDUCTIVE = "inductive"
    TRANSDUCTIVE = "transductive"
    SELF_TAUGHT = "self-taught"


INDUCTIVE_TRAIN_FRACTION = 0.25


@dataclass(frozen=True, eq=False)
class ScenarioSplit:
    """Sample ids for one split. For self-taught runs ``train_unlabeled`` are
    row ids into the external dataset (``unlabeled_source == "external"``)."""

    kind: Scenario
    labeled: np.ndarray
    train_unlabeled: np.ndarray
    test: np.ndarray
    unlabeled_source: str = "dataset"


def inductive_train_size(pool_size: int) -> int:
    """Round-half-up of a quarter of the pool."""
    return int(np.floor(INDUCTIVE_TRAIN_FRACTION * pool_size + 0.5))


def split_scenario(
    d: MultiFeatureDataset,
    kind,
    labels_per_class: int,
    rng: np.random.Generator,
    external: Optional[MultiFeatureDataset] = None,
) -> ScenarioSplit:
    """Draw ``labels_per_class`` labeled samples per class; partition the rest per ``kind``."""
    kind = Scenario(kind)
    if d.n_classes is None:
        raise ValueError("dataset has no labels")
    if labels_per_class < 1:
        raise ValueError("labels_per_class must be >= 1")
    labels = np.array([0 if v is None else v for v in d.labels], dtype=np.int64)
    # need one left over per class for the test pool, two in inductive mode
    spare = 2 if kind is Scenario.INDUCTIVE else 1
    labeled = []
    for k in range(1, d.n_classes + 1):
        members = np.flatnonzero(labels == k)
        if len(members) < labels_per_class + spare:
            raise ValueError(
                f"class {k} has {len(members)} samples; {labels_per_class} labeled plus "
                f"{spare} unlabeled are needed for the {kind.value} scenario"
            )
        labeled.append(rng.choice(members, size=labels_per_class, replace=False))
    labeled = np.sort(np.concatenate(labeled)).astype(np.int64)
    pool = np.setdiff1d(np.flatnonzero(labels > 0), labeled).astype(np.int64)

    if kind is Scenario.TRANSDUCTIVE:
        return ScenarioSplit(kind, labeled, pool.copy(), pool.copy())
    if kind is Scenario.INDUCTIVE:
        perm = rng.permutation(pool)
        n_train = inductive_train_size(len(pool))
        return ScenarioSplit(kind, labeled, np.sort(perm[:n_train]), np.sort(perm[n_train:]))
    if external is None or external.n_samples == 0:
        raise ValueError("self-taught scenario needs a non-empty external dataset")
    if external.dims != d.dims:
        raise ValueError(f"external feature dims {external.dims} differ from dataset dims {d.dims}")
    return ScenarioSplit(kind, labeled, np.arange(external.n_samples, dtype=np.int64), pool.copy(), "external")


def ranking(scores, sample_ids=None) -> np.ndarray:
    """Order by descending score, ties by ascending sample id."""
    scores = np.asarray(scores, dtype=np.float64)
    ids = np.arange(len(scores)) if sample_ids is None else np.asarray(sample_ids)
    return np.lexsort((ids, -scores))


def average_precision(scores, positives, sample_ids=None) -> float:
    """Non-interpolated AP: mean precision at the rank of each positive."""
    pos = np.asarray(positives, dtype=bool)
    if len(pos) != len(np.asarray(scores)):
        raise ValueError("scores and positives differ in length")
    if not pos.any():
        raise ValueError("average precision needs at least one positive")
    hits = pos[ranking(scores, sample_ids)]
    ranks = np.flatnonzero(hits) + 1
    return float(np.mean(np.arange(1, len(ranks) + 1) / ranks))


def mean_average_precision(score_matrix, true_labels, sample_ids=None, skip_absent: bool = False) -> float:
    """Mean over classes of the per-class AP of column ``k`` against ``labels == k``.

    Labels are 1-based. With ``skip_absent`` classes that have no positive are
    left out of the mean instead of raising.
    """
    S = np.asarray(score_matrix, dtype=np.float64)
    y = np.asarray(true_labels, dtype=np.int64)
    if S.ndim != 2 or S.shape[0] != len(y):
        raise ValueError("score_matrix must be (M, K) with one label per row")
    aps = []
    for k in range(1, S.shape[1] + 1):
        pos = y == k
        if not pos.any():
            if skip_absent:
                continue
            raise ValueError(f"class {k} has no positive sample")
        aps.append(average_precision(S[:, k - 1], pos, sample_ids))
    if not aps:
        raise ValueError("no class has a positive sample")
    return float(np.mean(aps))
