"""Early- and late-fusion views built from Ensemble Projection."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import ensemble_projection as ep_mod
from .core_types import MultiFeatureDataset, ViewPair, validate_dataset
from .ensemble_projection import EpConfig, ProjectionEnsemble


def early_fuse(d: MultiFeatureDataset, ids: Optional[Sequence[int]] = None) -> np.ndarray:
    """Concatenate the feature matrices column-wise in ``feature_names`` order."""
    feats = d.features if ids is None else [f[np.asarray(ids, dtype=np.int64)] for f in d.features]
    return np.hstack(feats)


def allocate_prototype_budget(T: int, S: int) -> list[int]:
    """Split ``T`` prototype sets over ``S`` features: floor share, remainder to the first ones."""
    if S < 1:
        raise ValueError("need at least one feature")
    if T < S:
        raise ValueError(f"cannot give each of {S} features a prototype set out of T={T}")
    base, extra = divmod(T, S)
    return [base + (1 if s < extra else 0) for s in range(S)]


@dataclass(frozen=True, eq=False)
class UrlModel:
    """Fitted EF ensemble and per-feature LF ensembles."""

    ef: ProjectionEnsemble
    lf: tuple

    @property
    def dim(self) -> int:
        return self.ef.output_dim

    def transform_ef(self, d: MultiFeatureDataset, ids=None) -> np.ndarray:
        return self.ef.project(early_fuse(d, ids))

    def transform_lf(self, d: MultiFeatureDataset, ids=None) -> np.ndarray:
        sel = slice(None) if ids is None else np.asarray(ids, dtype=np.int64)
        return np.hstack([ens.project(f[sel]) for ens, f in zip(self.lf, d.features)])

    def views(self, d: MultiFeatureDataset, labeled_ids, unlabeled_ids) -> ViewPair:
        return ViewPair(
            ef_labeled=self.transform_ef(d, labeled_ids),
            ef_unlabeled=self.transform_ef(d, unlabeled_ids),
            lf_labeled=self.transform_lf(d, labeled_ids),
            lf_unlabeled=self.transform_lf(d, unlabeled_ids),
            labeled_ids=labeled_ids,
            unlabeled_ids=unlabeled_ids,
        )


def _default_pools(d, labeled_ids, unlabeled_ids):
    if labeled_ids is None:
        labeled_ids = d.labeled_ids
    if unlabeled_ids is None:
        unlabeled_ids = d.unlabeled_ids
    return np.asarray(labeled_ids, dtype=np.int64), np.asarray(unlabeled_ids, dtype=np.int64)


def fit_url(d: MultiFeatureDataset, ep: EpConfig, fit_ids: Sequence[int], n_jobs: int = 1) -> UrlModel:
    """Fit EF and LF ensembles on rows ``fit_ids``; labels are not read."""
    problems = validate_dataset(d)
    if problems:
        raise ValueError("invalid dataset: " + "; ".join(problems))
    fit_ids = np.asarray(fit_ids, dtype=np.int64)
    ef = ep_mod.fit(early_fuse(d, fit_ids), ep, namespace="EF", sample_ids=fit_ids, n_jobs=n_jobs)
    budget = allocate_prototype_budget(ep.T, d.n_features)
    lf = tuple(
        ep_mod.fit(f[fit_ids], ep, namespace=f"LF/{s}", T=t_s, sample_ids=fit_ids, n_jobs=n_jobs)
        for s, (f, t_s) in enumerate(zip(d.features, budget))
    )
    return UrlModel(ef, lf)


def compute_url(
    d: MultiFeatureDataset,
    ep: EpConfig,
    labeled_ids: Optional[Sequence[int]] = None,
    unlabeled_ids: Optional[Sequence[int]] = None,
    n_jobs: int = 1,
    return_model: bool = False,
):
    """Learn both representations on labeled + unlabeled rows and emit the views.

    Pools default to the dataset's labeled and unlabeled rows.
    """
    labeled_ids, unlabeled_ids = _default_pools(d, labeled_ids, unlabeled_ids)
    if len(labeled_ids) < 1 or len(unlabeled_ids) < 1:
        raise ValueError("compute_url needs at least one labeled and one unlabeled sample")
    if np.intersect1d(labeled_ids, unlabeled_ids).size:
        raise ValueError("labeled and unlabeled pools overlap")
    model = fit_url(d, ep, np.concatenate([labeled_ids, unlabeled_ids]), n_jobs=n_jobs)
    views = model.views(d, labeled_ids, unlabeled_ids)
    return (views, model) if return_model else views
