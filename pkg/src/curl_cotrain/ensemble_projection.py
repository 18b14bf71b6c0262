"""Ensemble Projection: unsupervised representation from T prototype sets.

Each prototype set holds ``r`` pseudo-classes of ``n`` samples. Of ``m``
randomly drawn seed hypotheses, the one whose seeds are most spread out (sum of
pairwise Euclidean distances) is kept; each seed then grows into a prototype
with its ``n - 1`` nearest free neighbours. One logistic regression per set
discriminates its ``r`` pseudo-classes, and a sample is represented by the
concatenation of all T softmax outputs.
"""
from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .linear_classifier import LogRegConfig, train


@dataclass(frozen=True)
class EpConfig:
    T: int = 300
    r: int = 30
    n: int = 6
    m: int = 50
    logreg: LogRegConfig = field(default_factory=LogRegConfig)
    seed: int = 0
    standardize: bool = True

    def __post_init__(self):
        if self.T < 1 or self.r < 2 or self.n < 1 or self.m < 1:
            raise ValueError("EP needs T >= 1, r >= 2, n >= 1, m >= 1")

    def check_size(self, n_samples: int):
        if self.r * self.n > n_samples:
            raise ValueError(
                f"prototype sets need r*n = {self.r * self.n} samples but only {n_samples} are available"
            )


@dataclass(frozen=True, eq=False)
class PrototypeSet:
    member_indices: np.ndarray
    member_pseudo_labels: np.ndarray
    diversity_score: float
    hypothesis_scores: tuple = ()

    @property
    def r(self) -> int:
        return int(self.member_pseudo_labels.max())

    @property
    def seeds(self) -> np.ndarray:
        """First member of each prototype."""
        return self.member_indices.reshape(self.r, -1)[:, 0]


@dataclass(frozen=True, eq=False)
class Standardizer:
    center: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        X = np.asarray(X, dtype=np.float64)
        sd = X.std(axis=0)
        sd[sd == 0] = 1.0
        return cls(X.mean(axis=0), sd)

    @classmethod
    def identity(cls, dim: int) -> "Standardizer":
        return cls(np.zeros(dim), np.ones(dim))

    def transform(self, X):
        return (np.asarray(X, dtype=np.float64) - self.center) / self.scale


@dataclass(frozen=True, eq=False)
class ProjectionEnsemble:
    members: tuple
    input_dim: int
    r: int
    standardizer: Optional[Standardizer] = None
    prototype_sets: tuple = field(default=(), repr=False)

    @property
    def T(self) -> int:
        return len(self.members)

    @property
    def output_dim(self) -> int:
        return self.T * self.r

    def project(self, x):
        """Map one sample (D_in,) or a batch (N, D_in) to T concatenated softmax blocks."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.input_dim:
            raise ValueError(f"expected inputs of length {self.input_dim}, got {x.shape[-1]}")
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite input")
        if self.standardizer is not None:
            x = self.standardizer.transform(x)
        return np.concatenate([m.predict_proba(x) for m in self.members], axis=-1)


def rng_stream(seed: int, namespace: str, t: int) -> np.random.Generator:
    """Generator for member ``t`` of the ensemble in ``namespace``.

    Streams depend only on (seed, namespace, t), so members can be fitted in
    any order or in parallel.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(namespace.encode()), int(t)))
    return np.random.default_rng(ss)


def _draw_seeds(n_rows: int, r: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(n_rows, size=r, replace=False).astype(np.int64)


def _build_set(data, seeds, n, scores=()) -> PrototypeSet:
    members = kernels.expand_prototypes(data, seeds, n)
    r = len(seeds)
    labels = np.repeat(np.arange(1, r + 1, dtype=np.int64), n)
    score = kernels.seed_diversity(data, seeds)
    return PrototypeSet(members.ravel(), labels, score, tuple(scores) or (score,))


def sample_hypothesis(data, r: int, n: int, rng: np.random.Generator) -> PrototypeSet:
    """Draw ``r`` seeds uniformly without replacement and grow them into prototypes."""
    data = np.ascontiguousarray(data, dtype=np.float64)
    if data.shape[0] < r * n:
        raise ValueError(f"need at least r*n = {r * n} rows, got {data.shape[0]}")
    return _build_set(data, _draw_seeds(data.shape[0], r, rng), n)


def select_prototype_set(data, r: int, n: int, m: int, rng: np.random.Generator) -> PrototypeSet:
    """Keep the most diverse of ``m`` sampled hypotheses (first one wins ties).

    Only the winner is expanded into prototypes: the score depends on the
    seeds alone and expansion consumes no randomness, so the result equals
    expanding every hypothesis and keeping the best.
    """
    data = np.ascontiguousarray(data, dtype=np.float64)
    if data.shape[0] < r * n:
        raise ValueError(f"need at least r*n = {r * n} rows, got {data.shape[0]}")
    best_seeds, best, scores = None, -np.inf, []
    for _ in range(m):
        seeds = _draw_seeds(data.shape[0], r, rng)
        score = kernels.seed_diversity(data, seeds)
        scores.append(score)
        if score > best:
            best, best_seeds = score, seeds
    return _build_set(data, best_seeds, n, scores)


def _fit_member(data, config: EpConfig, namespace: str, t: int):
    rng = rng_stream(config.seed, namespace, t)
    pset = select_prototype_set(data, config.r, config.n, config.m, rng)
    clf = train(
        data[pset.member_indices],
        pset.member_pseudo_labels,
        config.logreg,
        seed=config.seed,
        n_classes=config.r,
    )
    return pset, clf


def fit(
    data,
    config: EpConfig,
    namespace: str = "EP",
    T: Optional[int] = None,
    sample_ids: Optional[Sequence[int]] = None,
    n_jobs: int = 1,
) -> ProjectionEnsemble:
    """Fit an ensemble on all rows of ``data`` (labels are never used).

    ``T`` overrides ``config.T`` (late fusion splits the budget). When
    ``sample_ids`` is given, rows are put in sample-id order first so the
    result does not depend on how the rows were stored; prototype member
    indices then refer to sample ids.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("data must be a 2-D matrix")
    if not np.all(np.isfinite(data)):
        raise ValueError("non-finite input")
    config.check_size(data.shape[0])
    T = config.T if T is None else int(T)
    if T < 1:
        raise ValueError("T must be >= 1")
    ids = None
    if sample_ids is not None:
        ids = np.asarray(sample_ids, dtype=np.int64)
        order = np.argsort(ids, kind="stable")
        data, ids = data[order], ids[order]
    std = Standardizer.fit(data) if config.standardize else None
    work = np.ascontiguousarray(std.transform(data) if std is not None else data)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(lambda t: _fit_member(work, config, namespace, t), range(T)))
    else:
        results = [_fit_member(work, config, namespace, t) for t in range(T)]

    psets = []
    for pset, _ in results:
        if ids is not None:
            pset = PrototypeSet(
                ids[pset.member_indices], pset.member_pseudo_labels, pset.diversity_score, pset.hypothesis_scores
            )
        psets.append(pset)
    return ProjectionEnsemble(
        members=tuple(clf for _, clf in results),
        input_dim=data.shape[1],
        r=config.r,
        standardizer=std,
        prototype_sets=tuple(psets),
    )


def project(ens: ProjectionEnsemble, x) -> np.ndarray:
    return ens.project(x)
