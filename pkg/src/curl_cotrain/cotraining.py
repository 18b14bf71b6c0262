"""Co-training of the EF and LF classifiers with cross-view pseudo-labelling.

Each round scores every unlabeled sample in both views once, then for every
class ``k`` and each (receiving, donor) view pair selects candidates the donor
labels ``k`` with confidence above ``t1`` and more confidently than the
receiver. If there are none the rule is relaxed to donor confidence above
``t2``. The NMS variant keeps only the most confident candidate; the add-all
variant keeps every candidate of the strict rule and never relaxes. Both
classifiers are then retrained from scratch on their grown sets.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .core_types import MultiFeatureDataset, PseudoLabel, View, ViewPair, class_coverage
from .ensemble_projection import EpConfig
from .fusion import compute_url
from .linear_classifier import LogRegConfig, ProbClassifier, train

VIEW_PAIRS = ((View.EF, View.LF), (View.LF, View.EF))


class Variant(str, Enum):
    NMS = "nms"
    ADD_ALL = "add_all"


@dataclass(frozen=True)
class CotrainConfig:
    rounds: int = 5
    t1: float = 0.7
    t2: float = 0.4
    variant: Variant = Variant.NMS
    seed: int = 0
    logreg: LogRegConfig = field(default_factory=LogRegConfig)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if not 0.0 < self.t1 <= 1.0:
            raise ValueError("t1 must lie in (0, 1]")
        if not 0.0 < self.t2 < 1.0:
            raise ValueError("t2 must lie in (0, 1)")
        if not self.t2 < self.t1:
            raise ValueError("t2 must be smaller than t1")


@dataclass(frozen=True)
class Addition:
    view: View  # receiving view
    pseudo: PseudoLabel

    def as_dict(self) -> dict:
        return {
            "view": self.view.value,
            "class": self.pseudo.label,
            "sample_id": self.pseudo.sample_id,
            "confidence": self.pseudo.confidence,
            "relaxed": self.pseudo.relaxed,
        }


@dataclass(frozen=True, eq=False)
class RoundRecord:
    """One closed round. ``ef_scores``/``lf_scores`` are the round-start
    confidences over the unlabeled pool (rows follow ``ViewPair.unlabeled_ids``);
    round 0 carries none."""

    round: int
    additions: tuple = ()
    ef_scores: Optional[np.ndarray] = field(default=None, repr=False)
    lf_scores: Optional[np.ndarray] = field(default=None, repr=False)
    metrics: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class CotrainState:
    n_classes: int
    original_ids: tuple
    original_labels: tuple
    ledger_ef: tuple = ()
    ledger_lf: tuple = ()
    clf_ef: Optional[ProbClassifier] = None
    clf_lf: Optional[ProbClassifier] = None
    round: int = 0
    history: tuple = ()

    def ledger(self, view: View) -> tuple:
        return self.ledger_ef if View(view) is View.EF else self.ledger_lf

    def classifier(self, view: View) -> ProbClassifier:
        return self.clf_ef if View(view) is View.EF else self.clf_lf

    def labeled_ids(self, view: View) -> tuple:
        return self.original_ids + tuple(p.sample_id for p in self.ledger(view))

    def labels(self, view: View) -> tuple:
        return self.original_labels + tuple(p.label for p in self.ledger(view))


def pseudo_label(w) -> tuple[int, float]:
    """1-based argmax class and its score; ties go to the smallest class."""
    w = np.asarray(w, dtype=np.float64)
    j = int(np.argmax(w))
    return j + 1, float(w[j])


def select_candidates(
    k: int,
    scores_v1,
    scores_v2,
    pseudo_labels_v2,
    in_labeled_v1,
    t1: float,
    t2: float,
    sample_ids: Optional[Sequence[int]] = None,
    relax: bool = True,
) -> tuple[np.ndarray, bool]:
    """Candidates of class ``k`` for the receiving view ``v1``.

    ``scores_v1``/``scores_v2`` are (U, K) confidences over the unlabeled pool,
    ``pseudo_labels_v2`` the donor's 1-based argmax labels and
    ``in_labeled_v1`` a boolean mask of rows already in ``v1``'s training set.
    Returns the sorted sample ids and whether the relaxed rule fired.
    """
    s1 = np.asarray(scores_v1, dtype=np.float64)
    s2 = np.asarray(scores_v2, dtype=np.float64)
    yhat = np.asarray(pseudo_labels_v2)
    free = ~np.asarray(in_labeled_v1, dtype=bool)
    ids = np.arange(len(s2)) if sample_ids is None else np.asarray(sample_ids, dtype=np.int64)
    base = free & (yhat == k)
    w1, w2 = s1[:, k - 1], s2[:, k - 1]
    strict = base & (w1 < w2) & (w2 > t1)
    if strict.any() or not relax:
        return np.sort(ids[strict]), False
    return np.sort(ids[base & (w2 > t2)]), True


def non_max_suppression(candidate_ids, scores_k) -> Optional[tuple[int, float]]:
    """Most confident candidate as ``(sample_id, score)``; smallest id wins ties."""
    ids = np.asarray(candidate_ids, dtype=np.int64)
    sc = np.asarray(scores_k, dtype=np.float64)
    if ids.size == 0:
        return None
    best = np.lexsort((ids, -sc))[0]
    return int(ids[best]), float(sc[best])


def _training_set(state: CotrainState, views: ViewPair, view: View):
    row = views.unlabeled_row()
    ledger = state.ledger(view)
    X = views.labeled(view)
    if ledger:
        X = np.vstack([X, views.unlabeled(view)[[row[p.sample_id] for p in ledger]]])
    return X, np.asarray(state.labels(view), dtype=np.int64)


def _retrain(state: CotrainState, views: ViewPair, config: CotrainConfig) -> CotrainState:
    clfs = {}
    for v in (View.EF, View.LF):
        X, y = _training_set(state, views, v)
        clfs[v] = train(X, y, config.logreg, seed=config.seed, n_classes=state.n_classes)
    return replace(state, clf_ef=clfs[View.EF], clf_lf=clfs[View.LF])


def init_state(views: ViewPair, labels: Sequence[int], n_classes: int, config: CotrainConfig) -> CotrainState:
    """Train the initial classifiers on the labeled pool only."""
    labels = tuple(int(v) for v in labels)
    if len(labels) != len(views.labeled_ids):
        raise ValueError("one label per labeled sample is required")
    missing = sorted(set(range(1, n_classes + 1)) - set(labels))
    if missing:
        raise ValueError(f"classes without a labeled sample: {missing}")
    state = CotrainState(
        n_classes=n_classes,
        original_ids=tuple(int(i) for i in views.labeled_ids),
        original_labels=labels,
    )
    return _retrain(state, views, config)


def cotrain_round(state: CotrainState, views: ViewPair, config: CotrainConfig) -> CotrainState:
    """Run one round and return the new state (inputs are left untouched)."""
    c = state.round + 1
    uid = views.unlabeled_ids
    scores = {
        View.EF: state.clf_ef.predict_proba(views.ef_unlabeled),
        View.LF: state.clf_lf.predict_proba(views.lf_unlabeled),
    }
    yhat = {v: np.argmax(s, axis=1) + 1 for v, s in scores.items()}
    in_labeled = {v: np.isin(uid, np.asarray(state.labeled_ids(v), dtype=np.int64)) for v in scores}
    ledgers = {View.EF: list(state.ledger_ef), View.LF: list(state.ledger_lf)}
    additions = []
    relax = config.variant is Variant.NMS
    pos = {int(g): i for i, g in enumerate(uid)}

    for k in range(1, state.n_classes + 1):
        for v1, v2 in VIEW_PAIRS:
            cand, relaxed = select_candidates(
                k, scores[v1], scores[v2], yhat[v2], in_labeled[v1], config.t1, config.t2, uid, relax=relax
            )
            if cand.size == 0:
                continue
            w2 = scores[v2][[pos[int(i)] for i in cand], k - 1]
            if config.variant is Variant.NMS:
                chosen = [non_max_suppression(cand, w2)]
            else:
                chosen = list(zip(cand.tolist(), w2.tolist()))
            for sid, conf in chosen:
                p = PseudoLabel(sid, k, float(conf), v2, c, relaxed)
                ledgers[v1].append(p)
                in_labeled[v1][pos[sid]] = True
                additions.append(Addition(v1, p))

    rec = RoundRecord(c, tuple(additions), scores[View.EF], scores[View.LF])
    new = replace(
        state,
        ledger_ef=tuple(ledgers[View.EF]),
        ledger_lf=tuple(ledgers[View.LF]),
        round=c,
        history=state.history + (rec,),
    )
    return _retrain(new, views, config)


Evaluator = Callable[[int, ProbClassifier, ProbClassifier], dict]


def run_cotraining(
    views: ViewPair,
    labels: Sequence[int],
    n_classes: int,
    config: CotrainConfig,
    evaluate: Optional[Evaluator] = None,
) -> CotrainState:
    """Initial training plus ``config.rounds`` rounds on precomputed views.

    ``evaluate(round, clf_ef, clf_lf)`` is called after round 0 and after each
    round; its result is stored in that round's record.
    """
    state = init_state(views, labels, n_classes, config)
    metrics = evaluate(0, state.clf_ef, state.clf_lf) if evaluate else {}
    state = replace(state, history=(RoundRecord(0, metrics=metrics),))
    for _ in range(config.rounds):
        state = cotrain_round(state, views, config)
        if evaluate:
            last = replace(state.history[-1], metrics=evaluate(state.round, state.clf_ef, state.clf_lf))
            state = replace(state, history=state.history[:-1] + (last,))
    return state


def run_curl(
    d: MultiFeatureDataset,
    ep: EpConfig,
    ct: CotrainConfig,
    labeled_ids: Optional[Sequence[int]] = None,
    unlabeled_ids: Optional[Sequence[int]] = None,
    evaluate: Optional[Evaluator] = None,
    n_jobs: int = 1,
):
    """Build the views once, then co-train. Returns ``(clf_ef, clf_lf, state)``."""
    views = compute_url(d, ep, labeled_ids, unlabeled_ids, n_jobs=n_jobs)
    if d.n_classes is None:
        raise ValueError("dataset has no labels")
    cov = class_coverage(d.subset(views.labeled_ids))
    empty = [k for k, n in cov.items() if n == 0]
    if empty:
        raise ValueError(f"classes without a labeled sample: {empty}")
    state = run_cotraining(views, d.label_array(views.labeled_ids), d.n_classes, ct, evaluate)
    return state.clf_ef, state.clf_lf, state


def combine_predict(clf_ef: ProbClassifier, clf_lf: ProbClassifier, x_ef, x_lf) -> np.ndarray:
    """Mean of the EF and LF probability vectors (CURL-EF&LF)."""
    p_ef = clf_ef.predict_proba(x_ef)
    p_lf = clf_lf.predict_proba(x_lf)
    if p_ef.shape != p_lf.shape:
        raise ValueError("EF and LF predictions disagree in shape")
    return 0.5 * (p_ef + p_lf)
