"""Batch experiment runner: splits x seeds x labels-per-class, all CURL variants.

A config is one JSON file. Omitted hyperparameters take the published
defaults (T=300, r=30, n=6, m=50, C=15, five rounds)::

    {
      "name": "scene15-like",
      "dataset": {"manifest": "data/scene.manifest.json"},   # or {"synthetic": {...}}
      "external": {"synthetic": {...}},                      # self-taught only
      "scenario": "transductive",
      "labels_per_class": [1, 2, 3, 5, 10, 20],
      "seeds": 10,                                           # count, or explicit list
      "variants": ["EF", "LF", "EF&LF"],
      "modes": ["nms", "add_all"],
      "ep": {"T": 300, "r": 30, "n": 6, "m": 50, "standardize": true},
      "logreg": {"C": 15, "tol": 1e-8, "max_iters": 500},
      "cotrain": {"rounds": 5, "t1": 0.7, "t2": 0.4}
    }
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .core_types import MultiFeatureDataset
from .cotraining import CotrainConfig, Variant, combine_predict, run_cotraining
from .data_io import REPORT_VERSION, DataError, SyntheticSpec, generate_synthetic, load_dataset
from .ensemble_projection import EpConfig
from .evaluation import Scenario, mean_average_precision, split_scenario
from .fusion import compute_url
from .linear_classifier import LogRegConfig, train

log = logging.getLogger(__name__)

VARIANTS = ("EF", "LF", "EF&LF")
BASELINE = "EP+LR"


class ConfigError(ValueError):
    pass


def variant_name(view: str, mode: Variant) -> str:
    return f"CURL-{view}" + ("_n" if Variant(mode) is Variant.ADD_ALL else "")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    dataset: dict = field(default_factory=dict)
    external: Optional[dict] = None
    scenario: Scenario = Scenario.TRANSDUCTIVE
    labels_per_class: tuple = (1, 2, 3, 5, 10, 20)
    seeds: tuple = tuple(range(10))
    variants: tuple = VARIANTS
    modes: tuple = (Variant.NMS, Variant.ADD_ALL)
    ep: EpConfig = field(default_factory=EpConfig)
    cotrain: CotrainConfig = field(default_factory=CotrainConfig)
    base_dir: str = "."

    @classmethod
    def from_dict(cls, raw: dict, base_dir=".") -> "ExperimentConfig":
        known = {"name", "dataset", "external", "scenario", "labels_per_class", "seeds",
                 "variants", "modes", "ep", "logreg", "cotrain"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            lr_raw = dict(raw.get("logreg", {}))
            logreg = LogRegConfig(
                c_inverse_reg=float(lr_raw.pop("C", 15.0)),
                tol=float(lr_raw.pop("tol", 1e-8)),
                max_iters=int(lr_raw.pop("max_iters", 500)),
            )
            if lr_raw:
                raise ConfigError(f"unknown logreg keys: {sorted(lr_raw)}")
            ep = EpConfig(logreg=logreg, **raw.get("ep", {}))
            cotrain = CotrainConfig(logreg=logreg, **raw.get("cotrain", {}))
            seeds = raw.get("seeds", 10)
            seeds = tuple(range(seeds)) if isinstance(seeds, int) else tuple(int(s) for s in seeds)
            variants = tuple(raw.get("variants", VARIANTS))
            bad = set(variants) - set(VARIANTS)
            if bad:
                raise ConfigError(f"unknown variants {sorted(bad)}; choose from {list(VARIANTS)}")
            cfg = cls(
                name=str(raw.get("name", "experiment")),
                dataset=dict(raw.get("dataset", {})),
                external=raw.get("external"),
                scenario=Scenario(raw.get("scenario", "transductive")),
                labels_per_class=tuple(int(v) for v in raw.get("labels_per_class", (1, 2, 3, 5, 10, 20))),
                seeds=seeds,
                variants=variants,
                modes=tuple(Variant(m) for m in raw.get("modes", ("nms", "add_all"))),
                ep=ep,
                cotrain=cotrain,
                base_dir=str(base_dir),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        if not cfg.seeds or not cfg.labels_per_class or not cfg.variants or not cfg.modes:
            raise ConfigError("seeds, labels_per_class, variants and modes must be non-empty")
        _check_source(cfg.dataset, "dataset")
        if cfg.scenario is Scenario.SELF_TAUGHT:
            if cfg.external is None:
                raise ConfigError("self-taught scenario needs an 'external' dataset")
            _check_source(cfg.external, "external")
        return cfg

    def to_dict(self) -> dict:
        """Normalised config echoed into the report (defaults filled in)."""
        return {
            "name": self.name,
            "dataset": self.dataset,
            "external": self.external,
            "scenario": self.scenario.value,
            "labels_per_class": list(self.labels_per_class),
            "seeds": list(self.seeds),
            "variants": list(self.variants),
            "modes": [m.value for m in self.modes],
            "ep": {"T": self.ep.T, "r": self.ep.r, "n": self.ep.n, "m": self.ep.m, "standardize": self.ep.standardize},
            "logreg": {
                "C": self.ep.logreg.c_inverse_reg,
                "tol": self.ep.logreg.tol,
                "max_iters": self.ep.logreg.max_iters,
            },
            "cotrain": {"rounds": self.cotrain.rounds, "t1": self.cotrain.t1, "t2": self.cotrain.t2},
        }


def _check_source(src, what):
    if not isinstance(src, dict) or len(set(src) & {"manifest", "synthetic"}) != 1:
        raise ConfigError(f"'{what}' needs exactly one of 'manifest' or 'synthetic'")
    if "synthetic" in src:
        try:
            SyntheticSpec.from_dict(src["synthetic"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{what}.synthetic: {exc}") from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return ExperimentConfig.from_dict(raw, base_dir=path.parent)


def load_source(src: dict, base_dir=".", labeled: bool = True) -> MultiFeatureDataset:
    if "manifest" in src:
        d = load_dataset(Path(base_dir) / src["manifest"])
    else:
        d = generate_synthetic(SyntheticSpec.from_dict(src["synthetic"]))
    return d if labeled else d.without_labels()


def _cell_seed(seed: int, lpc: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=(int(lpc),))


def run_cell(cfg: ExperimentConfig, d: MultiFeatureDataset, external, lpc: int, seed: int) -> dict:
    """One (labels_per_class, seed) cell: split, views, co-training per mode.

    Returns ``{"maps": {variant: [MAP per round]}, "additions": {variant:
    [[addition dicts] per round]}}``; baseline MAPs are stored under ``EP+LR``.
    """
    rng = np.random.default_rng(_cell_seed(seed, lpc))
    split = split_scenario(d, cfg.scenario, lpc, rng, external=external)
    if cfg.scenario is Scenario.SELF_TAUGHT:
        # external rows follow the original ones in a merged training dataset
        train_data = MultiFeatureDataset(
            [np.vstack([a, b]) for a, b in zip(d.features, external.features)],
            list(d.labels) + [None] * external.n_samples,
            n_classes=d.n_classes,
            feature_names=d.feature_names,
        )
        unlabeled = d.n_samples + split.train_unlabeled
    else:
        train_data, unlabeled = d, split.train_unlabeled
    ep = replace(cfg.ep, seed=int(seed))
    views, model = compute_url(train_data, ep, split.labeled, unlabeled, return_model=True)
    x_ef = model.transform_ef(d, split.test)
    x_lf = model.transform_lf(d, split.test)
    y_test = d.label_array(split.test)

    def evaluate(_round, clf_ef, clf_lf):
        p_ef = clf_ef.predict_proba(x_ef)
        p_lf = clf_lf.predict_proba(x_lf)
        scores = {"EF": p_ef, "LF": p_lf, "EF&LF": combine_predict(clf_ef, clf_lf, x_ef, x_lf)}
        return {v: mean_average_precision(scores[v], y_test, split.test, skip_absent=True) for v in cfg.variants}

    y_labeled = d.label_array(split.labeled)
    baseline = train(views.ef_labeled, y_labeled, cfg.cotrain.logreg, seed=int(seed), n_classes=d.n_classes)
    maps = {BASELINE: [mean_average_precision(baseline.predict_proba(x_ef), y_test, split.test, skip_absent=True)]}
    adds = {}
    for mode in cfg.modes:
        ct = replace(cfg.cotrain, variant=mode, seed=int(seed))
        state = run_cotraining(views, y_labeled, d.n_classes, ct, evaluate)
        for v in cfg.variants:
            name = variant_name(v, mode)
            maps[name] = [rec.metrics[v] for rec in state.history]
            adds[name] = [
                [
                    {**a.as_dict(), "seed": int(seed), "sample_id": _external_id(a.pseudo.sample_id, d, cfg)}
                    for a in rec.additions
                    if v == "EF&LF" or a.view.value == v
                ]
                for rec in state.history
            ]
    return {"maps": maps, "additions": adds}


def _external_id(sid: int, d: MultiFeatureDataset, cfg: ExperimentConfig) -> int:
    # self-taught pseudo-labels point into the external pool; report them by external row
    if cfg.scenario is Scenario.SELF_TAUGHT:
        return int(sid - d.n_samples)
    return int(sid)


def _cell_job(args):
    cfg, d, external, lpc, seed = args
    return (lpc, seed), run_cell(cfg, d, external, lpc, seed)


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> dict:
    """Run every cell and aggregate into the report dict (means over seeds)."""
    d = load_source(cfg.dataset, cfg.base_dir)
    if d.n_classes is None or any(v is None for v in d.labels):
        raise DataError("the evaluation dataset must be fully labeled")
    external = None
    if cfg.scenario is Scenario.SELF_TAUGHT:
        external = load_source(cfg.external, cfg.base_dir, labeled=False)
    jobs = [(cfg, d, external, lpc, s) for lpc in cfg.labels_per_class for s in cfg.seeds]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = dict(pool.map(_cell_job, jobs))
    else:
        results = {}
        for job in jobs:
            key, res = _cell_job(job)
            log.info("cell labels_per_class=%d seed=%d done", *key)
            results[key] = res
    return aggregate(cfg, results)


def aggregate(cfg: ExperimentConfig, results: dict) -> dict:
    names = [variant_name(v, m) for m in cfg.modes for v in cfg.variants]
    rounds, baseline = [], []
    for lpc in cfg.labels_per_class:
        cells = [results[(lpc, s)] for s in cfg.seeds]
        base = [c["maps"][BASELINE][0] for c in cells]
        baseline.append(
            {"labels_per_class": lpc, "variant": BASELINE, "map": float(np.mean(base)), "map_per_seed": base}
        )
        for name in names:
            for r in range(cfg.cotrain.rounds + 1):
                per_seed = [c["maps"][name][r] for c in cells]
                rounds.append(
                    {
                        "labels_per_class": lpc,
                        "variant": name,
                        "round": r,
                        "map": float(np.mean(per_seed)),
                        "map_std": float(np.std(per_seed)),
                        "map_per_seed": per_seed,
                        "additions": [a for c in cells for a in c["additions"][name][r]],
                    }
                )
    return {"format_version": REPORT_VERSION, "config": cfg.to_dict(), "baseline": baseline, "rounds": rounds}


def map_table_rows(report: dict) -> list[dict]:
    """Flat rows for the plot-ready CSV (baseline rows use round 0)."""
    rows = [
        {"labels_per_class": b["labels_per_class"], "variant": b["variant"], "round": 0,
         "map": b["map"], "map_std": float(np.std(b["map_per_seed"]))}
        for b in report["baseline"]
    ]
    rows += [{k: r[k] for k in ("labels_per_class", "variant", "round", "map", "map_std")} for r in report["rounds"]]
    return rows


MAP_TABLE_COLUMNS = ("labels_per_class", "variant", "round", "map", "map_std")
