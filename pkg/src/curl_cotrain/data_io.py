"""Feature files, dataset manifests, synthetic data and run reports.

Feature matrices are stored either as headerless UTF-8 CSV (one sample per
row) or in a binary layout, little-endian throughout::

    offset  size  field
    0       8     magic  b"CURLFEAT"
    8       4     uint32 format version (1)
    12      4     uint32 reserved (0)
    16      8     uint64 N (rows)
    24      8     uint64 d (columns)
    32      8*N*d float64 values, row-major

A manifest is JSON: ``{"name", "format_version", "features": [{"name",
"path", "dim"}], "labels": path | null}``; relative paths resolve against the
manifest's directory. A labels file holds one token per line aligned with the
feature rows; an empty line marks an unlabeled sample.
"""
from __future__ import annotations

import csv
import json
import struct
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core_types import MultiFeatureDataset, validate_dataset

MAGIC = b"CURLFEAT"
BINARY_VERSION = 1
_HEADER = struct.Struct("<8sIIQQ")
MANIFEST_VERSION = 1
REPORT_VERSION = 1


class DataError(ValueError):
    """Base class for ingestion failures; the message names the offending file."""


class FeatureParseError(DataError):
    pass


class DimensionMismatchError(DataError):
    pass


class NonFiniteError(DataError):
    pass


class RowCountMismatchError(DataError):
    pass


def save_feature_matrix(path, X, binary: bool = False) -> None:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("feature matrix must be 2-D")
    path = Path(path)
    if binary:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, BINARY_VERSION, 0, X.shape[0], X.shape[1]))
            fh.write(X.astype("<f8").tobytes())
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            for row in X:
                w.writerow([repr(float(v)) for v in row])


def _read_binary(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FeatureParseError(f"{path}: truncated binary header")
    magic, version, _, n, d = _HEADER.unpack_from(raw)
    if version != BINARY_VERSION:
        raise FeatureParseError(f"{path}: unsupported binary format version {version}")
    body = raw[_HEADER.size:]
    if len(body) != 8 * n * d:
        raise FeatureParseError(f"{path}: expected {n}x{d} values, found {len(body) // 8}")
    return np.frombuffer(body, dtype="<f8").astype(np.float64).reshape(n, d)


def _read_csv(path: Path) -> np.ndarray:
    rows = []
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row or all(not c.strip() for c in row):
                    continue
                try:
                    rows.append([float(c) for c in row])
                except ValueError as exc:
                    raise FeatureParseError(f"{path}:{lineno}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise FeatureParseError(f"{path}: not UTF-8 text ({exc})") from None
    if not rows:
        raise FeatureParseError(f"{path}: no rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise FeatureParseError(f"{path}: ragged rows (widths {sorted(widths)})")
    return np.asarray(rows, dtype=np.float64)


def load_feature_matrix(path, expected_dim: Optional[int] = None) -> np.ndarray:
    """Read a CSV or binary feature file (detected by the magic bytes)."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            head = fh.read(len(MAGIC))
    except OSError as exc:
        raise FeatureParseError(f"{path}: {exc.strerror or exc}") from None
    X = _read_binary(path) if head == MAGIC else _read_csv(path)
    if expected_dim is not None and X.shape[1] != expected_dim:
        raise DimensionMismatchError(f"{path}: width {X.shape[1]}, manifest declares {expected_dim}")
    if not np.all(np.isfinite(X)):
        bad = np.argwhere(~np.isfinite(X))[0]
        raise NonFiniteError(f"{path}: non-finite value at row {bad[0] + 1}, column {bad[1] + 1}")
    return X


@dataclass(frozen=True)
class FeatureEntry:
    name: str
    path: str
    dim: int


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    features: tuple
    labels: Optional[str] = None
    format_version: int = MANIFEST_VERSION

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise DataError(f"manifest {self.name!r}: duplicate feature names")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "format_version": self.format_version,
            "features": [asdict(f) for f in self.features],
            "labels": self.labels,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "DatasetManifest":
        try:
            feats = tuple(FeatureEntry(str(f["name"]), str(f["path"]), int(f["dim"])) for f in raw["features"])
            return cls(str(raw["name"]), feats, raw.get("labels"), int(raw.get("format_version", MANIFEST_VERSION)))
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed manifest: missing or invalid field {exc}") from None


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: cannot read manifest ({exc})") from None
    m = DatasetManifest.from_dict(raw)
    if m.format_version != MANIFEST_VERSION:
        raise DataError(f"{path}: unsupported manifest version {m.format_version}")
    return m


def save_manifest(manifest: DatasetManifest, path) -> None:
    Path(path).write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _sort_tokens(tokens):
    try:
        return sorted(tokens, key=float)
    except ValueError:
        return sorted(tokens)


def read_labels(path) -> tuple[list[Optional[int]], list[str]]:
    """Read label tokens and remap them to 1..K (numeric tokens in numeric order)."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None
    tokens = [ln.strip() for ln in lines]
    names = _sort_tokens({t for t in tokens if t})
    index = {t: i + 1 for i, t in enumerate(names)}
    return [index[t] if t else None for t in tokens], names


def load_dataset(manifest_path) -> MultiFeatureDataset:
    manifest_path = Path(manifest_path)
    m = load_manifest(manifest_path)
    base = manifest_path.parent
    if not m.features:
        raise DataError(f"{manifest_path}: manifest lists no features")
    feats = [load_feature_matrix(base / f.path, f.dim) for f in m.features]
    n0 = feats[0].shape[0]
    for f, X in zip(m.features, feats):
        if X.shape[0] != n0:
            raise RowCountMismatchError(
                f"feature {f.name!r} has {X.shape[0]} rows but feature {m.features[0].name!r} has {n0}"
            )
    labels, names, k = None, (), None
    if m.labels:
        labels, names = read_labels(base / m.labels)
        if len(labels) > n0 and all(v is None for v in labels[n0:]):
            labels = labels[:n0]
        if len(labels) != n0:
            raise RowCountMismatchError(f"{base / m.labels}: {len(labels)} labels for {n0} feature rows")
        k = len(names) or None
    d = MultiFeatureDataset(feats, labels, n_classes=k, feature_names=[f.name for f in m.features], label_names=names)
    problems = validate_dataset(d)
    if problems:
        raise DataError(f"{manifest_path}: " + "; ".join(problems))
    return d


def write_dataset(d: MultiFeatureDataset, out_dir, name: str = "dataset", binary: bool = False) -> Path:
    """Write features, labels and a manifest into ``out_dir``; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ext = "bin" if binary else "csv"
    entries = []
    for fname, X in zip(d.feature_names, d.features):
        fpath = f"{name}_{fname}.{ext}"
        save_feature_matrix(out / fpath, X, binary=binary)
        entries.append(FeatureEntry(fname, fpath, X.shape[1]))
    labels_path = None
    if any(v is not None for v in d.labels):
        labels_path = f"{name}_labels.txt"
        names = list(d.label_names) or [str(k) for k in range(1, (d.n_classes or 0) + 1)]
        text = "\n".join("" if v is None else names[v - 1] for v in d.labels)
        (out / labels_path).write_text(text + "\n", encoding="utf-8")
    mpath = out / f"{name}.manifest.json"
    save_manifest(DatasetManifest(name, tuple(entries), labels_path), mpath)
    return mpath


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian class clusters observed through S views.

    ``correlation`` mixes independent per-view class means (0) with a shared
    per-class latent projected into every view (1). ``spread`` scales the class
    means, either for all views or per view.
    """

    n_classes: int = 5
    n_views: int = 3
    dims: tuple = (20, 20, 20)
    samples_per_class: int = 40
    spread: object = 1.0
    sigma: float = 1.0
    correlation: float = 0.3
    seed: int = 0
    labeled: bool = True

    def __post_init__(self):
        dims = self.dims
        if isinstance(dims, int):
            dims = (dims,) * self.n_views
        object.__setattr__(self, "dims", tuple(int(v) for v in dims))
        spread = self.spread
        if isinstance(spread, (int, float)):
            spread = (spread,) * self.n_views
        object.__setattr__(self, "spread", tuple(float(v) for v in spread))
        if self.n_classes < 1 or self.n_views < 1 or self.samples_per_class < 1:
            raise ValueError("class, view and sample counts must be >= 1")
        if len(self.dims) != self.n_views or min(self.dims) < 1:
            raise ValueError("dims must list one positive width per view")
        if len(self.spread) != self.n_views:
            raise ValueError("spread must be a scalar or one value per view")
        if self.sigma < 0 or min(self.spread) < 0:
            raise ValueError("sigma and spread must be non-negative")
        if not 0.0 <= self.correlation <= 1.0:
            raise ValueError("correlation must lie in [0, 1]")

    @classmethod
    def from_dict(cls, raw: dict) -> "SyntheticSpec":
        raw = dict(raw)
        for key in ("dims", "spread"):
            if isinstance(raw.get(key), list):
                raw[key] = tuple(raw[key])
        return cls(**raw)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["dims"] = list(self.dims)
        out["spread"] = list(self.spread)
        return out


def generate_synthetic(spec: SyntheticSpec) -> MultiFeatureDataset:
    """Samples are class mean + isotropic noise, ordered class by class."""
    rng = np.random.default_rng(spec.seed)
    K, q = spec.n_classes, min(spec.dims)
    latent = rng.standard_normal((K, q))
    a, b = np.sqrt(1.0 - spec.correlation), np.sqrt(spec.correlation)
    feats = []
    for d_s, spread in zip(spec.dims, spec.spread):
        proj = rng.standard_normal((d_s, q)) / np.sqrt(q)
        own = rng.standard_normal((K, d_s))
        means = spread * (a * own + b * latent @ proj.T)
        noise = rng.standard_normal((K * spec.samples_per_class, d_s))
        feats.append(np.repeat(means, spec.samples_per_class, axis=0) + spec.sigma * noise)
    labels = np.repeat(np.arange(1, K + 1), spec.samples_per_class).tolist() if spec.labeled else None
    return MultiFeatureDataset(
        feats, labels, n_classes=K, feature_names=[f"view{s + 1}" for s in range(spec.n_views)]
    )


def run_report(state, config: Optional[dict] = None, variants: Sequence[str] = ("CURL-EF", "CURL-LF", "CURL-EF&LF")) -> dict:
    """Report dict for one co-training run.

    Each round record's ``metrics`` maps variant name to MAP. Additions are
    attached to the variant of the view that received them (both for EF&LF).
    """
    rounds = []
    for rec in state.history:
        adds = [a.as_dict() for a in rec.additions]
        for v in variants:
            if v not in rec.metrics:
                continue
            rounds.append(
                {
                    "round": rec.round,
                    "variant": v,
                    "map": rec.metrics[v],
                    "additions": [a for a in adds if _addition_belongs(v, a["view"])],
                }
            )
    return {"format_version": REPORT_VERSION, "config": config or {}, "rounds": rounds}


def _addition_belongs(variant: str, view: str) -> bool:
    tag = variant.split("-", 1)[-1].removesuffix("_n")
    return tag == "EF&LF" or tag == view


def save_run_report(report, path, config: Optional[dict] = None) -> None:
    """Write a report dict, or the report of a ``CotrainState``, as canonical JSON.

    Keys are sorted, so identical inputs give byte-identical files.
    """
    if not isinstance(report, dict):
        report = run_report(report, config)
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_run_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_map_csv(rows: Sequence[dict], path, columns: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow(row)
