import json

import numpy as np
import pytest

from curl_cotrain import data_io
from curl_cotrain.core_types import View, ViewPair, validate_dataset
from curl_cotrain.cotraining import CotrainConfig, run_cotraining
from curl_cotrain.data_io import (
    DataError,
    DimensionMismatchError,
    FeatureParseError,
    NonFiniteError,
    RowCountMismatchError,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    load_feature_matrix,
    load_run_report,
    save_feature_matrix,
    save_run_report,
    write_dataset,
)
from curl_cotrain.linear_classifier import train


class TestFeatureFiles:
    def test_csv_round_trip(self, tmp_path, rng):
        X = rng.normal(size=(5, 3))
        save_feature_matrix(tmp_path / "x.csv", X)
        assert np.array_equal(load_feature_matrix(tmp_path / "x.csv", 3), X)

    def test_binary_round_trip(self, tmp_path, rng):
        X = rng.normal(size=(5, 3))
        save_feature_matrix(tmp_path / "x.bin", X, binary=True)
        raw = (tmp_path / "x.bin").read_bytes()
        assert raw[:8] == b"CURLFEAT"
        assert len(raw) == 32 + 8 * 15
        assert np.array_equal(load_feature_matrix(tmp_path / "x.bin"), X)

    def test_csv_literal(self, tmp_path):
        (tmp_path / "x.csv").write_text("1,2\n3.5,-4e-1\n\n")
        np.testing.assert_array_equal(load_feature_matrix(tmp_path / "x.csv"), [[1, 2], [3.5, -0.4]])

    def test_dimension_mismatch(self, tmp_path):
        (tmp_path / "x.csv").write_text("1,2\n3,4\n")
        with pytest.raises(DimensionMismatchError, match="declares 3"):
            load_feature_matrix(tmp_path / "x.csv", 3)

    def test_ragged(self, tmp_path):
        (tmp_path / "x.csv").write_text("1,2\n3\n")
        with pytest.raises(FeatureParseError, match="ragged"):
            load_feature_matrix(tmp_path / "x.csv")

    def test_non_numeric(self, tmp_path):
        (tmp_path / "x.csv").write_text("1,2\n3,abc\n")
        with pytest.raises(FeatureParseError, match=":2:"):
            load_feature_matrix(tmp_path / "x.csv")

    def test_nan(self, tmp_path):
        (tmp_path / "x.csv").write_text("1,2\n3,nan\n")
        with pytest.raises(NonFiniteError, match="row 2, column 2"):
            load_feature_matrix(tmp_path / "x.csv")

    def test_truncated_binary(self, tmp_path, rng):
        save_feature_matrix(tmp_path / "x.bin", rng.normal(size=(4, 2)), binary=True)
        raw = (tmp_path / "x.bin").read_bytes()
        (tmp_path / "x.bin").write_bytes(raw[:-8])
        with pytest.raises(FeatureParseError):
            load_feature_matrix(tmp_path / "x.bin")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FeatureParseError):
            load_feature_matrix(tmp_path / "nope.csv")

    def test_data_errors_are_value_errors(self):
        assert issubclass(DataError, ValueError)


def write_manifest(tmp_path, features, labels=None):
    entries = []
    for name, rows, dim in features:
        (tmp_path / f"{name}.csv").write_text(rows)
        entries.append({"name": name, "path": f"{name}.csv", "dim": dim})
    raw = {"name": "t", "format_version": 1, "features": entries, "labels": None}
    if labels is not None:
        (tmp_path / "labels.txt").write_text(labels)
        raw["labels"] = "labels.txt"
    path = tmp_path / "t.manifest.json"
    path.write_text(json.dumps(raw))
    return path


class TestManifest:
    def test_load(self, tmp_path):
        path = write_manifest(
            tmp_path, [("a", "1,2\n3,4\n5,6\n", 2), ("b", "1\n2\n3\n", 1)], "cat\n\ndog\n"
        )
        d = load_dataset(path)
        assert d.n_samples == 3 and d.dims == [2, 1]
        assert d.labels == (1, None, 2)
        assert d.label_names == ("cat", "dog")
        assert d.feature_names == ("a", "b")

    def test_numeric_labels_sort_numerically(self, tmp_path):
        path = write_manifest(tmp_path, [("a", "1\n2\n3\n", 1)], "10\n2\n10\n")
        d = load_dataset(path)
        assert d.labels == (2, 1, 2)

    def test_no_labels(self, tmp_path):
        d = load_dataset(write_manifest(tmp_path, [("a", "1\n2\n", 1)]))
        assert d.n_classes is None
        assert d.labeled_ids.size == 0

    def test_row_mismatch_names_both(self, tmp_path):
        path = write_manifest(tmp_path, [("gist", "1\n2\n3\n", 1), ("sift", "1\n2\n", 1)])
        with pytest.raises(RowCountMismatchError, match="'sift'.*'gist'"):
            load_dataset(path)

    def test_label_count_mismatch(self, tmp_path):
        path = write_manifest(tmp_path, [("a", "1\n2\n3\n", 1)], "1\n2\n")
        with pytest.raises(RowCountMismatchError):
            load_dataset(path)

    def test_manifest_round_trip(self, tmp_path):
        m = data_io.DatasetManifest("x", (data_io.FeatureEntry("a", "a.csv", 3),), "l.txt")
        data_io.save_manifest(m, tmp_path / "m.json")
        assert data_io.load_manifest(tmp_path / "m.json") == m

    def test_malformed_manifest(self, tmp_path):
        (tmp_path / "m.json").write_text('{"name": "x"}')
        with pytest.raises(DataError, match="features"):
            load_dataset(tmp_path / "m.json")
        (tmp_path / "m.json").write_text("{not json")
        with pytest.raises(DataError):
            load_dataset(tmp_path / "m.json")

    def test_write_dataset_round_trip(self, tmp_path, small_synthetic):
        for binary in (False, True):
            d2 = load_dataset(write_dataset(small_synthetic, tmp_path / str(binary), binary=binary))
            for a, b in zip(small_synthetic.features, d2.features):
                assert np.array_equal(a, b)
            assert d2.labels == small_synthetic.labels


class TestSynthetic:
    def test_shapes_and_order(self):
        d = generate_synthetic(SyntheticSpec(n_classes=3, n_views=2, dims=(4, 5), samples_per_class=6))
        assert d.dims == [4, 5] and d.n_samples == 18
        assert d.labels == tuple(np.repeat([1, 2, 3], 6))

    def test_zero_noise_gives_class_means(self):
        d = generate_synthetic(SyntheticSpec(n_classes=3, n_views=2, dims=(4, 5), samples_per_class=6, sigma=0))
        for X in d.features:
            for k in range(3):
                block = X[6 * k: 6 * (k + 1)]
                assert np.all(block == block[0])

    def test_deterministic(self):
        spec = SyntheticSpec(seed=4)
        a, b = generate_synthetic(spec), generate_synthetic(spec)
        assert all(np.array_equal(x, y) for x, y in zip(a.features, b.features))
        c = generate_synthetic(SyntheticSpec(seed=5))
        assert not np.array_equal(a.features[0], c.features[0])

    def test_well_separated_when_spread_dominates(self):
        d = generate_synthetic(SyntheticSpec(n_classes=4, n_views=1, dims=(10,), spread=20.0, sigma=0.5))
        X, y = d.features[0], np.array(d.labels)
        means = np.array([X[y == k].mean(axis=0) for k in range(1, 5)])
        nearest = np.argmin(((X[:, None, :] - means[None]) ** 2).sum(axis=2), axis=1) + 1
        assert np.all(nearest == y)

    def test_single_view_classifier_separates(self):
        d = generate_synthetic(SyntheticSpec(n_classes=2, n_views=2, dims=(5, 5), spread=10.0, sigma=0.1))
        y = np.array(d.labels)
        for X in d.features:
            assert np.mean(train(X, y).predict(X) == y) == 1.0

    @pytest.mark.parametrize("seed", range(5))
    def test_always_valid(self, seed):
        rng = np.random.default_rng(seed)
        spec = SyntheticSpec(n_classes=int(rng.integers(1, 5)), n_views=2, dims=tuple(rng.integers(1, 6, size=2)),
                             samples_per_class=int(rng.integers(1, 5)), sigma=float(rng.random()),
                             correlation=float(rng.random()), seed=seed)
        assert validate_dataset(generate_synthetic(spec)) == []

    def test_per_view_spread(self):
        spec = SyntheticSpec(n_views=2, dims=(3, 3), spread=[1.0, 0.0], sigma=0.0)
        d = generate_synthetic(spec)
        assert np.all(d.features[1] == 0)
        assert SyntheticSpec.from_dict(spec.to_dict()) == spec

    def test_validation(self):
        with pytest.raises(ValueError):
            SyntheticSpec(n_views=2, dims=(3,))
        with pytest.raises(ValueError):
            SyntheticSpec(correlation=1.5)
        with pytest.raises(ValueError):
            SyntheticSpec(n_views=2, dims=(3, 3), spread=(1.0,))

    def test_unlabeled(self):
        assert generate_synthetic(SyntheticSpec(labeled=False)).labeled_ids.size == 0


def tiny_views():
    rng = np.random.default_rng(0)
    centers = np.array([[3.0, 0.0], [-3.0, 0.0]])
    y = np.array([1, 2] * 10)
    X = centers[y - 1] + rng.normal(size=(20, 2))
    views = ViewPair(X[:2], X[2:], X[:2] * 0.5, X[2:] * 0.5, [0, 1], range(2, 20))
    return views, y[:2]


class TestRunReport:
    def evaluate(self, c, ef, lf):
        return {"CURL-EF": 0.5 + c / 100, "CURL-LF": 0.4, "CURL-EF&LF": 0.45}

    @pytest.mark.parametrize("rounds", [0, 5])
    def test_entries_per_variant(self, rounds):
        views, y = tiny_views()
        state = run_cotraining(views, y, 2, CotrainConfig(rounds=rounds), self.evaluate)
        report = data_io.run_report(state)
        for v in ("CURL-EF", "CURL-LF", "CURL-EF&LF"):
            entries = [r for r in report["rounds"] if r["variant"] == v]
            assert [r["round"] for r in entries] == list(range(rounds + 1))
        assert all(r["additions"] == [] for r in report["rounds"] if r["round"] == 0)

    def test_additions_attached_to_receiving_view(self):
        views, y = tiny_views()
        state = run_cotraining(views, y, 2, CotrainConfig(rounds=2), self.evaluate)
        report = data_io.run_report(state)
        for r in report["rounds"]:
            views_seen = {a["view"] for a in r["additions"]}
            if r["variant"] == "CURL-EF":
                assert views_seen <= {View.EF.value}
            if r["variant"] == "CURL-LF":
                assert views_seen <= {View.LF.value}
        assert any(r["additions"] for r in report["rounds"])

    def test_round_trip_is_byte_stable(self, tmp_path):
        views, y = tiny_views()
        state = run_cotraining(views, y, 2, CotrainConfig(rounds=2), self.evaluate)
        save_run_report(state, tmp_path / "a.json", config={"x": 1})
        loaded = load_run_report(tmp_path / "a.json")
        assert loaded == data_io.run_report(state, {"x": 1})
        save_run_report(loaded, tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert loaded["config"] == {"x": 1}
        entry = next(r for r in loaded["rounds"] if r["additions"])
        assert set(entry["additions"][0]) == {"view", "class", "sample_id", "confidence", "relaxed"}
