import numpy as np
import pytest

from curl_cotrain.core_types import (
    MultiFeatureDataset,
    PseudoLabel,
    View,
    ViewPair,
    check_confidence_vector,
    class_coverage,
    validate_dataset,
)


def test_well_formed_dataset_has_no_problems():
    d = MultiFeatureDataset([np.zeros((3, 2)), np.ones((3, 1))], [1, None, 2])
    assert validate_dataset(d) == []
    assert d.n_classes == 2
    assert d.dims == [2, 1]
    assert d.labeled_ids.tolist() == [0, 2]
    assert d.unlabeled_ids.tolist() == [1]


def test_row_mismatch_names_both_features():
    d = MultiFeatureDataset([np.zeros((3, 2)), np.zeros((4, 2))], feature_names=["gist", "sift"])
    problems = validate_dataset(d)
    assert any("'sift'" in p and "'gist'" in p for p in problems)


def test_non_finite_and_out_of_range_labels():
    X = np.zeros((3, 2))
    X[1, 1] = np.nan
    d = MultiFeatureDataset([X], [1, 3, None], n_classes=2)
    problems = validate_dataset(d)
    assert any("non-finite" in p for p in problems)
    assert any("label 3" in p for p in problems)


def test_duplicate_feature_names():
    d = MultiFeatureDataset([np.zeros((2, 1))] * 2, feature_names=["a", "a"])
    assert "feature names are not unique" in validate_dataset(d)


def test_features_are_read_only():
    d = MultiFeatureDataset([np.zeros((2, 2))])
    with pytest.raises(ValueError):
        d.features[0][0, 0] = 1.0


def test_label_array_rejects_unlabeled():
    d = MultiFeatureDataset([np.zeros((2, 1))], [1, None])
    assert d.label_array([0]).tolist() == [1]
    with pytest.raises(ValueError, match="sample 1"):
        d.label_array([1])


def test_subset_and_coverage():
    d = MultiFeatureDataset([np.arange(8.0).reshape(4, 2)], [1, 2, 2, None], n_classes=3)
    assert class_coverage(d) == {1: 1, 2: 2, 3: 0}
    s = d.subset([2, 0])
    assert s.features[0].tolist() == [[4.0, 5.0], [0.0, 1.0]]
    assert s.labels == (2, 1)
    assert s.n_classes == 3
    assert d.without_labels().labeled_ids.size == 0


def test_view_pair_row_checks():
    z = np.zeros((2, 3))
    vp = ViewPair(z, np.zeros((1, 3)), z, np.zeros((1, 3)), [0, 1], [5])
    assert vp.unlabeled_row() == {5: 0}
    assert vp.labeled(View.LF).shape == (2, 3)
    with pytest.raises(ValueError):
        ViewPair(z, z, z, z, [0], [1, 2])


def test_confidence_vector():
    assert check_confidence_vector([0.2, 0.8])
    assert not check_confidence_vector([0.2, 0.7])
    assert not check_confidence_vector([-0.1, 1.1])


def test_pseudo_label_validation():
    p = PseudoLabel(3, 1, 0.9, "LF", 1)
    assert p.source_view is View.LF
    with pytest.raises(ValueError):
        PseudoLabel(3, 1, 0.9, "LF", 0)
    with pytest.raises(ValueError):
        PseudoLabel(3, 1, 1.5, "LF", 1)
