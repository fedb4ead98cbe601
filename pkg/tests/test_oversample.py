import numpy as np
import pytest

from ganbalance.core import Dataset, make_rng
from ganbalance.errors import DegenerateDataError
from ganbalance.fixtures import make_imbalanced, shape_fixture
from ganbalance.oversample import (MODE_EXTRAPOLATION, MODE_INTERPOLATION,
                                   OversampleRequest, balance_to_parity, smote,
                                   svm_smote)
from ganbalance.svm import SvmHyperparams, SvmModel, train_linear_svm


class TestSmote:
    def test_segment_between_two_points(self):
        ds = Dataset(np.array([[0.0, 0.0], [1.0, 1.0], [5.0, 0.0], [6.0, 0.0]]),
                     np.array([1, 1, 0, 0]))
        batch = smote(ds, OversampleRequest(10, k=1, seed=0))
        for row in batch.samples:
            assert row[0] == pytest.approx(row[1])
            assert 0.0 <= row[0] <= 1.0

    def test_zero_request_empty(self):
        ds = make_imbalanced(10, 4, 2, seed=0)
        batch = smote(ds, OversampleRequest(0))
        assert batch.samples.shape == (0, 2)
        assert batch.provenance == []

    def test_bounding_box_closure(self):
        ds = make_imbalanced(40, 20, 2, seed=1)
        batch = smote(ds, OversampleRequest(40, seed=2))
        minority = ds.features[ds.labels == 1]
        lo, hi = minority.min(axis=0), minority.max(axis=0)
        assert np.all(batch.samples >= lo - 1e-12)
        assert np.all(batch.samples <= hi + 1e-12)

    def test_segment_identity_via_provenance(self):
        ds = make_imbalanced(30, 12, 3, seed=4)
        batch = smote(ds, OversampleRequest(25, seed=5))
        for s, p in zip(batch.samples, batch.provenance):
            x = ds.features[p.base_index]
            nn = ds.features[p.neighbor_index]
            np.testing.assert_allclose(s, x + p.delta * (nn - x), atol=1e-9)
            assert p.mode == "smote"

    def test_deterministic(self):
        ds = make_imbalanced(30, 12, 3, seed=4)
        a = smote(ds, OversampleRequest(25, seed=5))
        b = smote(ds, OversampleRequest(25, seed=5))
        assert np.array_equal(a.samples, b.samples)

    def test_minority_too_small(self):
        ds = Dataset(np.arange(6, dtype=float)[:, None], np.array([0, 0, 0, 0, 0, 1]))
        with pytest.raises(DegenerateDataError):
            smote(ds, OversampleRequest(4))


def interpolation_setup():
    """Two close minority points engulfed by majority: every m-neighbourhood
    is majority-dominated, so synthesis must interpolate."""
    rng = make_rng(6)
    majority = rng.uniform(-3, 3, size=(40, 2))
    minority = np.array([[0.0, 0.0], [0.4, 0.0]])
    X = np.vstack([minority, majority])
    y = np.array([1, 1] + [0] * 40)
    return Dataset(X, y)


def extrapolation_setup():
    """Tight minority cluster with the majority far away: minority-dominated
    neighbourhoods, so synthesis must extrapolate."""
    rng = make_rng(7)
    minority = 0.45 + 0.1 * rng.uniform(size=(20, 2))
    majority = np.vstack([0.9 + 0.05 * rng.uniform(size=(25, 2))])
    X = np.vstack([minority, majority])
    y = np.array([1] * 20 + [0] * 25)
    return Dataset(X, y)


class TestSvmSmote:
    def test_interpolation_stays_inside_segment(self):
        ds = interpolation_setup()
        model = train_linear_svm(ds)
        batch = svm_smote(ds, model, OversampleRequest(20, k=1, m=9, seed=1))
        assert {p.mode for p in batch.provenance} == {MODE_INTERPOLATION}
        for s, p in zip(batch.samples, batch.provenance):
            sv = ds.features[p.base_index]
            nn = ds.features[p.neighbor_index]
            np.testing.assert_allclose(s, sv + p.delta * (nn - sv), atol=1e-9)
            # inside the segment => within the coordinate box of its endpoints
            assert np.all(s >= np.minimum(sv, nn) - 1e-12)
            assert np.all(s <= np.maximum(sv, nn) + 1e-12)

    def test_extrapolation_expands_boundary(self):
        ds = extrapolation_setup()
        model = train_linear_svm(ds)
        batch = svm_smote(ds, model, OversampleRequest(30, k=3, m=9, seed=2))
        assert {p.mode for p in batch.provenance} == {MODE_EXTRAPOLATION}
        for s, p in zip(batch.samples, batch.provenance):
            sv = ds.features[p.base_index]
            nn = ds.features[p.neighbor_index]
            if not p.clamped:
                np.testing.assert_allclose(s, sv + p.delta * (sv - nn), atol=1e-9)
            else:
                assert np.all(s >= -1e-12) and np.all(s <= 1 + 1e-12)

    def test_even_amount_distribution(self):
        # hand-built model: exactly 3 minority rows sit on/inside the margin
        X = np.array([[0.5, 0.0], [0.6, 0.0], [0.7, 0.0], [2.0, 0.0], [3.0, 0.0],
                      [-1.0, 0.0], [-2.0, 0.0], [-3.0, 0.0], [-1.5, 0.5], [-2.5, 0.5]])
        y = np.array([1, 1, 1, 1, 1, 0, 0, 0, 0, 0])
        ds = Dataset(X, y)
        model = SvmModel(np.array([1.0, 0.0]), 0.0, np.array([]), SvmHyperparams())
        batch = svm_smote(ds, model, OversampleRequest(40, k=2, m=5, seed=3))
        counts = {}
        for p in batch.provenance:
            counts[p.base_index] = counts.get(p.base_index, 0) + 1
        assert sorted(counts.values(), reverse=True) == [14, 13, 13]
        assert set(counts) == {0, 1, 2}

    def test_deterministic(self):
        ds = extrapolation_setup()
        model = train_linear_svm(ds)
        a = svm_smote(ds, model, OversampleRequest(15, seed=9))
        b = svm_smote(ds, model, OversampleRequest(15, seed=9))
        assert np.array_equal(a.samples, b.samples)


class TestBalanceToParity:
    def test_abalone_arithmetic(self):
        ds = shape_fixture("abalone", seed=0)
        out = balance_to_parity(ds, "smote", seed=1)
        assert out.class_counts() == (3337, 3337)
        assert out.n_samples - ds.n_samples == 2497

    def test_pageblocks_arithmetic(self):
        ds = shape_fixture("pageblocks", seed=0)
        out = balance_to_parity(ds, "smote", seed=1)
        assert out.class_counts() == (443, 443)
        assert out.n_samples - ds.n_samples == 415

    def test_already_balanced_unchanged(self):
        ds = make_imbalanced(15, 15, 2, seed=0)
        out = balance_to_parity(ds, "smote", seed=1)
        assert out is ds

    def test_originals_preserved_and_labels_pure(self):
        ds = make_imbalanced(30, 10, 3, seed=2)
        out = balance_to_parity(ds, "svm_smote", seed=3)
        np.testing.assert_array_equal(out.features[: ds.n_samples], ds.features)
        np.testing.assert_array_equal(out.labels[: ds.n_samples], ds.labels)
        assert np.all(out.labels[ds.n_samples:] == 1)

    def test_unknown_method(self):
        ds = make_imbalanced(10, 4, 2, seed=0)
        with pytest.raises(DegenerateDataError, match="unknown"):
            balance_to_parity(ds, "adasyn")


def test_oversized_k_shrinks_with_warning():
    ds = make_imbalanced(20, 3, 2, seed=8)
    with pytest.warns(UserWarning, match="shrinking"):
        batch = smote(ds, OversampleRequest(5, k=10, seed=0))
    assert batch.samples.shape[0] == 5
