import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ganbalance.core import (Dataset, SplitSpec, class_partition, load_csv,
                             make_rng, minmax_apply, minmax_fit, minmax_invert,
                             save_csv, train_test_split)
from ganbalance.errors import ConfigError, DegenerateDataError, ParseError
from ganbalance.fixtures import make_imbalanced, shape_fixture


def write_csv(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_small_symmetric_file(self, tmp_path):
        p = write_csv(tmp_path, "1,2,a\n3,4,b\n5,6,a\n7,8,b\n")
        ds = load_csv(p, 2, "b")
        assert ds.class_counts() == (2, 2)
        assert ds.n_features == 2
        np.testing.assert_array_equal(ds.labels, [0, 1, 0, 1])

    def test_abalone_shape_counts(self, tmp_path):
        ds = shape_fixture("abalone", seed=1)
        p = tmp_path / "abalone.csv"
        save_csv(ds, p)
        loaded = load_csv(p, "label", 1)
        assert loaded.class_counts() == (3337, 840)
        assert loaded.n_samples == 4177

    def test_ragged_row_reports_line(self, tmp_path):
        p = write_csv(tmp_path, "1,2,0\n1,2,3,0\n")
        with pytest.raises(ParseError, match="line 2"):
            load_csv(p, -1, 1)

    def test_non_numeric_cell(self, tmp_path):
        p = write_csv(tmp_path, "1,2,0\n1,oops,1\n3,4,0\n5,6,1\n")
        with pytest.raises(ParseError, match="non-numeric"):
            load_csv(p, -1, 1)

    def test_missing_label_column(self, tmp_path):
        p = write_csv(tmp_path, "a,b,label\n1,2,0\n3,4,1\n")
        with pytest.raises(ConfigError, match="not found"):
            load_csv(p, "class", 1)

    def test_too_few_per_class(self, tmp_path):
        p = write_csv(tmp_path, "1,0\n2,0\n3,0\n4,1\n")
        with pytest.raises(DegenerateDataError):
            load_csv(p, -1, 1)

    def test_minority_label_selecting_majority_rejected(self, tmp_path):
        p = write_csv(tmp_path, "1,0\n2,0\n3,0\n4,1\n5,1\n")
        with pytest.raises(ConfigError, match="larger class"):
            load_csv(p, -1, 0)

    def test_label_order_preserved(self, tmp_path):
        p = write_csv(tmp_path, "1,pos\n2,neg\n3,pos\n4,neg\n5,neg\n")
        ds = load_csv(p, 1, "pos")
        np.testing.assert_array_equal(ds.labels, [1, 0, 1, 0, 0])
        np.testing.assert_array_equal(ds.features.ravel(), [1, 2, 3, 4, 5])

    def test_round_trip_identical(self, tmp_path):
        ds = make_imbalanced(20, 8, 3, seed=3)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        save_csv(ds, p1)
        loaded = load_csv(p1, "label", 1)
        save_csv(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()
        np.testing.assert_array_equal(loaded.features, ds.features)
        np.testing.assert_array_equal(loaded.labels, ds.labels)


class TestDataset:
    def test_rejects_nan(self):
        with pytest.raises(DegenerateDataError):
            Dataset(np.array([[1.0], [np.nan]]), np.array([0, 1]))

    def test_rejects_mismatched_rows(self):
        with pytest.raises(DegenerateDataError):
            Dataset(np.ones((3, 2)), np.array([0, 1]))

    def test_rejects_bad_labels(self):
        with pytest.raises(DegenerateDataError):
            Dataset(np.ones((2, 2)), np.array([0, 2]))

    def test_immutable(self):
        ds = make_imbalanced(5, 3, 2, seed=0)
        with pytest.raises(ValueError):
            ds.features[0, 0] = 99.0


class TestMinmax:
    def test_affine_map(self):
        ds = Dataset(np.array([[0.0], [5.0], [10.0]]), np.array([0, 0, 1]))
        out = minmax_apply(ds, minmax_fit(ds))
        np.testing.assert_allclose(out.features.ravel(), [0.0, 0.5, 1.0])

    def test_constant_column_midpoint(self):
        ds = Dataset(np.array([[7.0], [7.0], [7.0]]), np.array([0, 0, 1]))
        out = minmax_apply(ds, minmax_fit(ds))
        np.testing.assert_allclose(out.features.ravel(), [0.5, 0.5, 0.5])

    def test_round_trip(self):
        rng = make_rng(5)
        ds = Dataset(rng.uniform(-3, 9, size=(5, 3)), np.array([0, 0, 1, 1, 0]))
        params = minmax_fit(ds)
        back = minmax_invert(minmax_apply(ds, params), params)
        # oracle: the inverse affine map recovers the input
        np.testing.assert_allclose(back.features, ds.features, atol=1e-9)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=30))
    def test_order_preserving(self, vals):
        col = np.array(vals)[:, None]
        ds = Dataset(col, np.array([1] + [0] * (len(vals) - 1)))
        out = minmax_apply(ds, minmax_fit(ds)).features.ravel()
        order = np.argsort(vals, kind="stable")
        assert np.all(np.diff(out[order]) >= -1e-12)


class TestSplit:
    def test_exact_proportions(self):
        ds = make_imbalanced(90, 10, 2, seed=0)
        train, test = train_test_split(ds, SplitSpec(0.8, seed=1))
        assert train.class_counts() == (72, 8)
        assert test.class_counts() == (18, 2)

    def test_determinism(self):
        ds = make_imbalanced(50, 10, 2, seed=0)
        a = train_test_split(ds, SplitSpec(0.8, seed=7))
        b = train_test_split(ds, SplitSpec(0.8, seed=7))
        np.testing.assert_array_equal(a[0].features, b[0].features)
        np.testing.assert_array_equal(a[1].features, b[1].features)

    def test_abalone_shape_train_size(self):
        # floor rule per class: floor(.8*3337) + floor(.8*840) = 2669 + 672
        ds = shape_fixture("abalone", seed=2)
        train, test = train_test_split(ds, SplitSpec(0.8, seed=0))
        assert train.n_samples == 3341
        assert test.n_samples == 4177 - 3341

    def test_partition_property(self):
        ds = make_imbalanced(30, 7, 3, seed=0)
        for seed in range(5):
            train, test = train_test_split(ds, SplitSpec(0.8, seed=seed))
            assert train.n_samples + test.n_samples == ds.n_samples
            combined = np.vstack([train.features, test.features])
            assert (np.sort(combined, axis=0) == np.sort(ds.features, axis=0)).all()

    def test_degenerate_class(self):
        ds = Dataset(np.arange(8, dtype=float)[:, None],
                     np.array([0, 0, 0, 0, 0, 0, 0, 1]))
        with pytest.raises(DegenerateDataError):
            train_test_split(ds, SplitSpec(0.8, seed=0))


class TestClassPartition:
    def test_example(self):
        ds = Dataset(np.zeros((5, 1)), np.array([0, 1, 0, 1, 0]))
        minority, majority = class_partition(ds)
        assert minority.tolist() == [1, 3]
        assert majority.tolist() == [0, 2, 4]

    def test_abalone_shape(self):
        ds = shape_fixture("abalone", seed=0)
        minority, majority = class_partition(ds)
        assert minority.size == 840
        assert majority.size == 3337


class TestRng:
    def test_same_seed_same_stream(self):
        a = make_rng(123).standard_normal(10)
        b = make_rng(123).standard_normal(10)
        np.testing.assert_array_equal(a, b)
