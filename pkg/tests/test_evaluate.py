import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ganbalance.core import make_rng
from ganbalance.errors import ConfigError, DegenerateDataError
from ganbalance.evaluate import (Confusion, MetricSet, aggregate, confusion,
                                 feature_std, histogram, ks_statistic, metrics,
                                 misclassification_count)


class TestConfusion:
    def test_perfect_agreement(self):
        c = confusion([1, 0, 1], [1, 0, 1])
        assert (c.tp, c.tn, c.fp, c.fn) == (2, 1, 0, 0)

    def test_inverted(self):
        c = confusion([0, 1, 0], [1, 0, 1])
        assert c.tp == 0 and c.tn == 0 and c.fp == 1 and c.fn == 2

    def test_matches_loop_oracle(self):
        rng = make_rng(1)
        p = rng.integers(0, 2, size=200)
        y = rng.integers(0, 2, size=200)
        c = confusion(p, y)
        tp = fp = tn = fn = 0
        for pi, yi in zip(p, y):
            if pi == 1 and yi == 1: tp += 1
            elif pi == 1 and yi == 0: fp += 1
            elif pi == 0 and yi == 0: tn += 1
            else: fn += 1
        assert (c.tp, c.fp, c.tn, c.fn) == (tp, fp, tn, fn)

    def test_length_mismatch(self):
        with pytest.raises(ConfigError):
            confusion([1, 0], [1])

    def test_permutation_invariance(self):
        rng = make_rng(2)
        p = rng.integers(0, 2, size=50)
        y = rng.integers(0, 2, size=50)
        perm = rng.permutation(50)
        assert metrics(confusion(p, y)) == metrics(confusion(p[perm], y[perm]))


class TestMetrics:
    def test_arithmetic_example(self):
        m = metrics(Confusion(tp=5, tn=3, fp=1, fn=1))
        assert m.accuracy == pytest.approx(0.8)
        assert m.precision == pytest.approx(5 / 6)
        assert m.recall == pytest.approx(5 / 6)
        assert m.f1 == pytest.approx(5 / 6)

    def test_zero_denominator_flagged(self):
        m = metrics(Confusion(tp=0, fp=0, tn=4, fn=2))
        assert m.precision == 0.0 and m.undefined_precision
        assert not m.undefined_recall

    def test_all_zero_confusion_rejected(self):
        with pytest.raises(DegenerateDataError):
            metrics(Confusion(0, 0, 0, 0))

    @settings(max_examples=200)
    @given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
    def test_fuzzed_identities(self, tp, fp, tn, fn):
        c = Confusion(tp, fp, tn, fn)
        if c.total == 0:
            return
        m = metrics(c)
        assert m.accuracy == pytest.approx(1 - misclassification_count(c) / c.total, abs=0)
        if m.precision + m.recall > 0:
            assert m.f1 == pytest.approx(
                2 * m.precision * m.recall / (m.precision + m.recall), abs=1e-12)
            assert min(m.precision, m.recall) - 1e-12 <= m.f1 <= max(m.precision, m.recall) + 1e-12


class TestMisclassification:
    def test_perfect_classifier(self):
        assert misclassification_count(Confusion(5, 0, 5, 0)) == 0

    def test_sum_of_errors(self):
        assert misclassification_count(Confusion(10, 3, 20, 4)) == 7


class TestFeatureStd:
    def test_constant_column(self):
        per, pooled = feature_std(np.array([[1.0], [1.0], [1.0]]))
        assert per[0] == 0.0 and pooled == 0.0

    def test_two_point_analytic(self):
        per, _ = feature_std(np.array([[0.0], [2.0]]))
        assert per[0] == pytest.approx(math.sqrt(2))

    def test_matches_two_pass_oracle(self):
        X = make_rng(3).uniform(size=(40, 5))
        per, pooled = feature_std(X)
        mean = X.sum(axis=0) / 40
        var = ((X - mean) ** 2).sum(axis=0) / 39
        np.testing.assert_allclose(per, np.sqrt(var), atol=1e-12)
        assert pooled == pytest.approx(math.sqrt(var.mean()), abs=1e-12)

    def test_single_row_rejected(self):
        with pytest.raises(DegenerateDataError):
            feature_std(np.ones((1, 3)))


class TestHistogram:
    def test_uniform_grid(self):
        edges, counts = histogram(np.arange(100) / 100, 10)
        assert counts.tolist() == [10] * 10

    def test_single_value(self):
        edges, counts = histogram([3.0], 5)
        assert counts.sum() == 1

    def test_counts_conserved(self):
        v = make_rng(4).standard_normal(123)
        for bins in (1, 3, 17):
            _, counts = histogram(v, bins)
            assert counts.sum() == 123

    def test_empty_rejected(self):
        with pytest.raises(DegenerateDataError):
            histogram([], 3)


class TestKsStatistic:
    def test_normal_draws_small(self):
        v = make_rng(5).standard_normal(1000)
        # asymptotic 5% critical value at n=1000 is about 1.36/sqrt(n) = 0.043
        assert ks_statistic(v) < 0.05

    def test_constant_is_zero(self):
        assert ks_statistic([2.0, 2.0, 2.0]) == 0.0

    def test_bounded(self):
        v = make_rng(6).uniform(size=200) ** 4  # very non-normal
        assert 0.0 <= ks_statistic(v) <= 1.0

    def test_uniform_worse_than_normal(self):
        rng = make_rng(7)
        assert ks_statistic(rng.standard_normal(500)) < ks_statistic(
            (rng.uniform(size=500) > 0.5).astype(float))


class TestAggregate:
    def one(self, v):
        return MetricSet(v, v, v, v)

    def test_single_run(self):
        agg = aggregate([self.one(0.7)])
        assert agg.mean["f1"] == 0.7 and agg.max["f1"] == 0.7 and agg.std["f1"] == 0.0

    def test_identical_runs(self):
        agg = aggregate([self.one(0.9)] * 3)
        assert agg.mean["accuracy"] == pytest.approx(0.9)
        assert agg.std["accuracy"] == pytest.approx(0.0)

    def test_matches_direct_formulas(self):
        rng = make_rng(8)
        vals = rng.uniform(size=10)
        agg = aggregate([self.one(v) for v in vals])
        assert agg.mean["recall"] == pytest.approx(vals.mean(), abs=1e-12)
        assert agg.max["recall"] == pytest.approx(vals.max())
        assert agg.std["recall"] == pytest.approx(vals.std(ddof=1), abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(DegenerateDataError):
            aggregate([])
