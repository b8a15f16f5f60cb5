from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srmobo import gp
from srmobo.pareto import (
    ParetoClassifier,
    dominates,
    extract_front,
    fit_pareto_classifier,
    front_labels,
    nondominated,
    pareto_probability,
)


def brute_force_labels(y):
    n = len(y)
    labels = []
    for i in range(n):
        dominated = False
        for j in range(n):
            if all(y[j][k] <= y[i][k] for k in range(len(y[i]))) and any(
                y[j][k] < y[i][k] for k in range(len(y[i]))
            ):
                dominated = True
                break
        labels.append(0 if dominated else 1)
    return np.array(labels)


class TestDominates:
    def test_strict(self):
        assert dominates([1, 2], [2, 3])

    def test_incomparable(self):
        assert not dominates([1, 3], [3, 1])

    def test_equal(self):
        assert not dominates([1, 2], [1, 2])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            dominates([1, 2], [1, 2, 3])


class TestExtractFront:
    def test_single_point(self):
        np.testing.assert_array_equal(extract_front([[3.0, 4.0]]), [1])

    def test_three_points(self):
        np.testing.assert_array_equal(extract_front([[0, 1], [1, 0], [1, 1]]), [1, 1, 0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            extract_front(np.zeros((0, 2)))

    @pytest.mark.parametrize("s", [2, 3, 4, 5])
    def test_matches_brute_force(self, s):
        rng = np.random.default_rng(s)
        for _ in range(5):
            y = rng.random((200, s))
            np.testing.assert_array_equal(extract_front(y), brute_force_labels(y.tolist()))

    def test_duplicates_and_ties(self):
        rng = np.random.default_rng(0)
        for s in (2, 3):
            y = rng.integers(0, 4, size=(60, s)).astype(float)
            np.testing.assert_array_equal(extract_front(y), brute_force_labels(y.tolist()))

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), s=st.integers(2, 4), n=st.integers(1, 40))
    def test_properties(self, seed, s, n):
        rng = np.random.default_rng(seed)
        y = rng.integers(0, 6, size=(n, s)).astype(float)
        labels = extract_front(y)
        perm = rng.permutation(n)
        np.testing.assert_array_equal(extract_front(y[perm]), labels[perm])
        front = y[labels == 1]
        for p in front:
            assert not any(dominates(q, p) for q in y)
        for p in y[labels == 0]:
            assert any(dominates(q, p) for q in front)

    def test_nondominated_rows(self):
        np.testing.assert_array_equal(nondominated([[0, 1], [1, 0], [1, 1]]), [[0, 1], [1, 0]])


class TestLabels:
    def test_infeasible_get_zero(self):
        y = np.array([[1.0, 1.0], [np.nan, np.nan], [0.0, 0.0]])
        np.testing.assert_array_equal(front_labels([True, False, True], y), [0, 0, 1])

    def test_one_feasible(self):
        y = np.array([[5.0, 5.0], [np.nan, np.nan], [np.nan, np.nan]])
        np.testing.assert_array_equal(front_labels([True, False, False], y), [1, 0, 0])

    def test_new_dominating_point_flips_labels(self):
        y = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert front_labels([True, True], y).tolist() == [1, 1]
        y2 = np.vstack([y, [-1.0, -1.0]])
        assert front_labels([True, True, True], y2).tolist() == [0, 0, 1]


class TestClassifier:
    def setup_method(self):
        rng = np.random.default_rng(4)
        self.x = rng.random((12, 2))
        # objectives with a clear mixture of front and dominated points
        self.y = np.stack([self.x[:, 0], 1 - self.x[:, 0] + self.x[:, 1]], axis=1)
        self.mask = np.ones(12, dtype=bool)
        self.mask[[3, 7]] = False
        self.clf = fit_pareto_classifier(self.x, self.mask, self.y, gp.KernelKind.MATERN52)

    def test_interpolates_labels(self):
        for xi, label in zip(self.x, self.clf.labels):
            prob, _ = pareto_probability(self.clf, xi)
            if label == 1:
                assert prob >= 0.9
            else:
                assert prob <= 0.1

    def test_all_nondominated_classifier_high(self):
        x = np.linspace(0, 1, 6)[:, None]
        y = np.stack([x[:, 0], 1 - x[:, 0]], axis=1)
        clf = fit_pareto_classifier(x, np.ones(6, bool), y)
        assert np.all(clf.labels == 1)
        assert np.all(clf.predict(x)[0] >= 0.5)

    def test_probabilities_in_unit_interval(self):
        q = np.random.default_rng(0).uniform(-1, 2, size=(10_000, 2))
        prob, var = self.clf.predict(q)
        assert np.all((prob >= 0) & (prob <= 1))
        assert np.all(var >= 0)

    def test_clipping(self):
        model = gp.GpModel.build(gp.KernelSpec("sqexp", 1.0, [1.0]), 1e-10, 0.0, [[0.0]], [1.3])
        clf = ParetoClassifier(model, np.array([1]))
        assert pareto_probability(clf, np.array([0.0]))[0] == 1.0
        raw_var = gp.predict(model, np.array([0.5])).variance
        assert pareto_probability(clf, np.array([0.5]))[1] == raw_var

    def test_needs_feasible_point(self):
        with pytest.raises(ValueError):
            fit_pareto_classifier(self.x[:2], [False, False], np.full((2, 2), np.nan))
