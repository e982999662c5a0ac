from fractions import Fraction

import numpy as np
import pytest

from agrorec.errors import BadParams, EmptyInput, EmptyNode
from agrorec.forest import (
    RfParams,
    TreeParams,
    best_split,
    gini,
    grow_tree,
    permutation_importance,
    rf_importance,
    rf_predict,
    rf_train,
)
from agrorec.rng import spawn


def exhaustive_best_split(x, y, features, n_classes):
    """Exact-rational exhaustive oracle over every (feature, midpoint) pair.

    Ties break to the lower feature index, then the lower threshold, using
    Fraction arithmetic so mathematically equal decreases tie exactly.
    """
    n = x.shape[0]

    def gini_frac(labels):
        total = len(labels)
        counts = {}
        for lab in labels:
            counts[lab] = counts.get(lab, 0) + 1
        return 1 - sum(Fraction(c, total) ** 2 for c in counts.values())

    parent = gini_frac(list(y))
    best = None  # (decrease, feature, threshold)
    for f in sorted(features):
        values = sorted(set(x[:, f]))
        for lo, hi in zip(values, values[1:]):
            thr = (lo + hi) / 2.0
            left = [y[i] for i in range(n) if x[i, f] <= thr]
            right = [y[i] for i in range(n) if x[i, f] > thr]
            if not left or not right:
                continue
            dec = parent - (Fraction(len(left), n) * gini_frac(left)
                            + Fraction(len(right), n) * gini_frac(right))
            if dec > 0 and (best is None or dec > best[0]):
                best = (dec, f, thr)
    if best is None:
        return None
    return best[1], best[2], float(best[0])


class TestGini:
    def test_pure_node(self):
        assert gini([10, 0]) == pytest.approx(0.0, abs=1e-15)

    def test_maximal_binary(self):
        assert gini([5, 5]) == pytest.approx(0.5, abs=1e-15)

    def test_three_class(self):
        assert gini([2, 3, 5]) == pytest.approx(0.62, abs=1e-12)

    def test_empty(self):
        with pytest.raises(EmptyNode):
            gini([0, 0])


class TestBestSplit:
    def test_hand_computed_midpoint(self):
        x = np.array([[1.0], [2.0], [9.0], [10.0]])
        y = np.array([0, 0, 1, 1])
        f, thr, dec = best_split(x, y, [0], n_classes=2)
        assert (f, thr) == (0, 5.5)
        assert dec == pytest.approx(0.5, abs=1e-12)

    def test_identical_rows_mixed_labels(self):
        x = np.ones((4, 2))
        y = np.array([0, 1, 0, 1])
        assert best_split(x, y, [0, 1], n_classes=2) is None

    def test_matches_exhaustive_oracle(self, rng):
        for trial in range(300):
            n = int(rng.integers(2, 9))
            p = int(rng.integers(1, 4))
            k = int(rng.integers(2, 4))
            x = np.round(rng.normal(size=(n, p)), int(rng.integers(0, 3)))
            y = rng.integers(0, k, size=n).astype(np.int64)
            got = best_split(x, y, list(range(p)), n_classes=k)
            want = exhaustive_best_split(x, y, range(p), k)
            if want is None:
                assert got is None, trial
            else:
                assert got is not None, trial
                assert got[0] == want[0] and got[1] == want[1], (trial, got, want)
                assert got[2] == pytest.approx(want[2], abs=1e-12)


class TestGrowTree:
    def test_single_row_leaf(self):
        tree = grow_tree(np.array([[1.0, 2.0]]), np.array([3]), TreeParams(),
                         spawn(0, "t"), n_classes=5)
        assert tree.n_nodes == 1
        assert tree.predict(np.array([[9.0, 9.0]]))[0] == 3

    def test_separable_two_class_depth_one(self):
        x = np.array([[0.0], [1.0], [10.0], [11.0]])
        y = np.array([0, 0, 1, 1])
        tree = grow_tree(x, y, TreeParams(), spawn(0, "t"), n_classes=2)
        assert tree.n_nodes == 3
        assert np.array_equal(tree.predict(x), y)

    def test_deterministic_across_runs(self, rng):
        x = rng.normal(size=(8, 2))
        y = rng.integers(0, 3, size=8).astype(np.int64)
        t1 = grow_tree(x, y, TreeParams(mtry=1), spawn(7, "fix"), n_classes=3)
        t2 = grow_tree(x, y, TreeParams(mtry=1), spawn(7, "fix"), n_classes=3)
        assert np.array_equal(t1.feature, t2.feature)
        assert np.array_equal(t1.threshold, t2.threshold)
        assert np.array_equal(t1.class_counts, t2.class_counts)

    def test_max_depth_respected(self, rng):
        x = rng.normal(size=(64, 3))
        y = rng.integers(0, 2, size=64).astype(np.int64)
        tree = grow_tree(x, y, TreeParams(max_depth=2), spawn(0, "t"), n_classes=2)

        def depth(node, d=0):
            if tree.feature[node] < 0:
                return d
            return max(depth(tree.left[node], d + 1), depth(tree.right[node], d + 1))

        assert depth(0) <= 2

    def test_children_partition_parent(self, rng):
        x = rng.normal(size=(40, 3))
        y = rng.integers(0, 3, size=40).astype(np.int64)
        tree = grow_tree(x, y, TreeParams(), spawn(3, "t"), n_classes=3)
        for node in range(tree.n_nodes):
            if tree.feature[node] >= 0:
                left, right = tree.left[node], tree.right[node]
                assert tree.n_samples[node] == tree.n_samples[left] + tree.n_samples[right]
                assert np.array_equal(tree.class_counts[node],
                                      tree.class_counts[left] + tree.class_counts[right])
                assert tree.impurity_decrease[node] >= 0

    def test_positive_scaling_keeps_structure(self, rng):
        x = rng.normal(size=(30, 3))
        y = rng.integers(0, 3, size=30).astype(np.int64)
        t1 = grow_tree(x, y, TreeParams(mtry=2), spawn(11, "scale"), n_classes=3)
        x2 = x.copy()
        x2[:, 1] *= 37.5
        t2 = grow_tree(x2, y, TreeParams(mtry=2), spawn(11, "scale"), n_classes=3)
        assert np.array_equal(t1.feature, t2.feature)
        assert np.array_equal(t1.class_counts, t2.class_counts)
        assert np.array_equal(t1.leaf_ids(x), t2.leaf_ids(x2))


class TestRfTrain:
    def test_single_tree_fits_separable(self):
        x = np.concatenate([np.linspace(0, 1, 10), np.linspace(10, 11, 10)]).reshape(-1, 1)
        y = np.array([0] * 10 + [1] * 10)
        model = rf_train(x, y, RfParams(n_trees=1, seed=3), class_names=("a", "b"))
        pred, votes = model.predict_batch(x)
        assert np.array_equal(pred, y)
        assert votes.sum() == 20

    def test_bootstrap_unique_fraction(self):
        n = 10_000
        fractions = []
        for t in range(8):
            rng = spawn(5, "rf-tree", t)
            boot = rng.integers(0, n, size=n)
            fractions.append(len(np.unique(boot)) / n)
        assert np.mean(fractions) == pytest.approx(1 - 1 / np.e, abs=0.02)

    def test_thread_determinism(self, rng):
        x = rng.normal(size=(60, 4))
        y = rng.integers(0, 3, size=60).astype(np.int64)
        m1 = rf_train(x, y, RfParams(n_trees=12, seed=9, n_jobs=1), class_names=("a", "b", "c"))
        m2 = rf_train(x, y, RfParams(n_trees=12, seed=9, n_jobs=8), class_names=("a", "b", "c"))
        for t1, t2 in zip(m1.trees, m2.trees):
            assert np.array_equal(t1.feature, t2.feature)
            assert np.array_equal(t1.threshold, t2.threshold)
            assert np.array_equal(t1.class_counts, t2.class_counts)
        assert m1.oob_error == m2.oob_error

    def test_bad_params(self, rng):
        x = rng.normal(size=(10, 3))
        y = rng.integers(0, 2, size=10).astype(np.int64)
        with pytest.raises(BadParams):
            rf_train(x, y, RfParams(mtry=4), class_names=("a", "b"))
        with pytest.raises(BadParams):
            rf_train(x, y, RfParams(n_trees=0), class_names=("a", "b"))
        with pytest.raises(EmptyInput):
            rf_train(np.zeros((0, 3)), np.zeros(0, dtype=np.int64), RfParams())

    def test_oob_error_present_with_enough_trees(self, rng):
        x = rng.normal(size=(50, 3))
        y = (x[:, 0] > 0).astype(np.int64)
        model = rf_train(x, y, RfParams(n_trees=40, seed=1), class_names=("a", "b"))
        assert model.oob_error is not None
        assert 0.0 <= model.oob_error <= 1.0


class TestRfPredict:
    def test_majority_and_tie_break(self):
        x = np.array([[0.0], [1.0], [10.0], [11.0], [20.0], [21.0]])
        y = np.array([0, 0, 1, 1, 2, 2])
        model = rf_train(x, y, RfParams(n_trees=3, seed=1), class_names=("a", "b", "c"))
        cls, votes = rf_predict(model, np.array([0.5]))
        assert votes.sum() == 3
        assert cls == int(np.argmax(votes))

    def test_matches_independent_tree_walk(self, rng):
        x = rng.normal(size=(50, 4))
        y = rng.integers(0, 3, size=50).astype(np.int64)
        model = rf_train(x, y, RfParams(n_trees=15, seed=2), class_names=("a", "b", "c"))
        pred, votes = model.predict_batch(x)

        def walk(tree, row):
            node = 0
            while tree.feature[node] >= 0:
                node = tree.left[node] if row[tree.feature[node]] <= tree.threshold[node] \
                    else tree.right[node]
            return int(np.argmax(tree.class_counts[node]))

        for i in range(50):
            tally = np.zeros(3, dtype=int)
            for tree in model.trees:
                tally[walk(tree, x[i])] += 1
            assert np.array_equal(tally, votes[i])
            assert pred[i] == int(np.argmax(tally))


class TestImportance:
    def test_unused_feature_scores_zero(self, rng):
        x = np.column_stack([rng.normal(size=40), np.linspace(0, 1, 40)])
        y = (x[:, 1] > 0.5).astype(np.int64)
        model = rf_train(x, y, RfParams(n_trees=10, seed=4, mtry=2),
                         feature_names=["noise", "signal"], class_names=("a", "b"))
        report = rf_importance(model)
        scores = dict(report.scores)
        assert scores["signal"] > 0
        assert report.ranking()[0] == "signal"

    def test_single_split_model_holds_all_importance(self):
        x = np.concatenate([np.zeros(10), np.ones(10)]).reshape(-1, 1)
        y = np.array([0] * 10 + [1] * 10)
        model = rf_train(x, y, RfParams(n_trees=1, seed=3),
                         feature_names=["only"], class_names=("a", "b"))
        report = rf_importance(model)
        assert report.scores[0][0] == "only"
        assert report.scores[0][1] > 0

    def test_scores_equal_hand_summed_decreases(self, rng):
        x = rng.normal(size=(30, 3))
        y = rng.integers(0, 2, size=30).astype(np.int64)
        model = rf_train(x, y, RfParams(n_trees=2, seed=8, mtry=2),
                         feature_names=["f0", "f1", "f2"], class_names=("a", "b"))
        expected = np.zeros(3)
        for tree in model.trees:
            for node in range(tree.n_nodes):
                f = tree.feature[node]
                if f >= 0:
                    expected[f] += (tree.n_samples[node] / tree.n_samples[0]
                                    ) * tree.impurity_decrease[node]
        expected /= len(model.trees)
        got = dict(rf_importance(model).scores)
        for i, name in enumerate(["f0", "f1", "f2"]):
            assert got[name] == pytest.approx(expected[i], abs=1e-12)

    def test_mdi_nonnegative_and_sums(self, rng):
        x = rng.normal(size=(60, 4))
        y = rng.integers(0, 3, size=60).astype(np.int64)
        model = rf_train(x, y, RfParams(n_trees=5, seed=6), class_names=("a", "b", "c"))
        report = rf_importance(model)
        assert all(s >= 0 for _, s in report.scores)

    def test_permutation_constant_column_drops_zero(self, rng):
        x = np.column_stack([np.full(40, 3.0), rng.normal(size=40)])
        y = (x[:, 1] > 0).astype(np.int64)
        model = rf_train(x, y, RfParams(n_trees=10, seed=4, mtry=2),
                         feature_names=["const", "signal"], class_names=("a", "b"))
        report = permutation_importance(model, x, y, seed=0)
        assert dict(report.scores)["const"] == pytest.approx(0.0, abs=1e-12)

    def test_permutation_deterministic(self, rng):
        x = rng.normal(size=(40, 2))
        y = (x[:, 0] > 0).astype(np.int64)
        model = rf_train(x, y, RfParams(n_trees=5, seed=4), class_names=("a", "b"))
        r1 = permutation_importance(model, x, y, seed=3)
        r2 = permutation_importance(model, x, y, seed=3)
        assert r1.scores == r2.scores

    def test_permutation_sole_informative_feature(self, rng):
        x = rng.normal(size=(200, 1))
        y = (x[:, 0] > 0).astype(np.int64)
        model = rf_train(x, y, RfParams(n_trees=20, seed=4), class_names=("a", "b"))
        report = permutation_importance(model, x, y, seed=1)
        drop = dict(report.scores)["f0"]
        chance = max(np.mean(y == 0), np.mean(y == 1))
        base = np.mean(model.predict_batch(x)[0] == y)
        assert drop == pytest.approx(base - 0.5, abs=0.12)
        assert drop > 0.25
