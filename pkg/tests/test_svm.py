import numpy as np
import pytest

from agrorec.errors import ArityMismatch, SingleClass
from agrorec.svm import (
    KernelSpec,
    SvmParams,
    dual_objective,
    gram_matrix,
    kernel_eval,
    kkt_residuals,
    smo_train_binary,
    svm_predict,
    svm_train_multiclass,
)


def blobs(rng, n_per=10, spread=0.4, centers=((-2.0, -2.0), (2.0, 2.0))):
    xs, ys = [], []
    for label, center in zip((-1.0, 1.0), centers):
        xs.append(rng.normal(scale=spread, size=(n_per, 2)) + center)
        ys.append(np.full(n_per, label))
    return np.vstack(xs), np.concatenate(ys)


class TestKernelEval:
    def test_rbf_self_is_one(self):
        spec = KernelSpec("rbf", 0.7)
        assert kernel_eval(spec, [1.0, 2.0], [1.0, 2.0]) == pytest.approx(1.0, abs=1e-15)

    def test_linear_dot(self):
        assert kernel_eval(KernelSpec("linear"), [1.0, 2.0], [3.0, 4.0]) == 11.0

    def test_rbf_hand_value(self):
        spec = KernelSpec("rbf", 0.5)
        got = kernel_eval(spec, [0.0, 0.0], [2.0, 0.0])
        assert got == pytest.approx(np.exp(-2.0), abs=1e-12)

    def test_arity_mismatch(self):
        with pytest.raises(ArityMismatch):
            kernel_eval(KernelSpec("linear"), [1.0], [1.0, 2.0])

    def test_gram_matches_pairwise(self, rng):
        a = rng.normal(size=(6, 3))
        spec = KernelSpec("rbf", 0.3)
        gram = gram_matrix(spec, a, a)
        for i in range(6):
            for j in range(6):
                assert gram[i, j] == pytest.approx(kernel_eval(spec, a[i], a[j]), abs=1e-12)


class TestSmoBinary:
    def test_two_point_analytic(self):
        x = np.array([[-1.0], [1.0]])
        y = np.array([-1.0, 1.0])
        res = smo_train_binary(x, y, c=10.0, kernel=KernelSpec("linear"), tol=1e-6)
        assert res.alpha == pytest.approx([0.5, 0.5], abs=1e-6)
        assert res.bias == pytest.approx(0.0, abs=1e-6)
        # decision f(t) = t
        gram_row = np.array([-2.0, 2.0])  # K(x_i, 2.0) for x_i = -1, 1
        f = gram_row @ (res.alpha * y) + res.bias
        assert f == pytest.approx(2.0, abs=1e-6)

    def test_duplicated_point_both_labels_hits_bound(self):
        # tiny-QP oracle: with K constant, objective = a1 + a2 on the line
        # a1 = a2, so both multipliers sit at the bound C
        c = 0.25
        x = np.array([[1.0, 1.0], [1.0, 1.0]])
        y = np.array([1.0, -1.0])
        grid = np.linspace(0, c, 101)
        gram = gram_matrix(KernelSpec("linear"), x, x)
        best = max(grid, key=lambda a: dual_objective(np.array([a, a]), y, gram))
        assert best == pytest.approx(c)
        res = smo_train_binary(x, y, c=c, kernel=KernelSpec("linear"), tol=1e-6)
        assert res.alpha == pytest.approx([c, c], abs=1e-9)

    def test_separable_blobs_rbf(self, rng):
        x, y = blobs(rng)
        res = smo_train_binary(x, y, c=1.0, kernel=KernelSpec("rbf", 0.5), tol=1e-3)
        assert res.converged
        pred = np.sign(gram_matrix(KernelSpec("rbf", 0.5), x, x) @ (res.alpha * y) + res.bias)
        assert np.array_equal(pred, y)
        residuals = kkt_residuals(res.alpha, y, res.f_values, res.bias, c=1.0)
        assert residuals.max() < 1e-3

    def test_constraints_and_objective_monotone(self, rng):
        for trial in range(10):
            x = rng.normal(size=(14, 3))
            y = np.where(rng.random(14) < 0.5, -1.0, 1.0)
            if len(set(y)) < 2:
                y[0] = -y[0]
            res = smo_train_binary(x, y, c=1.0, kernel=KernelSpec("linear"), tol=1e-3,
                                   track_objective=True)
            assert abs(np.sum(res.alpha * y)) < 1e-6
            assert (res.alpha >= -1e-12).all() and (res.alpha <= 1.0 + 1e-12).all()
            hist = res.objective_history
            if hist.size > 1:
                diffs = np.diff(hist)
                assert diffs.min() > -1e-8 * max(1.0, np.abs(hist).max())

    def test_single_class_raises(self):
        with pytest.raises(SingleClass):
            smo_train_binary(np.ones((3, 1)), np.ones(3), kernel=KernelSpec("linear"))

    def test_nonconvergence_flagged(self, rng):
        x, y = blobs(rng, n_per=15, spread=3.0)  # heavy overlap
        res = smo_train_binary(x, y, c=100.0, kernel=KernelSpec("linear"),
                               tol=1e-9, max_passes=1)
        assert not res.converged


class TestSvmMulticlass:
    def _multi(self, rng, k=3, n_per=8, spread=0.3):
        centers = [(3.0 * np.cos(2 * np.pi * i / k), 3.0 * np.sin(2 * np.pi * i / k))
                   for i in range(k)]
        xs, ys = [], []
        for i, center in enumerate(centers):
            xs.append(rng.normal(scale=spread, size=(n_per, 2)) + center)
            ys.append(np.full(n_per, i, dtype=np.int64))
        return np.vstack(xs), np.concatenate(ys)

    def test_three_classes_three_machines(self, rng):
        x, y = self._multi(rng, k=3)
        model = svm_train_multiclass(x, y, SvmParams(kernel="linear"),
                                     class_names=("a", "b", "c"))
        assert set(model.machines) == {(0, 1), (0, 2), (1, 2)}
        assert model.omitted_pairs == []

    def test_nineteen_classes_all_pairs(self, rng):
        x, y = self._multi(rng, k=19, n_per=3, spread=0.05)
        model = svm_train_multiclass(x, y, SvmParams(kernel="linear", max_passes=50))
        assert len(model.machines) == 171

    def test_missing_class_pairs_omitted(self, rng):
        x, y = self._multi(rng, k=3)
        names = ("a", "b", "c", "ghost")
        model = svm_train_multiclass(x, y, SvmParams(kernel="linear"), class_names=names)
        assert len(model.machines) == 3
        assert set(model.omitted_pairs) == {(0, 3), (1, 3), (2, 3)}

    def test_single_class_raises(self):
        with pytest.raises(SingleClass):
            svm_train_multiclass(np.ones((4, 2)), np.zeros(4, dtype=np.int64),
                                 SvmParams(), class_names=("a", "b"))

    def test_two_class_prediction_is_sign(self, rng):
        x, yb = blobs(rng)
        y = (yb > 0).astype(np.int64)
        model = svm_train_multiclass(x, y, SvmParams(kernel="rbf", gamma=0.5),
                                     class_names=("neg", "pos"))
        machine = model.machines[(0, 1)]
        pred, _ = model.predict_batch(x)
        f = machine.decision(x)
        # decision > 0 votes class 0 by convention (positive label = lower index)
        assert np.array_equal(pred, np.where(f > 0, 0, 1))
        assert np.mean(pred == y) == 1.0

    def test_predictions_match_pairwise_reevaluation(self, rng):
        x, y = self._multi(rng, k=3, n_per=10)
        model = svm_train_multiclass(x, y, SvmParams(kernel="rbf", gamma=0.4),
                                     class_names=("a", "b", "c"))
        pred, votes = model.predict_batch(x)
        for i in range(x.shape[0]):
            tally = np.zeros(3, dtype=int)
            strength = np.zeros(3)
            for (a, b), machine in model.machines.items():
                f = float((gram_matrix(machine.kernel, x[i:i + 1], machine.support_vectors)
                           @ machine.alpha_y)[0] + machine.bias)
                winner = a if f > 0 else b
                tally[winner] += 1
                strength[winner] += abs(f)
            assert np.array_equal(tally, votes[i])
            best = np.flatnonzero(tally == tally.max())
            expect = best[np.argmax(strength[best])]
            assert pred[i] == expect

    def test_alpha_bounds_per_machine(self, rng):
        x, y = self._multi(rng, k=3)
        params = SvmParams(kernel="linear", c=0.7)
        model = svm_train_multiclass(x, y, params, class_names=("a", "b", "c"))
        for machine in model.machines.values():
            assert np.all(np.abs(machine.alpha_y) <= 0.7 + 1e-9)
            assert abs(machine.alpha_y.sum()) < 1e-6

    def test_pair_jobs_deterministic(self, rng):
        x, y = self._multi(rng, k=4, n_per=6)
        m1 = svm_train_multiclass(x, y, SvmParams(kernel="linear", n_jobs=1),
                                  class_names=("a", "b", "c", "d"))
        m2 = svm_train_multiclass(x, y, SvmParams(kernel="linear", n_jobs=4),
                                  class_names=("a", "b", "c", "d"))
        for pair in m1.machines:
            a, b = m1.machines[pair], m2.machines[pair]
            assert np.array_equal(a.alpha_y, b.alpha_y)
            assert a.bias == b.bias

    def test_svm_predict_wrapper(self, rng):
        x, y = self._multi(rng, k=3)
        model = svm_train_multiclass(x, y, SvmParams(kernel="linear"),
                                     class_names=("a", "b", "c"))
        cls, votes = svm_predict(model, x[0])
        assert votes.sum() == 3
        with pytest.raises(ArityMismatch):
            svm_predict(model, np.ones(5))
