import warnings

import numpy as np
import pytest

from vggsvm.svm.kernels import KernelSpec, kernel_matrix
from vggsvm.svm.model import (
    HARD_MARGIN_C,
    DegenerateMarginWarning,
    SvmConvergenceWarning,
    SvmFormatError,
    SvmTrainConfig,
    load_svm,
    save_svm,
    train_svm,
)

XOR_X = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
XOR_Y = np.array([1, 1, -1, -1])


@pytest.fixture
def two_point_model():
    X = np.array([[1.0, 0.0], [-1.0, 0.0]])
    y = np.array([1, -1])
    return train_svm(X, y, KernelSpec("linear"), SvmTrainConfig(margin="hard"))


def test_two_point_decision_values(two_point_model):
    m = two_point_model
    assert m.decision_function(np.array([2.0, 0.0])) == pytest.approx(2.0, abs=1e-6)
    assert m.decision_function(np.array([0.0, 0.0])) == pytest.approx(0.0, abs=1e-6)
    assert m.predict(np.array([[5.0, 0.0]])).tolist() == [1]


def test_boundary_tie_break_is_positive(two_point_model):
    assert two_point_model.predict(np.array([[0.0, 0.0]])).tolist() == [1]


def test_xor_rbf_hard_separates():
    model = train_svm(XOR_X, XOR_Y, KernelSpec("rbf", gamma=1.0), SvmTrainConfig(margin="hard"))
    assert np.array_equal(model.predict(XOR_X), XOR_Y)
    assert model.n_support == 4


def test_xor_linear_worse_than_rbf():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = train_svm(
            XOR_X, XOR_Y, KernelSpec("linear"), SvmTrainConfig(margin="hard", max_iterations=2000)
        )
    accuracy = (model.predict(XOR_X) == XOR_Y).mean()
    assert accuracy <= 0.75


def test_box_collapse_warns_and_flattens_decision(rng):
    X = rng.standard_normal((20, 3))
    y = np.concatenate([np.ones(10), -np.ones(10)]).astype(int)
    with pytest.warns(DegenerateMarginWarning):
        model = train_svm(X, y, KernelSpec("linear"), SvmTrainConfig(C=1e-12))
    assert model.alphas.max() <= 1e-12
    f = model.decision_function(rng.standard_normal((50, 3)))
    assert np.abs(f - model.bias).max() < 1e-6


def test_nonconvergence_warns_but_returns_model():
    with pytest.warns(SvmConvergenceWarning):
        model = train_svm(
            XOR_X, XOR_Y, KernelSpec("linear"), SvmTrainConfig(margin="hard", max_iterations=500)
        )
    assert not model.converged
    assert model.iterations == 500


def test_single_class_and_nonfinite_rejected(rng):
    X = rng.standard_normal((4, 2))
    with pytest.raises(ValueError, match="single class"):
        train_svm(X, np.ones(4, dtype=int), KernelSpec("linear"))
    Xbad = X.copy()
    Xbad[0, 0] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        train_svm(Xbad, np.array([1, -1, 1, -1]), KernelSpec("linear"))


def test_free_sv_margin_within_tolerance(rng):
    X = rng.standard_normal((30, 4))
    w = rng.standard_normal(4)
    y = np.where(X @ w > 0, 1, -1)
    if np.unique(y).size < 2:
        y[0] = -y[0]
    tol = 1e-3
    model = train_svm(X, y, KernelSpec("rbf", gamma=0.5), SvmTrainConfig(C=1.0, kkt_tolerance=tol))
    free = (model.alphas > 1e-9) & (model.alphas < 1.0 - 1e-9)
    f = model.decision_function(model.support_vectors)
    for fx, label in zip(f[free], model.sv_labels[free]):
        assert abs(fx - label) <= tol * (1 + abs(label)) + 1e-9


def test_pruning_leaves_decision_unchanged(rng):
    X, y = _noisy(rng, 25, 3)
    model = train_svm(X, y, KernelSpec("rbf", gamma=0.8), SvmTrainConfig(C=1.0))
    assert model.alphas.min() > 0  # zero-alpha points pruned
    # Rebuild the decision from all training points with explicit zeros.
    from vggsvm.svm.smo import solve_dual
    from vggsvm.svm.kernels import gram_matrix

    K = gram_matrix(KernelSpec("rbf", gamma=0.8), X)
    result = solve_dual(K, y, 1.0)
    probes = rng.standard_normal((100, 3))
    Kp = kernel_matrix(KernelSpec("rbf", gamma=0.8), probes, X)
    full = Kp @ (result.alpha * y) + result.bias
    pruned = model.decision_function(probes)
    assert np.abs(full - pruned).max() < 1e-12


def test_positive_rescaling_preserves_order_and_labels(rng):
    X, y = _noisy(rng, 20, 3)
    model = train_svm(X, y, KernelSpec("rbf", gamma=1.0), SvmTrainConfig(C=1.0))
    probes = rng.standard_normal((40, 3))
    f = model.decision_function(probes)
    labels = model.predict(probes)

    scaled = type(model)(
        support_vectors=model.support_vectors,
        alphas=model.alphas * 7.5,
        sv_labels=model.sv_labels,
        bias=model.bias * 7.5,
        kernel=model.kernel,
        train_C=model.train_C,
        margin=model.margin,
    )
    f_scaled = scaled.decision_function(probes)
    assert np.array_equal(np.argsort(f), np.argsort(f_scaled))
    assert np.array_equal(labels, scaled.predict(probes))


def test_hinge_loss_hand_values(two_point_model):
    # y*f = {2, 0.5}  ->  mean(max(0, 1 - yf)) = mean(0, 0.5) = 0.25
    X = np.array([[2.0, 0.0], [0.5, 0.0]])
    y = np.array([1, 1])
    assert two_point_model.hinge_loss(X, y) == pytest.approx(0.25, abs=1e-9)
    # all points beyond the margin -> 0
    assert two_point_model.hinge_loss(np.array([[3.0, 0.0], [-2.0, 0.0]]), np.array([1, -1])) == 0.0
    # single boundary point with y=+1, f=0 -> 1
    assert two_point_model.hinge_loss(np.array([[0.0, 0.0]]), np.array([1])) == pytest.approx(1.0)


def test_hard_margin_effective_bound():
    assert SvmTrainConfig(margin="hard", C=0.001).effective_C == HARD_MARGIN_C
    assert SvmTrainConfig(margin="soft", C=0.25).effective_C == 0.25


def test_dimension_mismatch_rejected(two_point_model):
    with pytest.raises(ValueError, match="dimension"):
        two_point_model.decision_function(np.zeros((2, 5)))


def test_standardize_stores_and_applies_stats(rng):
    X = rng.standard_normal((30, 3)) * np.array([100.0, 1.0, 0.01]) + 5.0
    w = np.array([0.01, 1.0, 50.0])
    y = np.where((X - 5.0) @ w > 0, 1, -1)
    if np.unique(y).size < 2:
        y[0] = -y[0]
    model = train_svm(X, y, KernelSpec("rbf", gamma=0.5), SvmTrainConfig(C=10.0, standardize=True))
    assert model.feature_mean is not None
    acc = (model.predict(X) == y).mean()
    assert acc >= 0.9


def _noisy(rng, n, d):
    X = rng.standard_normal((n, d))
    w = rng.standard_normal(d)
    y = np.where(X @ w + 0.2 * rng.standard_normal(n) > 0, 1, -1)
    if np.unique(y).size < 2:
        y[0] = -y[0]
    return X, y


class TestModelFile:
    def _model(self, rng, **kwargs):
        X, y = _noisy(rng, 15, 4)
        return train_svm(X, y, KernelSpec("rbf", gamma=0.3), SvmTrainConfig(C=1.0, **kwargs))

    def test_roundtrip(self, tmp_path, rng):
        model = self._model(rng)
        path = tmp_path / "model.hsvm"
        save_svm(model, path)
        loaded = load_svm(path)
        assert np.array_equal(loaded.support_vectors, model.support_vectors)
        assert np.array_equal(loaded.alphas, model.alphas)
        assert np.array_equal(loaded.sv_labels, model.sv_labels)
        assert loaded.bias == model.bias
        assert loaded.kernel == model.kernel
        assert loaded.margin == model.margin
        assert loaded.train_C == model.train_C
        probes = rng.standard_normal((20, 4))
        assert np.array_equal(loaded.decision_function(probes), model.decision_function(probes))

    def test_roundtrip_with_standardization(self, tmp_path, rng):
        model = self._model(rng, standardize=True)
        path = tmp_path / "model.hsvm"
        save_svm(model, path)
        loaded = load_svm(path)
        assert np.array_equal(loaded.feature_mean, model.feature_mean)
        assert np.array_equal(loaded.feature_scale, model.feature_scale)
        probes = rng.standard_normal((10, 4))
        assert np.array_equal(loaded.decision_function(probes), model.decision_function(probes))

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.hsvm"
        path.write_bytes(b"XSVM" + b"\x00" * 50)
        with pytest.raises(SvmFormatError, match="not an SVM model"):
            load_svm(path)

    def test_truncation(self, tmp_path, rng):
        model = self._model(rng)
        path = tmp_path / "model.hsvm"
        save_svm(model, path)
        raw = path.read_bytes()
        path.write_bytes(raw[:-9])
        with pytest.raises(SvmFormatError, match="truncated"):
            load_svm(path)
