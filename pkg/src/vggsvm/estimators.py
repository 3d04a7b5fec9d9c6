"""Scikit-learn style estimators for the two pipeline stages.

``VggClassifier`` trains the convolutional network on image batches and
doubles as a transformer whose output is the feature tap (the post-ReLU
activations of the first fully connected layer).  ``KernelSvm`` is the
second stage: an SMO-trained kernel machine over those feature vectors.
Both follow the fit/predict/get_params conventions, so they compose with
pipelines, ``clone`` and grid search.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from .nn.training import TrainConfig, train_network
from .nn.vgg import VggConfig, build_vgg
from .svm.kernels import KernelSpec
from .svm.model import SvmModel, SvmTrainConfig, train_svm
from .validation import check_feature_matrix, check_image_batch, check_is_fitted

__all__ = ["VggClassifier", "KernelSvm"]


def _binary_classes(y) -> tuple[np.ndarray, np.ndarray]:
    """Sorted pair of distinct labels and y encoded as indices {0, 1}."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"y must be 1-D, got shape {y.shape}")
    classes = np.unique(y)
    if classes.size != 2:
        raise ValueError(f"expected exactly 2 classes, got {classes.size}: {classes.tolist()}")
    return classes, np.searchsorted(classes, y).astype(np.int64)


class VggClassifier(ClassifierMixin, TransformerMixin, BaseEstimator):
    """VGG-family image classifier and feature extractor.

    Parameters mirror the training hyperparameters; ``channel_scale`` shrinks
    all convolution widths (and the derived fc widths) for desk-scale runs.
    Pass ``fc_widths`` to pin the head explicitly.

    Attributes set by fit: ``classes_``, ``net_``, ``config_``, ``history_``.
    """

    def __init__(
        self,
        variant: str = "vgg19",
        input_side: int = 224,
        channel_scale: float = 1.0,
        fc_widths: tuple | None = None,
        learning_rate: float = 0.001,
        epochs: int = 200,
        batch_size: int = 32,
        momentum: float = 0.9,
        seed: int = 0,
    ):
        self.variant = variant
        self.input_side = input_side
        self.channel_scale = channel_scale
        self.fc_widths = fc_widths
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.momentum = momentum
        self.seed = seed

    def _build_config(self) -> VggConfig:
        return VggConfig.from_variant(
            self.variant,
            input_side=self.input_side,
            channel_scale=self.channel_scale,
            fc_widths=self.fc_widths,
            num_classes=2,
        )

    def fit(self, X, y, eval_set: tuple | None = None):
        """Train from scratch on images X (n, 3, side, side) with 2-class y.

        ``eval_set`` is an optional held-out (X, y) pair evaluated after each
        epoch into ``history_``.
        """
        X = check_image_batch(X, self.input_side)
        self.classes_, y_idx = _binary_classes(y)
        if len(X) != len(y_idx):
            raise ValueError(f"X and y disagree on sample count: {len(X)} vs {len(y_idx)}")

        self.config_ = self._build_config()
        self.net_ = build_vgg(self.config_, seed=self.seed, dtype=np.float32)

        eval_arrays = None
        if eval_set is not None:
            X_ev = check_image_batch(eval_set[0], self.input_side).astype(np.float32, copy=False)
            _, y_ev = _binary_classes(eval_set[1])
            eval_arrays = (X_ev, y_ev)

        tc = TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            momentum=self.momentum,
            seed=self.seed,
        )
        self.history_ = train_network(
            self.net_, X.astype(np.float32, copy=False), y_idx, tc, eval_set=eval_arrays
        )
        return self

    def predict(self, X):
        check_is_fitted(self, "net_")
        X = check_image_batch(X, self.input_side).astype(np.float32, copy=False)
        out = np.empty(len(X), dtype=np.int64)
        for lo in range(0, len(X), self.batch_size):
            logits = self.net_.forward(X[lo : lo + self.batch_size])
            out[lo : lo + self.batch_size] = logits.argmax(axis=1)
        return self.classes_[out]

    def transform(self, X) -> np.ndarray:
        """Feature matrix (n, feature_dim); samples are processed one at a
        time, matching the extraction contract."""
        check_is_fitted(self, "net_")
        X = check_image_batch(X, self.input_side).astype(np.float32, copy=False)
        return np.stack([self.net_.features(sample) for sample in X])

    @property
    def feature_dim_(self) -> int:
        check_is_fitted(self, "net_")
        return self.config_.feature_dim


class KernelSvm(ClassifierMixin, BaseEstimator):
    """Binary kernel SVM trained with sequential minimal optimization.

    ``margin='hard'`` trains at the large-C limit (the box bound becomes 1e6
    and the ``C`` parameter is ignored).  ``standardize=True`` z-scores each
    feature with training statistics before the kernel.

    Attributes set by fit: ``classes_``, ``model_``.
    """

    def __init__(
        self,
        kernel: str = "rbf",
        gamma: float = 0.001,
        C: float = 0.001,
        margin: str = "soft",
        tol: float = 1e-3,
        max_passes: int = 10,
        max_iter: int = 100_000,
        standardize: bool = False,
    ):
        self.kernel = kernel
        self.gamma = gamma
        self.C = C
        self.margin = margin
        self.tol = tol
        self.max_passes = max_passes
        self.max_iter = max_iter
        self.standardize = standardize

    def fit(self, X, y):
        X = check_feature_matrix(X)
        self.classes_, y_idx = _binary_classes(y)
        y_pm = 2 * y_idx - 1

        spec = KernelSpec(kind=self.kernel, gamma=self.gamma)
        tc = SvmTrainConfig(
            C=self.C,
            margin=self.margin,
            kkt_tolerance=self.tol,
            max_passes=self.max_passes,
            max_iterations=self.max_iter,
            standardize=self.standardize,
        )
        self.model_ = train_svm(X, y_pm, spec, tc)
        return self

    @classmethod
    def from_model(cls, model: SvmModel, classes=(-1, 1)) -> "KernelSvm":
        """Wrap an already-trained (e.g. loaded) low-level model."""
        est = cls(
            kernel=model.kernel.kind,
            gamma=model.kernel.gamma,
            C=model.train_C,
            margin=model.margin,
            standardize=model.feature_mean is not None,
        )
        est.model_ = model
        est.classes_ = np.asarray(classes)
        return est

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        return np.atleast_1d(self.model_.decision_function(X))

    def predict(self, X):
        check_is_fitted(self, "model_")
        pm = self.model_.predict(X)
        return np.where(pm > 0, self.classes_[1], self.classes_[0])

    def hinge_loss(self, X, y) -> float:
        """Mean hinge loss with y given in the original class labels."""
        check_is_fitted(self, "model_")
        y = np.asarray(y)
        if not np.all(np.isin(y, self.classes_)):
            raise ValueError(f"y contains labels outside the fitted classes {self.classes_.tolist()}")
        y_pm = np.where(y == self.classes_[1], 1, -1)
        return self.model_.hinge_loss(X, y_pm)

    @property
    def support_vectors_(self) -> np.ndarray:
        check_is_fitted(self, "model_")
        return self.model_.support_vectors

    @property
    def dual_coef_(self) -> np.ndarray:
        check_is_fitted(self, "model_")
        return self.model_.alphas * self.model_.sv_labels

    @property
    def intercept_(self) -> float:
        check_is_fitted(self, "model_")
        return self.model_.bias

    @property
    def n_support_(self) -> int:
        check_is_fitted(self, "model_")
        return self.model_.n_support
