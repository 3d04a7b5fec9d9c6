"""Input validation helpers shared by the estimators and the file formats."""

from __future__ import annotations

import numpy as np

__all__ = [
    "check_feature_matrix",
    "check_signed_labels",
    "check_image_batch",
    "check_is_fitted",
]


def check_feature_matrix(X, *, name: str = "X", dtype=np.float64) -> np.ndarray:
    """Coerce ``X`` to a finite 2-D float array of shape (n_samples, n_features)."""
    X = np.asarray(X, dtype=dtype)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D (n_samples, n_features), got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_signed_labels(y, n_samples: int | None = None, *, name: str = "y") -> np.ndarray:
    """Coerce ``y`` to a 1-D int array with entries in {-1, +1}."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {y.shape}")
    if n_samples is not None and y.shape[0] != n_samples:
        raise ValueError(f"{name} has {y.shape[0]} entries, expected {n_samples}")
    out = y.astype(np.int64, copy=True)
    if not np.array_equal(out, y):
        raise ValueError(f"{name} must be integer-valued")
    bad = np.setdiff1d(np.unique(out), [-1, 1])
    if bad.size:
        raise ValueError(f"{name} must contain only -1 and +1, found {bad.tolist()}")
    return out


def check_image_batch(X, side: int | None = None, *, name: str = "X") -> np.ndarray:
    """Validate a batch of images shaped (n, 3, side, side) with finite values."""
    X = np.asarray(X)
    if X.ndim != 4 or X.shape[1] != 3:
        raise ValueError(f"{name} must have shape (n, 3, side, side), got {X.shape}")
    if X.shape[2] != X.shape[3]:
        raise ValueError(f"{name} must be square, got spatial shape {X.shape[2:]}")
    if side is not None and X.shape[2] != side:
        raise ValueError(f"{name} spatial side is {X.shape[2]}, expected {side}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_is_fitted(estimator, attribute: str) -> None:
    """Raise if ``estimator`` lacks the given fitted attribute."""
    if getattr(estimator, attribute, None) is None:
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted; call fit() before using it"
        )
