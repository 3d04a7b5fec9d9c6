"""Trained SVM models: fitting via SMO, prediction, hinge loss, file I/O.

Hard-margin training is realized as the large-C limit of the soft-margin
problem (C_eff = 1e6), which stays well-posed when the data is not perfectly
separable.  Model files use the ``HSVM`` little-endian binary layout
described in :func:`save_svm`.
"""

from __future__ import annotations

import os
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..validation import check_feature_matrix, check_signed_labels
from .kernels import KernelSpec, gram_matrix, kernel_matrix
from .smo import solve_dual

__all__ = [
    "HARD_MARGIN_C",
    "DegenerateMarginWarning",
    "SvmConvergenceWarning",
    "SvmTrainConfig",
    "SvmModel",
    "train_svm",
    "save_svm",
    "load_svm",
]

HARD_MARGIN_C = 1e6
_GRAM_LIMIT = 8192
_PRUNE_EPS = 1e-14

MAGIC = b"HSVM"
VERSION = 1


class DegenerateMarginWarning(UserWarning):
    """No free support vectors: every multiplier sits on a box bound, so the
    decision surface is determined by the bias interval rather than exact
    margin conditions (typical when C is very small)."""


class SvmConvergenceWarning(UserWarning):
    """The SMO iteration guard tripped before the KKT conditions held."""


class SvmFormatError(ValueError):
    """The model file is malformed, truncated or has the wrong magic."""


@dataclass(frozen=True)
class SvmTrainConfig:
    C: float = 0.001
    margin: str = "soft"
    kkt_tolerance: float = 1e-3
    max_passes: int = 10
    max_iterations: int = 100_000
    standardize: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.C) and self.C > 0):
            raise ValueError(f"C must be finite and positive, got {self.C}")
        if self.margin not in ("soft", "hard"):
            raise ValueError(f"margin must be 'soft' or 'hard', got {self.margin!r}")
        if self.kkt_tolerance <= 0:
            raise ValueError(f"kkt_tolerance must be positive, got {self.kkt_tolerance}")

    @property
    def effective_C(self) -> float:
        return HARD_MARGIN_C if self.margin == "hard" else self.C


@dataclass
class SvmModel:
    """Kernel expansion f(x) = sum_i alpha_i y_i K(sv_i, x) + bias."""

    support_vectors: np.ndarray
    alphas: np.ndarray
    sv_labels: np.ndarray
    bias: float
    kernel: KernelSpec
    train_C: float
    margin: str = "soft"
    feature_mean: np.ndarray | None = None
    feature_scale: np.ndarray | None = None
    converged: bool = field(default=True, compare=False)
    iterations: int = field(default=0, compare=False)

    @property
    def n_support(self) -> int:
        return self.support_vectors.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.support_vectors.shape[1]

    def _prepare(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        one = X.ndim == 1
        if one:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.feature_dim:
            raise ValueError(
                f"expected feature dimension {self.feature_dim}, got input shape {X.shape}"
            )
        if self.feature_mean is not None:
            X = (X - self.feature_mean) / self.feature_scale
        return X

    def decision_function(self, X: np.ndarray) -> np.ndarray | float:
        """Signed decision values; a 1-D input yields a scalar."""
        one = np.asarray(X).ndim == 1
        Xp = self._prepare(X)
        K = kernel_matrix(self.kernel, Xp, self.support_vectors)
        f = K @ (self.alphas * self.sv_labels) + self.bias
        return float(f[0]) if one else f

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Labels in {-1, +1}; the boundary f(x) = 0 maps to +1."""
        f = np.atleast_1d(self.decision_function(X))
        return np.where(f >= 0.0, 1, -1).astype(np.int64)

    def hinge_loss(self, X: np.ndarray, y: np.ndarray) -> float:
        """Mean of max(0, 1 - y * f(x)) over the given samples."""
        f = np.atleast_1d(self.decision_function(X))
        y = check_signed_labels(y, len(f))
        return float(np.maximum(0.0, 1.0 - y * f).mean())


def train_svm(X: np.ndarray, y: np.ndarray, kernel: KernelSpec, tc: SvmTrainConfig | None = None) -> SvmModel:
    """Fit via SMO; returns the pruned support-vector expansion.

    Raises on single-class or non-finite input.  Non-convergence within the
    iteration guard produces a usable model flagged ``converged=False`` plus
    an :class:`SvmConvergenceWarning`.
    """
    tc = tc or SvmTrainConfig()
    X = check_feature_matrix(X)
    y = check_signed_labels(y, X.shape[0])
    if X.shape[0] < 2:
        raise ValueError("need at least 2 training samples")
    if np.unique(y).size < 2:
        raise ValueError("training data contains a single class")

    mean = scale = None
    if tc.standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale < 1e-12] = 1.0
        X = (X - mean) / scale

    C_eff = tc.effective_C
    n = X.shape[0]
    if n <= _GRAM_LIMIT:
        K = gram_matrix(kernel, X)
        result = solve_dual(
            K, y, C_eff, tol=tc.kkt_tolerance, max_passes=tc.max_passes, max_iter=tc.max_iterations
        )
    else:
        def row(i: int) -> np.ndarray:
            return kernel_matrix(kernel, X[i : i + 1], X)[0]

        result = solve_dual(
            row, y, C_eff, tol=tc.kkt_tolerance, max_passes=tc.max_passes,
            max_iter=tc.max_iterations, n=n,
        )

    balance = abs(float(result.alpha @ y))
    if balance > 1e-6:
        raise RuntimeError(f"dual feasibility lost: |sum(alpha_i y_i)| = {balance:.3e}")

    if not result.converged:
        warnings.warn(
            f"SMO did not converge within {result.iterations} updates "
            f"({result.sweeps} sweeps); returning the best iterate",
            SvmConvergenceWarning,
            stacklevel=2,
        )

    keep = result.alpha > _PRUNE_EPS
    if not np.any(keep):
        raise RuntimeError("training produced no support vectors; the data may be degenerate")
    if not np.any(np.logical_and(keep, result.alpha < C_eff)):
        warnings.warn(
            "degenerate margin: no free support vectors (all multipliers on a "
            "box bound); consider a larger C",
            DegenerateMarginWarning,
            stacklevel=2,
        )

    return SvmModel(
        support_vectors=np.ascontiguousarray(X[keep]),
        alphas=np.ascontiguousarray(result.alpha[keep]),
        sv_labels=np.ascontiguousarray(y[keep]),
        bias=float(result.bias),
        kernel=kernel,
        train_C=tc.C,
        margin=tc.margin,
        feature_mean=mean,
        feature_scale=scale,
        converged=result.converged,
        iterations=result.iterations,
    )


_KIND_CODES = {"linear": 0, "rbf": 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}
_MARGIN_CODES = {"soft": 0, "hard": 1}
_MARGIN_NAMES = {v: k for k, v in _MARGIN_CODES.items()}


def save_svm(model: SvmModel, path: str | Path) -> None:
    """Write the model atomically.

    Little-endian layout: magic ``HSVM``, version u32, kernel kind u8,
    gamma f64, margin u8, C f64, bias f64, m u64, d u64, standardize-flag u8,
    then sv_labels int8[m], alphas f64[m], support vectors f64[m*d] row-major,
    and, when standardization is stored, mean f64[d] + scale f64[d].
    """
    parts = [
        MAGIC,
        struct.pack("<I", VERSION),
        struct.pack("<B", _KIND_CODES[model.kernel.kind]),
        struct.pack("<d", model.kernel.gamma),
        struct.pack("<B", _MARGIN_CODES[model.margin]),
        struct.pack("<d", model.train_C),
        struct.pack("<d", model.bias),
        struct.pack("<QQ", model.n_support, model.feature_dim),
        struct.pack("<B", 1 if model.feature_mean is not None else 0),
        model.sv_labels.astype("<i1").tobytes(),
        model.alphas.astype("<f8").tobytes(),
        np.ascontiguousarray(model.support_vectors, dtype="<f8").tobytes(),
    ]
    if model.feature_mean is not None:
        parts.append(model.feature_mean.astype("<f8").tobytes())
        parts.append(model.feature_scale.astype("<f8").tobytes())

    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(b"".join(parts))
    os.replace(tmp, path)


def load_svm(path: str | Path) -> SvmModel:
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise SvmFormatError(f"not an SVM model file: {path}")
    pos = 4

    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > len(data):
            raise SvmFormatError(f"truncated SVM model file: {path}")
        out = data[pos : pos + n]
        pos += n
        return out

    version = struct.unpack("<I", take(4))[0]
    if version != VERSION:
        raise SvmFormatError(f"unsupported SVM model version {version}")
    kind = struct.unpack("<B", take(1))[0]
    gamma = struct.unpack("<d", take(8))[0]
    margin = struct.unpack("<B", take(1))[0]
    C = struct.unpack("<d", take(8))[0]
    bias = struct.unpack("<d", take(8))[0]
    m, d = struct.unpack("<QQ", take(16))
    standardized = struct.unpack("<B", take(1))[0]
    if kind not in _KIND_NAMES or margin not in _MARGIN_NAMES:
        raise SvmFormatError(f"invalid kernel/margin codes in {path}")
    if m < 1 or d < 1:
        raise SvmFormatError(f"invalid dimensions m={m}, d={d} in {path}")

    sv_labels = np.frombuffer(take(m), dtype="<i1").astype(np.int64)
    alphas = np.frombuffer(take(8 * m), dtype="<f8").copy()
    support = np.frombuffer(take(8 * m * d), dtype="<f8").reshape(m, d).copy()
    mean = scale = None
    if standardized:
        mean = np.frombuffer(take(8 * d), dtype="<f8").copy()
        scale = np.frombuffer(take(8 * d), dtype="<f8").copy()
    if pos != len(data):
        raise SvmFormatError(f"trailing bytes in SVM model file: {path}")

    kernel = KernelSpec(kind=_KIND_NAMES[kind], gamma=gamma if kind == 1 else 0.001)
    return SvmModel(
        support_vectors=support,
        alphas=alphas,
        sv_labels=sv_labels,
        bias=bias,
        kernel=kernel,
        train_C=C,
        margin=_MARGIN_NAMES[margin],
        feature_mean=mean,
        feature_scale=scale,
    )
