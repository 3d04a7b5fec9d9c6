"""Linear and RBF kernels plus Gram matrix construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["KernelSpec", "kernel_eval", "kernel_matrix", "gram_matrix"]


@dataclass(frozen=True)
class KernelSpec:
    """Kernel selection: ``linear`` -> <x, z>, ``rbf`` -> exp(-gamma ||x - z||^2)."""

    kind: str = "rbf"
    gamma: float = 0.001

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"kernel kind must be 'linear' or 'rbf', got {self.kind!r}")
        if self.kind == "rbf" and not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"rbf gamma must be finite and positive, got {self.gamma}")


def kernel_eval(spec: KernelSpec, x: np.ndarray, z: np.ndarray) -> float:
    """Kernel value for a single pair of vectors."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape or x.ndim != 1:
        raise ValueError(f"kernel arguments must be equal-length vectors, got {x.shape} and {z.shape}")
    if spec.kind == "linear":
        return float(x @ z)
    diff = x - z
    return float(np.exp(-spec.gamma * (diff @ diff)))


def kernel_matrix(spec: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Cross-kernel matrix K[i, j] = k(A[i], B[j])."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise ValueError(f"incompatible shapes for kernel matrix: {A.shape} and {B.shape}")
    if spec.kind == "linear":
        return A @ B.T
    sq_a = np.einsum("ij,ij->i", A, A)
    sq_b = np.einsum("ij,ij->i", B, B)
    dist2 = sq_a[:, None] + sq_b[None, :] - 2.0 * (A @ B.T)
    np.maximum(dist2, 0.0, out=dist2)
    return np.exp(-spec.gamma * dist2)


def gram_matrix(spec: KernelSpec, X: np.ndarray) -> np.ndarray:
    """Symmetric kernel matrix of a sample set against itself.

    RBF diagonals are pinned to exactly 1 and the matrix is symmetrized to
    remove float round-off from the two half-computations.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"gram_matrix needs a non-empty 2-D sample array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("gram_matrix input contains non-finite values")
    K = kernel_matrix(spec, X, X)
    K = 0.5 * (K + K.T)
    if spec.kind == "rbf":
        np.fill_diagonal(K, 1.0)
    return K
