"""Deterministic epoch shuffling and mini-batch slicing.

The batch order of an epoch is a pure function of (seed, epoch): every epoch
reshuffles with its own PRNG stream, the final partial batch is kept, and the
concatenation of one epoch's batches is a permutation of the dataset.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .manifest import BATCH_STREAM

__all__ = ["epoch_permutation", "epoch_batches", "iter_array_batches"]


def epoch_permutation(n: int, seed: int, epoch: int) -> np.ndarray:
    """Permutation of range(n) used for the given epoch."""
    rng = np.random.default_rng([seed, BATCH_STREAM, epoch])
    return rng.permutation(n)


def epoch_batches(n: int, batch_size: int, seed: int, epoch: int) -> list[np.ndarray]:
    """Index batches for one epoch; the last batch may be smaller."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    perm = epoch_permutation(n, seed, epoch)
    return [perm[i : i + batch_size] for i in range(0, n, batch_size)]


def iter_array_batches(
    X: np.ndarray,
    y: np.ndarray,
    batch_size: int,
    seed: int,
    epoch: int,
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield shuffled (X_batch, y_batch) pairs covering (X, y) exactly once."""
    if len(X) != len(y):
        raise ValueError(f"X and y disagree on sample count: {len(X)} vs {len(y)}")
    for idx in epoch_batches(len(X), batch_size, seed, epoch):
        yield X[idx], y[idx]
