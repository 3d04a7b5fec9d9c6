"""Mini-batch SGD training with momentum and per-epoch history.

The update is the classical momentum form ``v <- mu * v + g``,
``w <- w - lr * v``, applied layer by layer in a fixed order so a fixed seed
reproduces the same final weights.  Training aborts with
:class:`TrainingDivergedError` the moment a batch loss stops being finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..data.batching import iter_array_batches
from .loss import softmax_cross_entropy
from .vgg import VggNet

__all__ = ["TrainConfig", "EpochStats", "TrainHistory", "TrainingDivergedError", "train_network", "evaluate_network"]


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite during training."""

    def __init__(self, epoch: int, batch: int, loss: float):
        super().__init__(f"non-finite loss {loss} at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    epochs: int = 200
    batch_size: int = 32
    momentum: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_accuracy: float
    train_loss: float
    test_accuracy: float
    test_loss: float


@dataclass
class TrainHistory:
    records: list[EpochStats] = field(default_factory=list)

    def append(self, stats: EpochStats) -> None:
        self.records.append(stats)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def to_csv(self, path: str | Path) -> None:
        lines = ["epoch,train_acc,train_loss,test_acc,test_loss"]
        for r in self.records:
            lines.append(
                f"{r.epoch},{r.train_accuracy:.6f},{r.train_loss:.6f},"
                f"{_fmt(r.test_accuracy)},{_fmt(r.test_loss)}"
            )
        Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def _fmt(value: float) -> str:
    return "" if np.isnan(value) else f"{value:.6f}"


def evaluate_network(net: VggNet, X: np.ndarray, y: np.ndarray, batch_size: int = 32) -> tuple[float, float]:
    """(accuracy, mean loss) of the network on a labeled array set."""
    correct = 0
    loss_sum = 0.0
    for lo in range(0, len(X), batch_size):
        xb = X[lo : lo + batch_size]
        yb = y[lo : lo + batch_size]
        logits = net.forward(xb)
        loss, _ = softmax_cross_entropy(logits, yb)
        loss_sum += loss * len(xb)
        correct += int((logits.argmax(axis=1) == yb).sum())
    return correct / len(X), loss_sum / len(X)


def train_network(
    net: VggNet,
    X_train: np.ndarray,
    y_train: np.ndarray,
    tc: TrainConfig,
    eval_set: tuple[np.ndarray, np.ndarray] | None = None,
    on_epoch=None,
) -> TrainHistory:
    """Train in place and return the per-epoch history.

    ``eval_set`` supplies the held-out (X, y) evaluated after every epoch;
    without it the test columns are recorded as NaN.  ``on_epoch`` is an
    optional callback receiving each :class:`EpochStats`.
    """
    params = net.parameters()
    velocities = [np.zeros_like(p) for p in params]
    history = TrainHistory()

    for epoch in range(tc.epochs):
        loss_sum = 0.0
        correct = 0
        for batch_idx, (xb, yb) in enumerate(
            iter_array_batches(X_train, y_train, tc.batch_size, tc.seed, epoch)
        ):
            logits = net.forward(xb)
            loss, grad_logits = softmax_cross_entropy(logits, yb)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, batch_idx, loss)
            net.backward(grad_logits)

            for p, v, g in zip(params, velocities, net.gradients()):
                v *= tc.momentum
                v += g
                p -= tc.learning_rate * v

            loss_sum += loss * len(xb)
            correct += int((logits.argmax(axis=1) == yb).sum())

        if eval_set is not None:
            test_acc, test_loss = evaluate_network(net, eval_set[0], eval_set[1], tc.batch_size)
        else:
            test_acc = test_loss = float("nan")

        stats = EpochStats(
            epoch=epoch,
            train_accuracy=correct / len(X_train),
            train_loss=loss_sum / len(X_train),
            test_accuracy=test_acc,
            test_loss=test_loss,
        )
        history.append(stats)
        if on_epoch is not None:
            on_epoch(stats)

    return history
