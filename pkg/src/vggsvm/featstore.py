"""Portable binary container for labeled feature sets.

Little-endian layout (see docs/feature-format.md for a hex walkthrough)::

    magic    4 bytes  'HFV1'
    n        u64      number of rows
    d        u64      feature dimension
    encoding i8       label encoding (1 = int8 labels in {-1, +1})
    checksum u32      CRC32 of the payload
    payload           labels int8[n], then vectors float32[n*d] row-major

Vectors are stored as float32 (downstream SVM math promotes to float64);
writes are atomic and byte-deterministic for identical inputs.
"""

from __future__ import annotations

import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .validation import check_signed_labels

__all__ = ["LabeledFeatureSet", "FeatureFormatError", "write_features", "read_features", "HEADER_SIZE"]

MAGIC = b"HFV1"
LABEL_ENCODING_INT8 = 1
HEADER_SIZE = 4 + 8 + 8 + 1 + 4


class FeatureFormatError(ValueError):
    """The feature file is unreadable: wrong magic, truncated or corrupted."""


@dataclass(frozen=True)
class LabeledFeatureSet:
    """Feature rows with {-1, +1} labels; the handoff between the two stages."""

    vectors: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float32)
        if vectors.ndim != 2 or vectors.shape[0] < 1 or vectors.shape[1] < 1:
            raise ValueError(f"vectors must be (n >= 1, d >= 1), got shape {vectors.shape}")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("feature vectors contain non-finite values")
        labels = check_signed_labels(self.labels, vectors.shape[0], name="labels")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.vectors.shape[1]


def write_features(features: LabeledFeatureSet, path: str | Path) -> None:
    """Serialize atomically; refuses sets that violate the invariants."""
    labels = features.labels.astype("<i1")
    vectors = np.ascontiguousarray(features.vectors, dtype="<f4")
    payload = labels.tobytes() + vectors.tobytes()
    header = MAGIC + struct.pack(
        "<QQbI", len(features), features.feature_dim, LABEL_ENCODING_INT8, zlib.crc32(payload)
    )

    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(header + payload)
    os.replace(tmp, path)


def read_features(path: str | Path) -> LabeledFeatureSet:
    """Load and validate a feature file, verifying the payload checksum."""
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise FeatureFormatError(f"not a feature file: {path}")
    if len(data) < HEADER_SIZE:
        raise FeatureFormatError(f"truncated header in {path}")

    n, d, encoding, checksum = struct.unpack("<QQbI", data[4:HEADER_SIZE])
    if encoding != LABEL_ENCODING_INT8:
        raise FeatureFormatError(f"unknown label encoding {encoding} in {path}")
    if n < 1 or d < 1:
        raise FeatureFormatError(f"invalid dimensions n={n}, d={d} in {path}")

    expected = n + 4 * n * d
    payload = data[HEADER_SIZE:]
    if len(payload) != expected:
        raise FeatureFormatError(
            f"truncated payload in {path}: expected {expected} bytes, found {len(payload)}"
        )
    if zlib.crc32(payload) != checksum:
        raise FeatureFormatError(f"checksum mismatch (corrupted payload) in {path}")

    labels = np.frombuffer(payload[:n], dtype="<i1").astype(np.int64)
    vectors = np.frombuffer(payload[n:], dtype="<f4").reshape(n, d).copy()
    return LabeledFeatureSet(vectors=vectors, labels=labels)
