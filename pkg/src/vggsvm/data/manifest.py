"""Directory ingestion and deterministic stratified train/test splitting.

A dataset on disk is a directory with exactly two class subdirectories, each
holding PNG or JPEG files::

    root/
      glioma/    img001.png ...
      pituitary/ img001.png ...

Class indices follow the lexicographic order of the subdirectory names, and
manifest entries are sorted by their relative path so every scan of the same
tree produces the same manifest.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

__all__ = ["DatasetManifest", "SplitSpec", "scan_directory", "split_manifest", "write_manifest_csv"]

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}

# Stream tags keep the PRNG draws of unrelated components independent even
# when they share one user-facing seed.
SPLIT_STREAM = 1
BATCH_STREAM = 2
INIT_STREAM = 3


class DatasetLayoutError(ValueError):
    """The directory tree does not match the two-class layout contract."""


@dataclass(frozen=True)
class DatasetManifest:
    """Ordered list of (source_id, label) pairs plus the two class names."""

    entries: tuple[tuple[str, int], ...]
    class_names: tuple[str, str]
    root: str = ""

    def __post_init__(self):
        if len(self.class_names) != 2:
            raise DatasetLayoutError(f"need exactly 2 classes, got {len(self.class_names)}")
        for source_id, label in self.entries:
            if label not in (0, 1):
                raise DatasetLayoutError(f"label {label} of {source_id!r} does not index class_names")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def source_ids(self) -> tuple[str, ...]:
        return tuple(sid for sid, _ in self.entries)

    @property
    def labels(self) -> np.ndarray:
        return np.array([label for _, label in self.entries], dtype=np.int64)

    def class_counts(self) -> tuple[int, int]:
        labels = self.labels
        return int(np.sum(labels == 0)), int(np.sum(labels == 1))

    def paths(self) -> list[Path]:
        base = Path(self.root)
        return [base / sid for sid, _ in self.entries]


@dataclass(frozen=True)
class SplitSpec:
    """Stratified split parameters: train fraction and the shuffling seed."""

    train_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


def _is_decodable(path: Path) -> bool:
    try:
        with Image.open(path) as img:
            img.verify()
        return True
    except (UnidentifiedImageError, OSError, SyntaxError):
        return False


def scan_directory(root: str | Path, *, skip_bad: bool = False) -> DatasetManifest:
    """Scan a two-class image tree into a manifest.

    Files with non-image suffixes are ignored.  Image-suffixed files that fail
    to decode raise ``DatasetLayoutError`` naming the file, unless
    ``skip_bad`` is set, in which case they are dropped from the manifest.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetLayoutError(f"dataset root does not exist: {root}")

    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if len(class_dirs) != 2:
        raise DatasetLayoutError(
            f"need exactly 2 class subdirectories under {root}, found {len(class_dirs)}"
        )

    entries: list[tuple[str, int]] = []
    for label, class_dir in enumerate(class_dirs):
        n_kept = 0
        for path in sorted(class_dir.iterdir()):
            if not path.is_file() or path.suffix.lower() not in IMAGE_SUFFIXES:
                continue
            if not _is_decodable(path):
                if skip_bad:
                    continue
                raise DatasetLayoutError(f"undecodable image file: {path}")
            entries.append((path.relative_to(root).as_posix(), label))
            n_kept += 1
        if n_kept == 0:
            raise DatasetLayoutError(f"class directory has no decodable images: {class_dir}")

    entries.sort(key=lambda e: e[0])
    return DatasetManifest(
        entries=tuple(entries),
        class_names=(class_dirs[0].name, class_dirs[1].name),
        root=str(root),
    )


def split_manifest(manifest: DatasetManifest, spec: SplitSpec) -> tuple[DatasetManifest, DatasetManifest]:
    """Split per class: a seeded permutation sends the first
    floor(train_fraction * n_class) entries of each class to train, the rest
    to test.  The same (manifest, spec) always yields the same partition.
    """
    if len(manifest) == 0:
        raise ValueError("cannot split an empty manifest")

    train_entries: list[tuple[str, int]] = []
    test_entries: list[tuple[str, int]] = []
    for cls in (0, 1):
        cls_entries = [e for e in manifest.entries if e[1] == cls]
        n = len(cls_entries)
        if n < 2:
            raise ValueError(
                f"class {manifest.class_names[cls]!r} has {n} sample(s); "
                "need at least 2 to populate both split sides"
            )
        n_train = int(np.floor(spec.train_fraction * n))
        if n_train == 0:
            raise ValueError(
                f"train_fraction {spec.train_fraction} leaves class "
                f"{manifest.class_names[cls]!r} with an empty train side"
            )
        rng = np.random.default_rng([spec.seed, SPLIT_STREAM, cls])
        perm = rng.permutation(n)
        train_entries.extend(cls_entries[i] for i in perm[:n_train])
        test_entries.extend(cls_entries[i] for i in perm[n_train:])

    train_entries.sort(key=lambda e: e[0])
    test_entries.sort(key=lambda e: e[0])

    def make(ents):
        return DatasetManifest(tuple(ents), manifest.class_names, manifest.root)

    return make(train_entries), make(test_entries)


def write_manifest_csv(manifest: DatasetManifest, path: str | Path) -> None:
    """Export as UTF-8 CSV with header ``source_id,label`` and LF line endings."""
    lines = ["source_id,label"]
    lines.extend(f"{sid},{label}" for sid, label in manifest.entries)
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
