"""Synthetic two-class blob images for tests, demos and CI.

Class ``bright`` carries a Gaussian bump above the background intensity,
class ``dark`` one below it, so the classes are separable by mean intensity
and a small network learns them within a few epochs.  Images can be produced
as in-memory arrays or written out as grayscale PNGs in the two-subdirectory
layout the ingestion code expects.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

__all__ = ["make_blob_arrays", "write_blob_dataset"]

CLASS_NAMES = ("bright", "dark")


def _render(rng: np.random.Generator, side: int, direction: float) -> np.ndarray:
    background = 0.5 + rng.uniform(-0.04, 0.04)
    cy, cx = rng.uniform(0.25 * side, 0.75 * side, size=2)
    radius = rng.uniform(0.15 * side, 0.3 * side)
    yy, xx = np.mgrid[0:side, 0:side]
    bump = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * radius**2))
    img = background + direction * 0.35 * bump
    img += rng.normal(0.0, 0.02, size=(side, side))
    return np.clip(img, 0.0, 1.0)


def make_blob_arrays(
    n_per_class: int = 100,
    side: int = 32,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Return (X, y, source_ids) with X of shape (2*n, 3, side, side) in [0, 1].

    Labels are class indices: 0 = bright, 1 = dark (lexicographic order of the
    class names, matching directory ingestion).
    """
    rng = np.random.default_rng(seed)
    images, labels, ids = [], [], []
    for label, name in enumerate(CLASS_NAMES):
        direction = 1.0 if name == "bright" else -1.0
        for i in range(n_per_class):
            plane = _render(rng, side, direction)
            images.append(np.repeat(plane[None, :, :], 3, axis=0))
            labels.append(label)
            ids.append(f"{name}/img_{i:04d}.png")
    X = np.stack(images).astype(np.float32)
    y = np.array(labels, dtype=np.int64)
    return X, y, ids


def write_blob_dataset(root: str | Path, n_per_class: int = 100, side: int = 32, seed: int = 0) -> Path:
    """Write the blob dataset as grayscale PNGs under ``root/<class>/``."""
    root = Path(root)
    X, y, ids = make_blob_arrays(n_per_class=n_per_class, side=side, seed=seed)
    for pixels, sid in zip(X, ids):
        path = root / sid
        path.parent.mkdir(parents=True, exist_ok=True)
        plane = np.round(pixels[0] * 255.0).astype(np.uint8)
        Image.fromarray(plane, mode="L").save(path)
    return root


def main(argv=None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description="Generate the synthetic blob image dataset.")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--n-per-class", type=int, default=100)
    parser.add_argument("--side", type=int, default=32)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    root = write_blob_dataset(args.out, args.n_per_class, args.side, args.seed)
    print(f"wrote {2 * args.n_per_class} images under {root}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
