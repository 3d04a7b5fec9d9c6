"""Image decoding and preprocessing.

Every image becomes a (3, side, side) float array in [0, 1]: 8-bit files are
scaled by 1/255, grayscale planes are replicated across the three channels,
and geometry is adjusted with corner-aligned bilinear interpolation (output
corners sample the exact input corners, so resizing to the input's own size
is the identity).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

__all__ = ["ImageSample", "ImageDecodeError", "load_and_preprocess", "preprocess_array", "resize_bilinear"]


class ImageDecodeError(ValueError):
    """The file could not be decoded into a usable raster."""


@dataclass(frozen=True)
class ImageSample:
    """One preprocessed image: (3, side, side) pixels in [0, 1] plus its label."""

    pixels: np.ndarray
    label: int
    source_id: str


def _axis_coords(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Corner-aligned source coordinates for one axis: floor index, ceil index
    and the fractional weight of the ceil sample."""
    if n_in == 1 or n_out == 1:
        src = np.zeros(n_out)
    else:
        src = np.arange(n_out) * ((n_in - 1) / (n_out - 1))
    lo = np.floor(src).astype(np.intp)
    lo = np.minimum(lo, n_in - 1)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = src - lo
    return lo, hi, frac


def resize_bilinear(plane: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resize a 2-D plane (or a stack of planes on the leading axes) with
    separable corner-aligned bilinear interpolation."""
    if plane.shape[-1] == 0 or plane.shape[-2] == 0:
        raise ValueError("cannot resize a zero-area image")
    if out_h < 1 or out_w < 1:
        raise ValueError("output size must be positive")

    h_lo, h_hi, h_frac = _axis_coords(plane.shape[-2], out_h)
    w_lo, w_hi, w_frac = _axis_coords(plane.shape[-1], out_w)

    rows = (
        plane[..., h_lo, :] * (1.0 - h_frac)[:, None]
        + plane[..., h_hi, :] * h_frac[:, None]
    )
    return rows[..., :, w_lo] * (1.0 - w_frac) + rows[..., :, w_hi] * w_frac


def preprocess_array(pixels: np.ndarray, side: int = 224) -> np.ndarray:
    """Normalize an already-decoded raster to the (3, side, side) contract.

    Accepts (H, W) grayscale or (C, H, W) with C in {1, 3}; values must
    already be in [0, 1].  Idempotent on conforming inputs.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim == 2:
        pixels = pixels[None, :, :]
    if pixels.ndim != 3 or pixels.shape[0] not in (1, 3):
        raise ValueError(f"expected (H, W) or (C, H, W) with C in {{1, 3}}, got {pixels.shape}")
    if pixels.shape[1] == 0 or pixels.shape[2] == 0:
        raise ImageDecodeError("zero-area image")

    out = resize_bilinear(pixels, side, side)
    if out.shape[0] == 1:
        out = np.repeat(out, 3, axis=0)
    # Bilinear output is a convex combination of inputs, so [0,1] is preserved;
    # the clip only sweeps up float round-off at the boundaries.
    return np.clip(out, 0.0, 1.0)


def load_and_preprocess(path: str | Path, side: int = 224, *, label: int = 0, source_id: str | None = None) -> ImageSample:
    """Decode a PNG/JPEG file and preprocess it into an :class:`ImageSample`."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.mode == "L":
                raw = np.asarray(img, dtype=np.float64)
            else:
                raw = np.asarray(img.convert("RGB"), dtype=np.float64)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageDecodeError(f"cannot decode {path}: {exc}") from exc

    if raw.size == 0:
        raise ImageDecodeError(f"zero-area image: {path}")

    if raw.ndim == 2:
        planes = raw[None, :, :]
    else:
        planes = np.moveaxis(raw, -1, 0)
    pixels = preprocess_array(planes / 255.0, side)
    return ImageSample(pixels=pixels, label=label, source_id=source_id or path.name)
