"""Network layers with analytic forward/backward passes.

Convolutions are fixed to the 3x3 / stride 1 / padding 1 shape and pools to
2x2 / stride 2, the only geometries the architecture uses.  Convolution is
evaluated as a matrix product against an im2col patch matrix; the patch
buffer is built per batch chunk and rebuilt during backward, which bounds
peak memory by the chunk budget instead of the layer's full activation size.

All layers follow the same protocol: ``forward(x)`` caches whatever backward
needs, ``backward(dout)`` returns the input gradient and fills the parameter
gradients.  Arrays keep the dtype of the input, so the same code runs in
float32 for training and float64 for gradient checks.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided

__all__ = ["Conv2d", "ReLU", "MaxPool2d", "Flatten", "Linear"]

# im2col chunk budget in elements (~256 MB at float32).
_COL_BUDGET = 64_000_000


class Layer:
    """Minimal protocol shared by all layers."""

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> list[tuple[str, np.ndarray]]:
        return []

    def grads(self) -> list[np.ndarray]:
        return []

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)


def _im2col_3x3(x_padded: np.ndarray) -> np.ndarray:
    """Patch matrix of all 3x3 windows: (n * H * W, C * 9).

    ``x_padded`` is (n, C, H + 2, W + 2); the output row order is sample-major,
    then row-major over output positions.
    """
    n, c, hp, wp = x_padded.shape
    h, w = hp - 2, wp - 2
    sn, sc, sh, sw = x_padded.strides
    windows = as_strided(
        x_padded,
        shape=(n, c, h, w, 3, 3),
        strides=(sn, sc, sh, sw, sh, sw),
        writeable=False,
    )
    return windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * h * w, c * 9)


class Conv2d(Layer):
    """3x3 convolution, stride 1, padding 1 (spatial size preserved)."""

    def __init__(self, weight: np.ndarray, bias: np.ndarray):
        out_ch, in_ch, kh, kw = weight.shape
        if (kh, kw) != (3, 3):
            raise ValueError(f"kernel must be 3x3, got {kh}x{kw}")
        if bias.shape != (out_ch,):
            raise ValueError(f"bias shape {bias.shape} does not match {out_ch} output channels")
        self.weight = weight
        self.bias = bias
        self.grad_weight = np.zeros_like(weight)
        self.grad_bias = np.zeros_like(bias)
        self._x = None

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    def _chunk_size(self, h: int, w: int) -> int:
        per_sample = h * w * self.in_channels * 9
        return max(1, _COL_BUDGET // per_sample)

    def forward(self, x: np.ndarray) -> np.ndarray:
        n, c, h, w = x.shape
        if c != self.in_channels:
            raise ValueError(f"expected {self.in_channels} input channels, got {c}")
        self._x = x
        w_mat = self.weight.reshape(self.out_channels, -1)
        out = np.empty((n, self.out_channels, h, w), dtype=x.dtype)
        step = self._chunk_size(h, w)
        for lo in range(0, n, step):
            chunk = x[lo : lo + step]
            padded = np.pad(chunk, ((0, 0), (0, 0), (1, 1), (1, 1)))
            cols = _im2col_3x3(padded)
            prod = cols @ w_mat.T + self.bias
            m = chunk.shape[0]
            out[lo : lo + step] = prod.reshape(m, h, w, self.out_channels).transpose(0, 3, 1, 2)
        return out

    def backward(self, dout: np.ndarray) -> np.ndarray:
        x = self._x
        n, c, h, w = x.shape
        w_mat = self.weight.reshape(self.out_channels, -1)
        grad_w_mat = np.zeros_like(w_mat)
        self.grad_bias[...] = dout.sum(axis=(0, 2, 3))
        dx = np.empty_like(x)
        step = self._chunk_size(h, w)
        for lo in range(0, n, step):
            chunk = x[lo : lo + step]
            m = chunk.shape[0]
            padded = np.pad(chunk, ((0, 0), (0, 0), (1, 1), (1, 1)))
            cols = _im2col_3x3(padded)
            dout_mat = dout[lo : lo + step].transpose(0, 2, 3, 1).reshape(m * h * w, -1)
            grad_w_mat += dout_mat.T @ cols
            dcols = (dout_mat @ w_mat).reshape(m, h, w, c, 3, 3)
            dx_pad = np.zeros((m, c, h + 2, w + 2), dtype=x.dtype)
            # Scatter patch gradients back; for a fixed kernel offset the
            # target windows are disjoint, so plain slice-adds suffice.
            for ky in range(3):
                for kx in range(3):
                    dx_pad[:, :, ky : ky + h, kx : kx + w] += dcols[:, :, :, :, ky, kx].transpose(0, 3, 1, 2)
            dx[lo : lo + step] = dx_pad[:, :, 1 : 1 + h, 1 : 1 + w]
        self.grad_weight[...] = grad_w_mat.reshape(self.weight.shape)
        return dx

    def params(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def grads(self):
        return [self.grad_weight, self.grad_bias]


class ReLU(Layer):
    def __init__(self):
        self._mask = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0
        return np.where(self._mask, x, x.dtype.type(0))

    def backward(self, dout: np.ndarray) -> np.ndarray:
        return np.where(self._mask, dout, dout.dtype.type(0))


class MaxPool2d(Layer):
    """2x2 max pooling with stride 2; gradient flows to the first argmax of
    each window (numpy argmax tie-break)."""

    def __init__(self):
        self._idx = None
        self._in_shape = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        n, c, h, w = x.shape
        if h % 2 or w % 2:
            raise ValueError(f"spatial size must be even for 2x2 pooling, got {h}x{w}")
        self._in_shape = x.shape
        windows = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
        flat = windows.reshape(n, c, h // 2, w // 2, 4)
        self._idx = np.argmax(flat, axis=-1)
        return np.take_along_axis(flat, self._idx[..., None], axis=-1)[..., 0]

    def backward(self, dout: np.ndarray) -> np.ndarray:
        n, c, h, w = self._in_shape
        dflat = np.zeros((n, c, h // 2, w // 2, 4), dtype=dout.dtype)
        np.put_along_axis(dflat, self._idx[..., None], dout[..., None], axis=-1)
        return (
            dflat.reshape(n, c, h // 2, w // 2, 2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, h, w)
        )


class Flatten(Layer):
    def __init__(self):
        self._in_shape = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        return dout.reshape(self._in_shape)


class Linear(Layer):
    """Fully connected layer: y = x W^T + b with W of shape (out, in)."""

    def __init__(self, weight: np.ndarray, bias: np.ndarray):
        if bias.shape != (weight.shape[0],):
            raise ValueError(f"bias shape {bias.shape} does not match {weight.shape[0]} outputs")
        self.weight = weight
        self.bias = bias
        self.grad_weight = np.zeros_like(weight)
        self.grad_bias = np.zeros_like(bias)
        self._x = None

    @property
    def in_features(self) -> int:
        return self.weight.shape[1]

    @property
    def out_features(self) -> int:
        return self.weight.shape[0]

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[1] != self.in_features:
            raise ValueError(f"expected {self.in_features} input features, got {x.shape[1]}")
        self._x = x
        return x @ self.weight.T + self.bias

    def backward(self, dout: np.ndarray) -> np.ndarray:
        self.grad_weight[...] = dout.T @ self._x
        self.grad_bias[...] = dout.sum(axis=0)
        return dout @ self.weight

    def params(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def grads(self):
        return [self.grad_weight, self.grad_bias]
