"""VGG-family network construction.

The four canonical configurations (A/B/D/E, i.e. 11/13/16/19 weight layers)
share the same skeleton: stacks of 3x3 stride-1 convolutions with ReLU,
five 2x2 max pools, then a three-layer fully connected head.  ``channel_scale``
shrinks every convolution width (and, by default, the hidden head widths) so
the full structure can be exercised at desk scale.

The network exposes a feature tap: the post-ReLU output of the first fully
connected layer, the widest activation vector in the head.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layers import Conv2d, Flatten, Layer, Linear, MaxPool2d, ReLU

__all__ = ["CONV_PLANS", "VggConfig", "VggNet", "build_vgg"]

# "M" marks a 2x2 max pool; integers are conv output channels.
CONV_PLANS: dict[str, tuple] = {
    "vgg11": (64, "M", 128, "M", 256, 256, "M", 512, 512, "M", 512, 512, "M"),
    "vgg13": (64, 64, "M", 128, 128, "M", 256, 256, "M", 512, 512, "M", 512, 512, "M"),
    "vgg16": (64, 64, "M", 128, 128, "M", 256, 256, 256, "M", 512, 512, 512, "M", 512, 512, 512, "M"),
    "vgg19": (64, 64, "M", 128, 128, "M", 256, 256, 256, 256, "M", 512, 512, 512, 512, "M", 512, 512, 512, 512, "M"),
}

_POOL_COUNT = 5
_INIT_STREAM = 3  # keep in sync with data.manifest stream tags


def _scaled(channels: int, scale: float) -> int:
    return max(1, int(round(channels * scale)))


@dataclass(frozen=True)
class VggConfig:
    """Architecture description; immutable and fully determines every shape."""

    variant: str
    conv_plan: tuple
    fc_widths: tuple[int, int, int]
    input_side: int = 224
    channel_scale: float = 1.0

    def __post_init__(self):
        if self.variant not in CONV_PLANS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {sorted(CONV_PLANS)}")
        expected = tuple(
            tok if tok == "M" else _scaled(tok, self.channel_scale)
            for tok in CONV_PLANS[self.variant]
        )
        if tuple(self.conv_plan) != expected:
            raise ValueError(f"conv_plan does not match the canonical {self.variant} layout")
        if not (0.0 < self.channel_scale <= 1.0):
            raise ValueError(f"channel_scale must be in (0, 1], got {self.channel_scale}")
        if len(self.fc_widths) != 3:
            raise ValueError(f"fc_widths must have exactly 3 entries, got {self.fc_widths}")
        if any(w < 1 for w in self.fc_widths):
            raise ValueError(f"fc_widths must be positive, got {self.fc_widths}")
        if self.fc_widths[-1] < 2:
            raise ValueError("the final fc width is the class count and must be >= 2")
        divisor = 2**_POOL_COUNT
        if self.input_side < divisor or self.input_side % divisor:
            raise ValueError(
                f"input_side {self.input_side} is not divisible by {divisor} "
                f"({_POOL_COUNT} pool layers)"
            )

    @classmethod
    def from_variant(
        cls,
        variant: str,
        *,
        input_side: int = 224,
        channel_scale: float = 1.0,
        fc_widths: tuple[int, int, int] | None = None,
        num_classes: int = 2,
    ) -> "VggConfig":
        variant = variant.lower()
        if variant not in CONV_PLANS:
            raise ValueError(f"unknown variant {variant!r}; expected one of {sorted(CONV_PLANS)}")
        plan = tuple(
            tok if tok == "M" else _scaled(tok, channel_scale) for tok in CONV_PLANS[variant]
        )
        if fc_widths is None:
            hidden = max(8, int(round(4096 * channel_scale)))
            fc_widths = (hidden, hidden, num_classes)
        return cls(
            variant=variant,
            conv_plan=plan,
            fc_widths=tuple(fc_widths),
            input_side=input_side,
            channel_scale=channel_scale,
        )

    @property
    def num_classes(self) -> int:
        return self.fc_widths[-1]

    @property
    def feature_dim(self) -> int:
        return self.fc_widths[0]

    def conv_shapes(self) -> list[tuple[int, int]]:
        """(in_channels, out_channels) of each convolution, in order."""
        shapes = []
        in_ch = 3
        for tok in self.conv_plan:
            if tok == "M":
                continue
            shapes.append((in_ch, tok))
            in_ch = tok
        return shapes

    def flattened_dim(self) -> int:
        side = self.input_side // 2**_POOL_COUNT
        last_ch = [tok for tok in self.conv_plan if tok != "M"][-1]
        return last_ch * side * side

    def parameter_count(self) -> int:
        total = 0
        for in_ch, out_ch in self.conv_shapes():
            total += out_ch * (in_ch * 9 + 1)
        in_dim = self.flattened_dim()
        for width in self.fc_widths:
            total += width * (in_dim + 1)
            in_dim = width
        return total

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "conv_plan": list(self.conv_plan),
            "fc_widths": list(self.fc_widths),
            "input_side": self.input_side,
            "channel_scale": self.channel_scale,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VggConfig":
        return cls(
            variant=data["variant"],
            conv_plan=tuple(tok if tok == "M" else int(tok) for tok in data["conv_plan"]),
            fc_widths=tuple(int(w) for w in data["fc_widths"]),
            input_side=int(data["input_side"]),
            channel_scale=float(data["channel_scale"]),
        )


def _kaiming_uniform(rng: np.random.Generator, shape: tuple, fan_in: int, dtype) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class VggNet:
    """A built network: ordered layers plus the feature-tap bookkeeping."""

    def __init__(self, config: VggConfig, layers: list[Layer], feature_index: int, init_seed: int):
        self.config = config
        self.layers = layers
        self.feature_index = feature_index  # index of the ReLU after the first fc layer
        self.init_seed = init_seed

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Logits for a batch shaped (n, 3, side, side)."""
        self._check_batch(x)
        for layer in self.layers:
            x = layer(x)
        return x

    def backward(self, grad_logits: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad_logits = layer.backward(grad_logits)
        return grad_logits

    def features(self, sample: np.ndarray) -> np.ndarray:
        """Feature vector of one (3, side, side) sample: the post-ReLU output
        of the first fully connected layer."""
        if sample.ndim != 3:
            raise ValueError(f"features() takes one sample (3, side, side), got shape {sample.shape}")
        x = sample[None]
        self._check_batch(x)
        for layer in self.layers[: self.feature_index + 1]:
            x = layer(x)
        return x[0]

    def _check_batch(self, x: np.ndarray) -> None:
        side = self.config.input_side
        if x.ndim != 4 or x.shape[1:] != (3, side, side):
            raise ValueError(
                f"expected input of shape (n, 3, {side}, {side}), got {x.shape}"
            )

    def parameters(self) -> list[np.ndarray]:
        return [arr for layer in self.layers for _, arr in layer.params()]

    def gradients(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads()]

    def parameter_count(self) -> int:
        return sum(arr.size for arr in self.parameters())

    @property
    def dtype(self):
        return self.parameters()[0].dtype


def build_vgg(config: VggConfig, seed: int = 0, dtype=np.float32) -> VggNet:
    """Construct a network with seeded Kaiming-uniform weights and zero biases."""
    rng = np.random.default_rng([seed, _INIT_STREAM])
    layers: list[Layer] = []

    in_ch = 3
    for tok in config.conv_plan:
        if tok == "M":
            layers.append(MaxPool2d())
            continue
        fan_in = in_ch * 9
        weight = _kaiming_uniform(rng, (tok, in_ch, 3, 3), fan_in, dtype)
        layers.append(Conv2d(weight, np.zeros(tok, dtype=dtype)))
        layers.append(ReLU())
        in_ch = tok

    layers.append(Flatten())
    in_dim = config.flattened_dim()
    feature_index = None
    for i, width in enumerate(config.fc_widths):
        weight = _kaiming_uniform(rng, (width, in_dim), in_dim, dtype)
        layers.append(Linear(weight, np.zeros(width, dtype=dtype)))
        if i < 2:
            layers.append(ReLU())
            if i == 0:
                feature_index = len(layers) - 1
        in_dim = width

    return VggNet(config, layers, feature_index, init_seed=seed)
