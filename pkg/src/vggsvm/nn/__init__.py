from .layers import Conv2d, Linear, MaxPool2d, ReLU, Flatten
from .loss import softmax, softmax_cross_entropy
from .vgg import CONV_PLANS, VggConfig, VggNet, build_vgg
from .training import TrainConfig, TrainHistory, EpochStats, TrainingDivergedError, train_network
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint

__all__ = [
    "Conv2d",
    "Linear",
    "MaxPool2d",
    "ReLU",
    "Flatten",
    "softmax",
    "softmax_cross_entropy",
    "CONV_PLANS",
    "VggConfig",
    "VggNet",
    "build_vgg",
    "TrainConfig",
    "TrainHistory",
    "EpochStats",
    "TrainingDivergedError",
    "train_network",
    "CheckpointError",
    "load_checkpoint",
    "save_checkpoint",
]
