"""vggsvm: VGG-family CNN feature extraction feeding an SMO-trained kernel SVM.

The package is organized around two sklearn-style estimators,
:class:`VggClassifier` and :class:`KernelSvm`, backed by lower-level modules
for data ingestion (:mod:`vggsvm.data`), the network engine
(:mod:`vggsvm.nn`), the dual solver (:mod:`vggsvm.svm`), evaluation metrics
and the binary artifact formats.  The ``vggsvm`` command line drives the full
ingest -> train-cnn -> extract -> train-svm -> evaluate pipeline.
"""

from .estimators import KernelSvm, VggClassifier
from .featstore import FeatureFormatError, LabeledFeatureSet, read_features, write_features
from .metrics import ConfusionMatrix, MetricsReport, compute_report, confusion, report_from_predictions
from .data.manifest import DatasetManifest, SplitSpec, scan_directory, split_manifest
from .data.images import ImageSample, load_and_preprocess
from .nn.vgg import CONV_PLANS, VggConfig
from .svm.kernels import KernelSpec, gram_matrix, kernel_eval
from .svm.model import SvmModel, SvmTrainConfig, load_svm, save_svm, train_svm

__version__ = "0.1.0"

__all__ = [
    "VggClassifier",
    "KernelSvm",
    "LabeledFeatureSet",
    "FeatureFormatError",
    "read_features",
    "write_features",
    "ConfusionMatrix",
    "MetricsReport",
    "confusion",
    "compute_report",
    "report_from_predictions",
    "DatasetManifest",
    "SplitSpec",
    "scan_directory",
    "split_manifest",
    "ImageSample",
    "load_and_preprocess",
    "CONV_PLANS",
    "VggConfig",
    "KernelSpec",
    "kernel_eval",
    "gram_matrix",
    "SvmModel",
    "SvmTrainConfig",
    "train_svm",
    "save_svm",
    "load_svm",
    "__version__",
]
