from .manifest import DatasetManifest, SplitSpec, scan_directory, split_manifest, write_manifest_csv
from .images import ImageSample, load_and_preprocess, preprocess_array, resize_bilinear
from .batching import epoch_permutation, epoch_batches, iter_array_batches
from .synthetic import make_blob_arrays, write_blob_dataset

__all__ = [
    "DatasetManifest",
    "SplitSpec",
    "scan_directory",
    "split_manifest",
    "write_manifest_csv",
    "ImageSample",
    "load_and_preprocess",
    "preprocess_array",
    "resize_bilinear",
    "epoch_permutation",
    "epoch_batches",
    "iter_array_batches",
    "make_blob_arrays",
    "write_blob_dataset",
]
