import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vggsvm.data.synthetic import make_blob_arrays, write_blob_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def blob_arrays():
    """Small separable image set: (X, y) with 30 images per class, side 32."""
    X, y, _ = make_blob_arrays(n_per_class=30, side=32, seed=99)
    return X, y


@pytest.fixture(scope="session")
def blob_dataset_dir(tmp_path_factory):
    """The blob fixture written to disk as PNGs in the two-class layout."""
    root = tmp_path_factory.mktemp("blobs") / "dataset"
    write_blob_dataset(root, n_per_class=12, side=32, seed=5)
    return root
