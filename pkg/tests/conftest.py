import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from harbench.dataset import LabeledDataset


def random_dataset(rng: np.random.Generator, n_rows: int, n_channels: int,
                   n_classes: int = 3, n_subjects: int = 2,
                   min_per_class: int = 2) -> LabeledDataset:
    """Random finite dataset with every class appearing >= min_per_class times."""
    matrix = rng.normal(size=(n_rows, n_channels))
    n_classes = max(1, min(n_classes, n_rows // min_per_class))
    while True:
        labels = rng.integers(1, n_classes + 1, size=n_rows)
        counts = np.bincount(labels, minlength=n_classes + 1)[1:]
        if (counts >= min_per_class).all():
            break
    subjects = rng.integers(1, n_subjects + 1, size=n_rows)
    channels = [f"ch{i}" for i in range(n_channels)]
    return LabeledDataset(channels, matrix, labels, subjects)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
