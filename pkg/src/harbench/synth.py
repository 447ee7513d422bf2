"""Synthetic Gaussian-cluster datasets for self-contained testing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset
from .errors import ConfigError
from .labels import MAX_CODE

# Subjects are assigned round-robin over ten ids, mirroring the ten
# volunteers of the real corpus, so subject-holdout splits stay usable.
N_SYNTH_SUBJECTS = 10


@dataclass(frozen=True)
class SyntheticSpec:
    n_classes: int
    n_features: int
    samples_per_class: int
    cluster_separation: float
    noise_std: float
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n_classes <= MAX_CODE:
            raise ConfigError(f"n_classes must be in [1, {MAX_CODE}], got {self.n_classes}")
        if self.n_features < 1:
            raise ConfigError(f"n_features must be >= 1, got {self.n_features}")
        if self.samples_per_class < 1:
            raise ConfigError(
                f"samples_per_class must be >= 1, got {self.samples_per_class}"
            )
        if not self.cluster_separation > 0:
            raise ConfigError("cluster_separation must be > 0")
        if not self.noise_std > 0:
            raise ConfigError("noise_std must be > 0")


def class_centers(spec: SyntheticSpec) -> np.ndarray:
    """Deterministic cluster centers with pairwise distance >= separation.

    Center c sits on coordinate axis (c mod d) at radius
    separation * (1 + c // d): same-axis centers differ by at least one
    separation step, cross-axis pairs by at least separation * sqrt(2).
    """
    d = spec.n_features
    centers = np.zeros((spec.n_classes, d))
    for c in range(spec.n_classes):
        centers[c, c % d] = spec.cluster_separation * (1 + c // d)
    return centers


def generate(spec: SyntheticSpec) -> LabeledDataset:
    """Gaussian class clusters with exact per-class counts, class-major order.

    Labels are activity codes 1..n_classes; deterministic per seed.
    """
    rng = np.random.default_rng(spec.seed)
    centers = class_centers(spec)
    n = spec.n_classes * spec.samples_per_class
    matrix = np.empty((n, spec.n_features))
    labels = np.empty(n, dtype=np.int64)
    for c in range(spec.n_classes):
        lo = c * spec.samples_per_class
        hi = lo + spec.samples_per_class
        noise = rng.normal(0.0, spec.noise_std, size=(spec.samples_per_class, spec.n_features))
        matrix[lo:hi] = centers[c] + noise
        labels[lo:hi] = c + 1
    subjects = (np.arange(n) % N_SYNTH_SUBJECTS) + 1
    channels = [f"feat_{i + 1}" for i in range(spec.n_features)]
    return LabeledDataset(channels=channels, matrix=matrix, labels=labels, subjects=subjects)
