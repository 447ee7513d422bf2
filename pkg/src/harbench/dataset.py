"""Core in-memory dataset types.

A LabeledDataset is a columnar feature matrix plus aligned label and
subject vectors. Instances are immutable: the backing numpy arrays are
marked read-only so datasets can be shared across threads.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LabelRangeError, SchemaError
from .labels import MAX_CODE, MIN_CODE, ActivityLabel


@dataclass(frozen=True)
class ColumnMap:
    """Maps raw log columns onto feature channels and the label column.

    Raw MHEALTH logs carry 24 columns (23 sensor channels + label); the
    map selects which ones become features. All indices are 0-based.
    """

    source_column_count: int
    feature_columns: tuple[int, ...]
    label_column: int
    channel_names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.source_column_count < 1:
            raise SchemaError("source_column_count must be positive")
        cols = tuple(int(c) for c in self.feature_columns)
        object.__setattr__(self, "feature_columns", cols)
        if not cols:
            raise SchemaError("feature_columns must be non-empty")
        all_cols = cols + (self.label_column,)
        if len(set(all_cols)) != len(all_cols):
            raise SchemaError("feature columns and label column must be disjoint and unique")
        bad = [c for c in all_cols if not 0 <= c < self.source_column_count]
        if bad:
            raise SchemaError(
                f"column indices {bad} out of range for {self.source_column_count} source columns"
            )
        if self.channel_names is not None:
            names = tuple(self.channel_names)
            object.__setattr__(self, "channel_names", names)
            if len(names) != len(cols):
                raise SchemaError("channel_names length must match feature_columns")

    @property
    def n_features(self) -> int:
        return len(self.feature_columns)

    def resolved_channel_names(self) -> tuple[str, ...]:
        if self.channel_names is not None:
            return self.channel_names
        return tuple(f"col{c}" for c in self.feature_columns)


# Default channel selection for raw MHEALTH subject logs (24 columns,
# 0-based): chest acceleration 0-2, left-ankle acceleration 5-7,
# left-ankle gyro 8-10, right-lower-arm acceleration 14-16, label 23.
# The corpus never states which 12 channels feed the models; this preset
# is a documented choice and fully overridable.
MHEALTH_COLUMN_MAP = ColumnMap(
    source_column_count=24,
    feature_columns=(0, 1, 2, 5, 6, 7, 14, 15, 16, 8, 9, 10),
    label_column=23,
    channel_names=(
        "chest_acc_x",
        "chest_acc_y",
        "chest_acc_z",
        "ankle_acc_x",
        "ankle_acc_y",
        "ankle_acc_z",
        "arm_acc_x",
        "arm_acc_y",
        "arm_acc_z",
        "ankle_gyro_x",
        "ankle_gyro_y",
        "ankle_gyro_z",
    ),
)


@dataclass(frozen=True)
class SampleRecord:
    """One 50 Hz sensor reading: feature vector, label, and provenance."""

    features: np.ndarray
    label: ActivityLabel
    subject_id: int = 1
    sample_index: int = 0

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        feats.setflags(write=False)
        object.__setattr__(self, "features", feats)
        if self.subject_id < 1:
            raise SchemaError(f"subject_id must be >= 1, got {self.subject_id}")
        if self.sample_index < 0:
            raise SchemaError(f"sample_index must be >= 0, got {self.sample_index}")


class LabeledDataset:
    """Feature matrix with aligned labels, subjects, and channel names."""

    __slots__ = ("channels", "matrix", "labels", "subjects")

    def __init__(self, channels, matrix, labels, subjects):
        channels = tuple(str(c) for c in channels)
        matrix = np.ascontiguousarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise SchemaError(f"matrix must be 2-D, got shape {matrix.shape}")
        labels = np.asarray(labels)
        subjects = np.asarray(subjects)
        n = matrix.shape[0]
        if labels.shape != (n,) or subjects.shape != (n,):
            raise SchemaError(
                f"row counts disagree: matrix {n}, labels {labels.shape}, subjects {subjects.shape}"
            )
        if matrix.shape[1] != len(channels):
            raise SchemaError(
                f"matrix has {matrix.shape[1]} columns but {len(channels)} channel names"
            )
        if n and (labels.min() < MIN_CODE or labels.max() > MAX_CODE):
            raise LabelRangeError(
                f"labels outside [{MIN_CODE}, {MAX_CODE}]: range [{labels.min()}, {labels.max()}]"
            )
        if matrix.size and not np.isfinite(matrix).all():
            raise SchemaError("feature values must be finite (no NaN/Inf)")
        labels = labels.astype(np.uint8, copy=False)
        subjects = subjects.astype(np.uint16, copy=False)
        for arr in (matrix, labels, subjects):
            arr.setflags(write=False)
        self.channels = channels
        self.matrix = matrix
        self.labels = labels
        self.subjects = subjects

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_channels(self) -> int:
        return self.matrix.shape[1]

    def take(self, row_indices) -> "LabeledDataset":
        """New dataset holding the given rows, in the given order."""
        idx = np.asarray(row_indices, dtype=np.int64)
        return LabeledDataset(
            self.channels, self.matrix[idx], self.labels[idx], self.subjects[idx]
        )

    def with_matrix(self, matrix) -> "LabeledDataset":
        return LabeledDataset(self.channels, matrix, self.labels, self.subjects)

    def with_labels(self, labels) -> "LabeledDataset":
        return LabeledDataset(self.channels, self.matrix, labels, self.subjects)

    def record(self, i: int) -> SampleRecord:
        return SampleRecord(
            features=self.matrix[i],
            label=ActivityLabel(int(self.labels[i])),
            subject_id=int(self.subjects[i]),
            sample_index=int(i),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (
            self.channels == other.channels
            and np.array_equal(self.matrix, other.matrix)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.subjects, other.subjects)
        )

    def __repr__(self) -> str:
        return f"LabeledDataset(rows={self.n_rows}, channels={self.n_channels})"
