"""harbench: wearable-sensor activity classification benchmark toolkit.

Pipeline: ingest MHEALTH-style sensor logs, preprocess (filtering, label
alignment, hold-out splitting), train five from-scratch classifiers, and
compare them with confusion-matrix metrics.
"""
from .dataset import MHEALTH_COLUMN_MAP, ColumnMap, LabeledDataset, SampleRecord
from .errors import HarbenchError
from .ingest import (
    export_csv,
    load_canonical,
    load_dataset,
    parse_log_line,
    save_canonical,
)
from .labels import ACTIVITY_NAMES, ActivityLabel, label_name
from .learners import (
    MODEL_KINDS,
    ModelSpec,
    TrainedModel,
    load_model,
    predict,
    predict_scores,
    save_model,
    train,
)
from .metrics import (
    ConfusionMatrix,
    MetricsReport,
    build_confusion,
    compute_metrics,
    evaluate,
)
from .preprocess import (
    FilterSpec,
    LabelAlignmentSpec,
    PreprocessSpec,
    SplitSpec,
    WindowSpec,
    align_labels,
    drop_null_class,
    extract_windows,
    filter_signals,
    holdout_split,
    standardize,
)
from .synth import SyntheticSpec, generate

__version__ = "0.1.0"

__all__ = [
    "ACTIVITY_NAMES",
    "ActivityLabel",
    "ColumnMap",
    "ConfusionMatrix",
    "FilterSpec",
    "HarbenchError",
    "LabelAlignmentSpec",
    "LabeledDataset",
    "MHEALTH_COLUMN_MAP",
    "MODEL_KINDS",
    "MetricsReport",
    "ModelSpec",
    "PreprocessSpec",
    "SampleRecord",
    "SplitSpec",
    "SyntheticSpec",
    "TrainedModel",
    "WindowSpec",
    "align_labels",
    "build_confusion",
    "compute_metrics",
    "drop_null_class",
    "evaluate",
    "export_csv",
    "extract_windows",
    "filter_signals",
    "generate",
    "holdout_split",
    "label_name",
    "load_canonical",
    "load_dataset",
    "load_model",
    "parse_log_line",
    "predict",
    "predict_scores",
    "save_canonical",
    "save_model",
    "standardize",
    "train",
]
