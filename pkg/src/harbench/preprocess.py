"""Transforms from a raw dataset to model-ready train/test matrices.

All operations are pure: the input dataset is never mutated. Each
function returns a new LabeledDataset (or pair of them).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import LabeledDataset
from .errors import ConfigError, EmptyDatasetError, EmptyInputError, SchemaError
from .labels import NULL_CODE

log = logging.getLogger(__name__)

FILTER_KINDS = ("moving_average", "median", "none")
SPLIT_MODES = ("stratified_random", "subject_holdout")

# Short spellings accepted from CLI flags and config files.
_FILTER_ALIASES = {"mavg": "moving_average"}
_SPLIT_ALIASES = {"stratified": "stratified_random", "subject": "subject_holdout"}


def normalize_filter_kind(kind: str) -> str:
    return _FILTER_ALIASES.get(kind, kind)


def normalize_split_mode(mode: str) -> str:
    return _SPLIT_ALIASES.get(mode, mode)

# 0.5 s at the 50 Hz sampling rate.
DEFAULT_FILTER_WINDOW = 25
# Labels lag the true activity change by up to ~1000 samples in the raw
# recordings; trimming transition neighborhoods is the safe default.
DEFAULT_TRIM_RADIUS = 50


@dataclass(frozen=True)
class FilterSpec:
    kind: str = "moving_average"
    window: int = DEFAULT_FILTER_WINDOW

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ConfigError(f"unknown filter kind {self.kind!r} (choose from {FILTER_KINDS})")
        if self.window < 1 or self.window % 2 == 0:
            raise ConfigError(f"filter window must be odd and >= 1, got {self.window}")

    def validate_for(self, ds: LabeledDataset) -> None:
        if self.kind != "none" and self.window > ds.n_rows:
            raise ConfigError(
                f"filter window {self.window} exceeds dataset length {ds.n_rows}"
            )


@dataclass(frozen=True)
class LabelAlignmentSpec:
    """Shift labels earlier/later and blank out transition neighborhoods."""

    shift: int = 0
    trim_radius: int = DEFAULT_TRIM_RADIUS

    def __post_init__(self):
        if self.trim_radius < 0:
            raise ConfigError(f"trim_radius must be >= 0, got {self.trim_radius}")

    def validate_for(self, ds: LabeledDataset) -> None:
        if abs(self.shift) >= max(ds.n_rows, 1):
            raise ConfigError(
                f"|shift| = {abs(self.shift)} must be < dataset length {ds.n_rows}"
            )


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.70
    mode: str = "stratified_random"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )
        if self.mode not in SPLIT_MODES:
            raise ConfigError(f"unknown split mode {self.mode!r} (choose from {SPLIT_MODES})")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")


WINDOW_STATISTICS = ("mean", "std", "min", "max")


@dataclass(frozen=True)
class WindowSpec:
    length: int
    stride: int
    # Features per channel are fixed: mean, std, min, max.

    def __post_init__(self):
        if self.length < 1:
            raise ConfigError(f"window length must be >= 1, got {self.length}")
        if self.stride < 1 or self.stride > self.length:
            raise ConfigError(
                f"window stride must be in [1, length], got {self.stride}"
            )

    def validate_for(self, ds: LabeledDataset) -> None:
        if self.length > ds.n_rows:
            raise ConfigError(
                f"window length {self.length} exceeds dataset length {ds.n_rows}"
            )


def _smooth_channel(x: np.ndarray, window: int, reduce: str) -> np.ndarray:
    half = window // 2
    padded = np.pad(x, half, mode="edge")
    view = np.lib.stride_tricks.sliding_window_view(padded, window)
    out = np.empty_like(x)
    # Chunked reduction keeps the windowed copy small for million-row inputs.
    chunk = max(1, (1 << 21) // window)
    for start in range(0, x.shape[0], chunk):
        block = view[start:start + chunk]
        if reduce == "mean":
            out[start:start + chunk] = block.mean(axis=-1)
        else:
            out[start:start + chunk] = np.median(block, axis=-1)
    return out


def filter_signals(ds: LabeledDataset, spec: FilterSpec) -> LabeledDataset:
    """Smooth every channel independently; labels and subjects untouched.

    Boundaries use edge replication, so output length equals input length.
    """
    spec.validate_for(ds)
    if spec.kind == "none" or ds.n_rows == 0:
        return ds
    reduce = "mean" if spec.kind == "moving_average" else "median"
    out = np.empty_like(ds.matrix)
    for c in range(ds.n_channels):
        out[:, c] = _smooth_channel(ds.matrix[:, c], spec.window, reduce)
    return ds.with_matrix(out)


def align_labels(ds: LabeledDataset, spec: LabelAlignmentSpec) -> LabeledDataset:
    """Shift the label vector and blank samples around label transitions.

    Positive shift moves labels earlier in time: new[i] = old[i + shift].
    Vacated positions become the null label. Afterwards, trim_radius
    samples on each side of every remaining label transition are set to
    null; a labeled segment erased entirely by trimming is reported via a
    warning but allowed.
    """
    spec.validate_for(ds)
    n = ds.n_rows
    if n == 0:
        return ds
    labels = np.full(n, NULL_CODE, dtype=np.int64)
    s = spec.shift
    if s >= 0:
        labels[: n - s] = ds.labels[s:]
    else:
        labels[-s:] = ds.labels[: n + s]

    r = spec.trim_radius
    if r > 0:
        boundaries = np.nonzero(labels[1:] != labels[:-1])[0]  # change between i and i+1
        if boundaries.size:
            segment_edges = np.concatenate(([0], boundaries + 1, [n]))
            mask = np.zeros(n, dtype=bool)
            for b in boundaries:
                mask[max(0, b - r + 1): b + r + 1] = True
            erased = []
            for start, end in zip(segment_edges[:-1], segment_edges[1:]):
                code = labels[start]
                if code != NULL_CODE and mask[start:end].all():
                    erased.append((int(code), int(start), int(end)))
            labels = np.where(mask, NULL_CODE, labels)
            for code, start, end in erased:
                log.warning(
                    "label segment (code %d, rows %d:%d) erased entirely by trim_radius=%d",
                    code, start, end, r,
                )
    return ds.with_labels(labels)


def drop_null_class(ds: LabeledDataset) -> LabeledDataset:
    """Keep only rows with a non-null activity label, order preserved."""
    keep = np.nonzero(ds.labels != NULL_CODE)[0]
    if keep.size == 0:
        raise EmptyDatasetError("no rows left after dropping the null class")
    if keep.size == ds.n_rows:
        return ds
    return ds.take(keep)


def extract_windows(ds: LabeledDataset, spec: WindowSpec) -> LabeledDataset:
    """Summarize fixed-length windows into 4 statistics per channel.

    Windows start every `stride` samples; any window spanning a label or
    subject change is discarded. Output channels are named
    "<channel>:<stat>" for stat in mean/std/min/max (population std).
    """
    spec.validate_for(ds)
    n, d = ds.matrix.shape
    starts = np.arange(0, n - spec.length + 1, spec.stride)
    if starts.size == 0:
        raise EmptyDatasetError("no windows fit the dataset")
    # A window is uniform iff labels and subjects are constant across it.
    lab_change = np.nonzero(np.diff(ds.labels.astype(np.int64)) != 0)[0]
    sub_change = np.nonzero(np.diff(ds.subjects.astype(np.int64)) != 0)[0]
    change = np.zeros(n, dtype=np.int64)
    change[np.concatenate([lab_change, sub_change]) + 1] = 1
    change = np.cumsum(change)
    uniform = change[starts] == change[starts + spec.length - 1]
    starts = starts[uniform]
    if starts.size == 0:
        raise EmptyDatasetError("all windows span a label or subject change")

    idx = starts[:, None] + np.arange(spec.length)[None, :]
    feats = np.empty((starts.size, 4 * d))
    for c in range(d):
        block = ds.matrix[:, c][idx]
        feats[:, 4 * c + 0] = block.mean(axis=1)
        feats[:, 4 * c + 1] = block.std(axis=1)
        feats[:, 4 * c + 2] = block.min(axis=1)
        feats[:, 4 * c + 3] = block.max(axis=1)
    channels = [f"{ch}:{stat}" for ch in ds.channels for stat in WINDOW_STATISTICS]
    return LabeledDataset(
        channels=channels,
        matrix=feats,
        labels=ds.labels[starts],
        subjects=ds.subjects[starts],
    )


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def holdout_split(ds: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Deterministic seeded hold-out partition of the dataset.

    Stratified mode allocates round-half-up(fraction * n_c) rows of each
    class to train (adjusted by one row when a side would be empty), so
    every class appears on both sides. Subject mode assigns whole
    subjects, choosing the seeded-permutation prefix whose row count is
    closest to the target fraction. Train and test are disjoint and
    together cover the dataset exactly.
    """
    if ds.n_rows == 0:
        raise EmptyInputError("cannot split an empty dataset")
    rng = np.random.default_rng(spec.seed)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []

    if spec.mode == "stratified_random":
        classes = np.unique(ds.labels)
        for code in classes:
            rows = np.nonzero(ds.labels == code)[0]
            if rows.size < 2:
                raise SchemaError(
                    f"stratified split needs >= 2 rows per class; class {int(code)} has {rows.size}"
                )
            n_train = _round_half_up(spec.train_fraction * rows.size)
            n_train = min(max(n_train, 1), rows.size - 1)
            perm = rng.permutation(rows.size)
            train_idx.append(rows[perm[:n_train]])
            test_idx.append(rows[perm[n_train:]])
    else:
        subjects = np.unique(ds.subjects)
        if subjects.size < 2:
            raise SchemaError(
                f"subject hold-out needs >= 2 subjects, dataset has {subjects.size}"
            )
        order = rng.permutation(subjects.size)
        counts = np.array([(ds.subjects == subjects[i]).sum() for i in order], dtype=np.int64)
        target = spec.train_fraction * ds.n_rows
        cum = np.cumsum(counts)
        k = int(np.argmin(np.abs(cum - target))) + 1
        k = min(max(k, 1), subjects.size - 1)
        train_subjects = set(int(subjects[i]) for i in order[:k])
        mask = np.isin(ds.subjects, list(train_subjects))
        train_idx.append(np.nonzero(mask)[0])
        test_idx.append(np.nonzero(~mask)[0])

    train_rows = np.sort(np.concatenate(train_idx))
    test_rows = np.sort(np.concatenate(test_idx))
    return ds.take(train_rows), ds.take(test_rows)


@dataclass(frozen=True)
class StandardizeParams:
    mean: np.ndarray
    std: np.ndarray  # already floored at 1e-12

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        return (matrix - self.mean) / self.std


def standardize(train: LabeledDataset, test: LabeledDataset | None = None):
    """Zero-mean/unit-variance scaling fit on train, applied to both splits.

    Uses the population standard deviation with a 1e-12 floor so constant
    channels map to zero. Returns (train', test', params); test' is None
    when no test set is given.
    """
    if train.n_rows == 0:
        raise EmptyInputError("cannot standardize an empty training set")
    mean = train.matrix.mean(axis=0)
    std = np.maximum(train.matrix.std(axis=0), 1e-12)
    params = StandardizeParams(mean=mean, std=std)
    train_out = train.with_matrix(params.apply(train.matrix))
    test_out = test.with_matrix(params.apply(test.matrix)) if test is not None else None
    return train_out, test_out, params


@dataclass(frozen=True)
class PreprocessSpec:
    """The full preprocessing recipe, serializable to key=value text."""

    filter: FilterSpec = field(default_factory=FilterSpec)
    alignment: LabelAlignmentSpec = field(default_factory=LabelAlignmentSpec)
    split: SplitSpec = field(default_factory=SplitSpec)
    window: WindowSpec | None = None
    drop_null: bool = True

    def to_text(self) -> str:
        lines = [
            f"filter = {self.filter.kind}",
            f"filter_window = {self.filter.window}",
            f"label_shift = {self.alignment.shift}",
            f"trim_radius = {self.alignment.trim_radius}",
            f"drop_null = {'true' if self.drop_null else 'false'}",
            f"windowed = {'true' if self.window is not None else 'false'}",
        ]
        if self.window is not None:
            lines.append(f"window_len = {self.window.length}")
            lines.append(f"window_stride = {self.window.stride}")
        lines += [
            f"split_mode = {self.split.mode}",
            f"train_fraction = {self.split.train_fraction!r}",
            f"seed = {self.split.seed}",
        ]
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_mapping(kv: dict) -> "PreprocessSpec":
        def get(key, default):
            return kv.get(key, default)

        windowed = str(get("windowed", "false")).lower() in ("1", "true", "yes", "on")
        window = None
        if windowed:
            window = WindowSpec(
                length=int(get("window_len", 128)),
                stride=int(get("window_stride", 64)),
            )
        return PreprocessSpec(
            filter=FilterSpec(
                kind=normalize_filter_kind(str(get("filter", "moving_average"))),
                window=int(get("filter_window", DEFAULT_FILTER_WINDOW)),
            ),
            alignment=LabelAlignmentSpec(
                shift=int(get("label_shift", 0)),
                trim_radius=int(get("trim_radius", DEFAULT_TRIM_RADIUS)),
            ),
            split=SplitSpec(
                train_fraction=float(get("train_fraction", 0.70)),
                mode=normalize_split_mode(str(get("split_mode", "stratified_random"))),
                seed=int(get("seed", 0)),
            ),
            window=window,
            drop_null=str(get("drop_null", "true")).lower() in ("1", "true", "yes", "on"),
        )

    def with_seed(self, seed: int) -> "PreprocessSpec":
        return replace(self, split=replace(self.split, seed=seed))


def run_pipeline(ds: LabeledDataset, spec: PreprocessSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """filter -> align -> (window) -> drop null -> split, per the spec."""
    out = filter_signals(ds, spec.filter)
    out = align_labels(out, spec.alignment)
    if spec.window is not None:
        out = extract_windows(out, spec.window)
    if spec.drop_null:
        out = drop_null_class(out)
    return holdout_split(out, spec.split)
