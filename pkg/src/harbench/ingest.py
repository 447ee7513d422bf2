"""Parsing of whitespace-separated sensor log files and canonical dataset IO.

Log convention: one sample per line, numeric tokens separated by runs of
spaces/tabs, decimal point only. Lines that are entirely whitespace are
skipped. The label column is parsed as a real and rounded; values more
than 1e-6 away from an integer are rejected.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .container import read_container, write_container
from .dataset import ColumnMap, LabeledDataset, SampleRecord
from .errors import (
    EmptyInputError,
    LabelRangeError,
    ParseError,
    SchemaError,
)
from .labels import MAX_CODE, MIN_CODE, ActivityLabel

DATASET_MAGIC = b"HARDSET1"

_LABEL_TOL = 1e-6


@dataclass(frozen=True)
class LineIssue:
    """A located parse failure for one log line."""

    path: str | None
    line_number: int
    message: str
    kind: str  # "parse" | "schema" | "label"

    def raise_(self):
        where = f"{self.path or '<input>'}:{self.line_number}"
        msg = f"{where}: {self.message}"
        if self.kind == "schema":
            raise SchemaError(msg)
        if self.kind == "label":
            raise LabelRangeError(msg)
        raise ParseError(msg, path=self.path, line=self.line_number)


def _round_label(value: float) -> int:
    rounded = math.floor(value + 0.5) if value >= 0 else -math.floor(-value + 0.5)
    if not abs(value - rounded) <= _LABEL_TOL:
        raise LabelRangeError(f"label value {value!r} is not an integer")
    return int(rounded)


def parse_log_line(line: str, cmap: ColumnMap, *, subject_id: int = 1,
                   sample_index: int = 0, line_number: int | None = None,
                   path: str | None = None) -> SampleRecord:
    """Parse one log line into a SampleRecord using the given column map.

    Raises SchemaError when the line has fewer tokens than the map's
    source_column_count (extra trailing tokens are tolerated), ParseError
    on a malformed or non-finite token, and LabelRangeError when the
    label column is non-integral or outside [0, 12].
    """
    where = f"{path}:{line_number}" if path and line_number else (
        f"line {line_number}" if line_number else "line"
    )
    tokens = line.split()
    if len(tokens) < cmap.source_column_count:
        raise SchemaError(
            f"{where}: expected >= {cmap.source_column_count} columns, found {len(tokens)}"
        )
    needed = set(cmap.feature_columns) | {cmap.label_column}
    values = {}
    for col in needed:
        tok = tokens[col]
        try:
            val = float(tok)
        except ValueError:
            raise ParseError(
                f"{where}: malformed token {tok!r} at column {col + 1}",
                path=path, line=line_number, token=col + 1,
            ) from None
        if not math.isfinite(val):
            raise ParseError(
                f"{where}: non-finite value {tok!r} at column {col + 1}",
                path=path, line=line_number, token=col + 1,
            )
        values[col] = val
    try:
        code = _round_label(values[cmap.label_column])
        if not MIN_CODE <= code <= MAX_CODE:
            raise LabelRangeError(f"label {code} outside [{MIN_CODE}, {MAX_CODE}]")
    except LabelRangeError as exc:
        raise LabelRangeError(f"{where}: {exc}") from None
    features = np.array([values[c] for c in cmap.feature_columns], dtype=np.float64)
    return SampleRecord(
        features=features,
        label=ActivityLabel(code),
        subject_id=subject_id,
        sample_index=sample_index,
    )


def scan_log_lines(lines, cmap: ColumnMap, *, subject_id: int = 1,
                   path: str | None = None):
    """Parse every non-blank line, yielding SampleRecord or LineIssue.

    Parsing is total: each non-blank line contributes exactly one item,
    so records + issues account for every line.
    """
    sample_index = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield parse_log_line(
                line, cmap, subject_id=subject_id,
                sample_index=sample_index, line_number=lineno, path=path,
            )
            sample_index += 1
        except SchemaError as exc:
            yield LineIssue(path, lineno, str(exc), "schema")
        except LabelRangeError as exc:
            yield LineIssue(path, lineno, str(exc), "label")
        except ParseError as exc:
            yield LineIssue(path, lineno, str(exc), "parse")


def _locate_failure(path: str, cmap: ColumnMap) -> None:
    """Re-scan a file line by line and raise the first located issue."""
    with open(path, "r", encoding="utf-8") as fh:
        for item in scan_log_lines(fh, cmap, path=path):
            if isinstance(item, LineIssue):
                item.raise_()


def _load_one_file(path: str, cmap: ColumnMap) -> tuple[np.ndarray, np.ndarray]:
    """Load one log file into (features, labels) via the fast numpy path.

    Falls back to the line scanner to produce a precisely located error
    whenever the bulk load or any validation fails.
    """
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # loadtxt warns on empty files
            raw = np.loadtxt(path, dtype=np.float64, comments=None, ndmin=2)
    except ValueError:
        _locate_failure(path, cmap)
        # A ragged file can defeat loadtxt while each line is individually
        # fine for the (smaller) column map; handle it row by row.
        return _load_slow(path, cmap)
    if raw.size == 0:
        return (np.empty((0, cmap.n_features)), np.empty((0,), dtype=np.int64))
    if raw.shape[1] < cmap.source_column_count:
        raise SchemaError(
            f"{path}: expected >= {cmap.source_column_count} columns, found {raw.shape[1]}"
        )
    feats = raw[:, list(cmap.feature_columns)]
    if not np.isfinite(feats).all():
        bad_row, bad_col = np.argwhere(~np.isfinite(feats))[0]
        col = cmap.feature_columns[bad_col]
        raise ParseError(
            f"{path}:{_physical_line(path, int(bad_row))}: non-finite value at column {col + 1}",
            path=path, line=_physical_line(path, int(bad_row)), token=col + 1,
        )
    raw_labels = raw[:, cmap.label_column]
    rounded = np.floor(raw_labels + 0.5)
    bad = ~(np.abs(raw_labels - rounded) <= _LABEL_TOL)
    bad |= (rounded < MIN_CODE) | (rounded > MAX_CODE)
    if bad.any():
        bad_row = int(np.argmax(bad))
        raise LabelRangeError(
            f"{path}:{_physical_line(path, bad_row)}: label value {raw_labels[bad_row]!r} "
            f"invalid (must be an integer in [{MIN_CODE}, {MAX_CODE}])"
        )
    return feats, rounded.astype(np.int64)


def _physical_line(path: str, data_row: int) -> int:
    """Map a parsed row index back to its 1-based physical line number."""
    seen = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                seen += 1
                if seen == data_row:
                    return lineno
    return data_row + 1


def _load_slow(path: str, cmap: ColumnMap) -> tuple[np.ndarray, np.ndarray]:
    feats = []
    labels = []
    with open(path, "r", encoding="utf-8") as fh:
        for item in scan_log_lines(fh, cmap, path=path):
            if isinstance(item, LineIssue):
                item.raise_()
            feats.append(item.features)
            labels.append(item.label.code)
    if not feats:
        return (np.empty((0, cmap.n_features)), np.empty((0,), dtype=np.int64))
    return np.vstack(feats), np.asarray(labels, dtype=np.int64)


def load_dataset(paths, cmap: ColumnMap, subject_ids, *, workers: int = 1) -> LabeledDataset:
    """Load one log file per subject and concatenate in the given order.

    The first parse failure aborts with a file+line message. Files may be
    parsed in parallel but rows always appear in declared file order.
    """
    paths = [str(p) for p in paths]
    subject_ids = [int(s) for s in subject_ids]
    if not paths:
        raise EmptyInputError("no input files given")
    if len(paths) != len(subject_ids):
        raise SchemaError(
            f"{len(paths)} paths but {len(subject_ids)} subject ids (need one per file)"
        )
    for sid in subject_ids:
        if sid < 1:
            raise SchemaError(f"subject id must be >= 1, got {sid}")

    if workers > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda p: _load_one_file(p, cmap), paths))
    else:
        parts = [_load_one_file(p, cmap) for p in paths]

    mats = [feats for feats, _ in parts]
    labs = [lab for _, lab in parts]
    subs = [np.full(len(lab), sid, dtype=np.uint16) for lab, sid in zip(labs, subject_ids)]
    matrix = np.vstack(mats) if mats else np.empty((0, cmap.n_features))
    return LabeledDataset(
        channels=cmap.resolved_channel_names(),
        matrix=matrix,
        labels=np.concatenate(labs) if labs else np.empty((0,), dtype=np.int64),
        subjects=np.concatenate(subs) if subs else np.empty((0,), dtype=np.uint16),
    )


def save_canonical(ds: LabeledDataset, path) -> None:
    """Write a dataset to its canonical binary form (bit-exact reload)."""
    write_container(
        path,
        DATASET_MAGIC,
        header={"kind": "dataset", "channels": list(ds.channels), "n_rows": ds.n_rows},
        arrays={
            "matrix": ds.matrix,
            "labels": ds.labels.astype("|u1"),
            "subjects": ds.subjects.astype("<u2"),
        },
    )


def load_canonical(path) -> LabeledDataset:
    header, arrays = read_container(path, DATASET_MAGIC)
    return LabeledDataset(
        channels=header["channels"],
        matrix=arrays["matrix"],
        labels=arrays["labels"],
        subjects=arrays["subjects"],
    )


def is_canonical_file(path) -> bool:
    try:
        with open(path, "rb") as fh:
            return fh.read(8) == DATASET_MAGIC
    except OSError:
        return False


def export_csv(ds: LabeledDataset, path) -> None:
    """Write the dataset as CSV: channel columns, then label and subject."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join([*ds.channels, "label", "subject"]) + "\n")
        for i in range(ds.n_rows):
            row = [repr(float(v)) for v in ds.matrix[i]]
            row.append(str(int(ds.labels[i])))
            row.append(str(int(ds.subjects[i])))
            fh.write(",".join(row) + "\n")
