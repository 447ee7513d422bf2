"""Confusion-matrix construction and the four reported metrics.

Per class c (one-vs-rest): sensitivity TP/(TP+FN), specificity
TN/(TN+FP), precision TP/(TP+FP), F1 = harmonic mean of precision and
sensitivity. A zero denominator makes the metric 0 and flags it as
undefined rather than dropping the class silently. Macro averages are
unweighted means over classes with nonzero support; micro and weighted
variants are computed alongside for diagnosis. All stored values are
fractions in [0, 1] - percent rendering is presentation-only.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .dataset import LabeledDataset
from .errors import DimensionMismatchError, EmptyInputError, SchemaError
from .labels import label_name


@dataclass(frozen=True)
class ConfusionMatrix:
    """K x K counts; rows are true classes, columns predicted classes."""

    class_codes: tuple[int, ...]
    counts: np.ndarray

    def __post_init__(self):
        codes = tuple(int(c) for c in self.class_codes)
        object.__setattr__(self, "class_codes", codes)
        counts = np.asarray(self.counts, dtype=np.int64)
        k = len(codes)
        if counts.shape != (k, k):
            raise SchemaError(f"counts must be {k}x{k}, got {counts.shape}")
        if (counts < 0).any():
            raise SchemaError("confusion counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def build_confusion(true_labels, predicted_labels, class_codes) -> ConfusionMatrix:
    """Count true-vs-predicted pairs over the given class-code order."""
    t = np.asarray(true_labels, dtype=np.int64)
    p = np.asarray(predicted_labels, dtype=np.int64)
    if t.shape != p.shape or t.ndim != 1:
        raise SchemaError(
            f"label vectors must be equal-length 1-D, got {t.shape} and {p.shape}"
        )
    if t.size == 0:
        raise EmptyInputError("cannot build a confusion matrix from zero samples")
    codes = np.asarray(sorted(int(c) for c in class_codes), dtype=np.int64)
    if np.unique(codes).size != codes.size:
        raise SchemaError("class_codes must be unique")
    ti = np.searchsorted(codes, t)
    pi = np.searchsorted(codes, p)
    bad_t = (ti >= codes.size) | (codes[np.minimum(ti, codes.size - 1)] != t)
    bad_p = (pi >= codes.size) | (codes[np.minimum(pi, codes.size - 1)] != p)
    if bad_t.any() or bad_p.any():
        which = t[bad_t][0] if bad_t.any() else p[bad_p][0]
        raise SchemaError(f"label code {int(which)} not in class_codes {codes.tolist()}")
    k = codes.size
    counts = np.bincount(ti * k + pi, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(tuple(codes.tolist()), counts)


@dataclass(frozen=True)
class ClassMetrics:
    sensitivity: float
    specificity: float
    precision: float
    f1: float
    support: int
    undefined: tuple[str, ...] = ()


@dataclass(frozen=True)
class MetricsReport:
    model_name: str
    accuracy: float
    macro_sensitivity: float
    macro_specificity: float
    macro_f1: float
    micro_sensitivity: float
    micro_specificity: float
    micro_f1: float
    weighted_sensitivity: float
    weighted_specificity: float
    weighted_f1: float
    per_class: dict[int, ClassMetrics]
    confusion: ConfusionMatrix
    model_spec: dict | None = None
    context: dict = field(default_factory=dict)


def _safe_div(num: float, den: float, flags: list[str], name: str) -> float:
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def compute_metrics(cm: ConfusionMatrix, model_name: str = "",
                    model_spec: dict | None = None,
                    context: dict | None = None) -> MetricsReport:
    """All reported metrics of one confusion matrix."""
    total = cm.total
    if total == 0:
        raise EmptyInputError("metrics are undefined on an empty confusion matrix")
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    row = counts.sum(axis=1)
    col = counts.sum(axis=0)
    fn = row - tp
    fp = col - tp
    tn = total - tp - fn - fp

    per_class: dict[int, ClassMetrics] = {}
    sens = np.zeros(len(cm.class_codes))
    spec = np.zeros(len(cm.class_codes))
    f1 = np.zeros(len(cm.class_codes))
    for i, code in enumerate(cm.class_codes):
        flags: list[str] = []
        s = _safe_div(tp[i], tp[i] + fn[i], flags, "sensitivity")
        sp = _safe_div(tn[i], tn[i] + fp[i], flags, "specificity")
        pr = _safe_div(tp[i], tp[i] + fp[i], flags, "precision")
        f = _safe_div(2.0 * pr * s, pr + s, flags, "f1")
        per_class[code] = ClassMetrics(
            sensitivity=s, specificity=sp, precision=pr, f1=f,
            support=int(row[i]), undefined=tuple(flags),
        )
        sens[i], spec[i], f1[i] = s, sp, f

    supported = row > 0
    if not supported.any():
        raise EmptyInputError("no class has nonzero support")
    accuracy = float(tp.sum() / total)
    weights = row[supported] / row[supported].sum()

    micro_prec = _safe_div(tp.sum(), tp.sum() + fp.sum(), [], "")
    micro_sens = _safe_div(tp.sum(), tp.sum() + fn.sum(), [], "")
    report = MetricsReport(
        model_name=model_name,
        accuracy=accuracy,
        macro_sensitivity=float(sens[supported].mean()),
        macro_specificity=float(spec[supported].mean()),
        macro_f1=float(f1[supported].mean()),
        micro_sensitivity=float(micro_sens),
        micro_specificity=float(_safe_div(tn.sum(), tn.sum() + fp.sum(), [], "")),
        micro_f1=float(_safe_div(2 * micro_prec * micro_sens,
                                 micro_prec + micro_sens, [], "")),
        weighted_sensitivity=float((sens[supported] * weights).sum()),
        weighted_specificity=float((spec[supported] * weights).sum()),
        weighted_f1=float((f1[supported] * weights).sum()),
        per_class=per_class,
        confusion=cm,
        model_spec=model_spec,
        context=dict(context or {}),
    )
    return report


def evaluate(model, test: LabeledDataset, *, model_name: str | None = None,
             context: dict | None = None) -> MetricsReport:
    """Predict every test row and compute the metric report.

    The confusion matrix covers the union of train-time and test-time
    class codes so missed classes show up with zero rows/columns.
    """
    if test.n_rows == 0:
        raise EmptyInputError("cannot evaluate on an empty test set")
    if test.n_channels != model.n_features:
        raise DimensionMismatchError(
            f"model expects {model.n_features} features, test set has {test.n_channels}"
        )
    predicted = model.predict(test.matrix)
    codes = np.union1d(model.class_codes, np.unique(test.labels).astype(np.int64))
    cm = build_confusion(test.labels, predicted, codes)
    return compute_metrics(
        cm,
        model_name=model_name if model_name is not None else model.kind,
        model_spec=model.spec.to_dict(),
        context=context,
    )


def percent(value: float) -> str:
    """Two-decimal percent with half-up rounding (rendering only)."""
    return str(Decimal(value * 100.0).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


TABLE_COLUMNS = ("Model", "Accuracy (%)", "Sensitivity (%)", "Specificity (%)", "F-1 Score (%)")


def table_csv(reports: list[MetricsReport]) -> str:
    """Comparison table, one row per model, in the reported column order."""
    lines = [",".join(TABLE_COLUMNS)]
    for r in reports:
        lines.append(",".join([
            r.model_name,
            percent(r.accuracy),
            percent(r.macro_sensitivity),
            percent(r.macro_specificity),
            percent(r.macro_f1),
        ]))
    return "\n".join(lines) + "\n"


def confusion_csv(cm: ConfusionMatrix) -> str:
    header = ["true\\pred"] + [str(c) for c in cm.class_codes]
    lines = [",".join(header)]
    for i, code in enumerate(cm.class_codes):
        lines.append(",".join([str(code)] + [str(int(v)) for v in cm.counts[i]]))
    return "\n".join(lines) + "\n"


def report_to_dict(r: MetricsReport) -> dict:
    return {
        "model_name": r.model_name,
        "accuracy": r.accuracy,
        "macro": {
            "sensitivity": r.macro_sensitivity,
            "specificity": r.macro_specificity,
            "f1": r.macro_f1,
        },
        "micro": {
            "sensitivity": r.micro_sensitivity,
            "specificity": r.micro_specificity,
            "f1": r.micro_f1,
        },
        "weighted": {
            "sensitivity": r.weighted_sensitivity,
            "specificity": r.weighted_specificity,
            "f1": r.weighted_f1,
        },
        "per_class": {
            str(code): {
                "name": label_name(code) if 0 <= code <= 12 else str(code),
                "sensitivity": m.sensitivity,
                "specificity": m.specificity,
                "precision": m.precision,
                "f1": m.f1,
                "support": m.support,
                "undefined": list(m.undefined),
            }
            for code, m in r.per_class.items()
        },
        "confusion": {
            "class_codes": list(r.confusion.class_codes),
            "counts": r.confusion.counts.tolist(),
        },
        "model_spec": r.model_spec,
        "context": r.context,
    }


def report_to_json(r: MetricsReport) -> str:
    return json.dumps(report_to_dict(r), indent=2, sort_keys=True) + "\n"
