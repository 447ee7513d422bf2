"""Static plot emission: SVG figures plus the plotted series as CSV.

Every figure is written twice: a vector-graphics SVG for humans and a
CSV of the exact series behind it so results stay scriptable and
assertable. SVG output is made reproducible (fixed hash salt, no
embedded date).
"""
from __future__ import annotations

import numpy as np

from .metrics import MetricsReport, percent


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "harbench"
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def write_series_csv(path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    n = arrays[0].shape[0]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(repr(float(a[i])) for a in arrays) + "\n")


def plot_channels(path_svg, path_csv, index: np.ndarray,
                  series: dict[str, np.ndarray], title: str) -> None:
    """Line plot of one or more channels over sample index."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(10, 4))
    for name, values in series.items():
        ax.plot(index, values, label=name, linewidth=0.8)
    ax.set_xlabel("sample index")
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize="small")
    fig.tight_layout()
    _save(fig, path_svg)
    plt.close(fig)
    write_series_csv(path_csv, {"index": index, **series})


def plot_label_trace(path_svg, path_csv, index: np.ndarray, labels: np.ndarray,
                     reference_change: int | None, title: str) -> None:
    """Step plot of the label channel, optionally marking a reference
    change index to visualize label lag."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(10, 3))
    ax.step(index, labels, where="post", label="label")
    if reference_change is not None:
        ax.axvline(reference_change, color="red", linestyle="--",
                   label=f"reference change @ {reference_change}")
    ax.set_xlabel("sample index")
    ax.set_ylabel("activity code")
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize="small")
    fig.tight_layout()
    _save(fig, path_svg)
    plt.close(fig)
    write_series_csv(path_csv, {"index": index, "label": labels.astype(np.float64)})


def plot_metric_bars(path_svg, path_csv, reports: list[MetricsReport]) -> None:
    """Grouped bars of the four reported metrics, one group per model."""
    plt = _pyplot()
    metric_names = ("accuracy", "sensitivity", "specificity", "f1")
    rows = []
    for r in reports:
        rows.append((r.model_name, r.accuracy, r.macro_sensitivity,
                     r.macro_specificity, r.macro_f1))

    fig, ax = plt.subplots(figsize=(1.8 * max(len(rows), 2) + 2, 4))
    x = np.arange(len(rows), dtype=np.float64)
    width = 0.2
    for j, metric in enumerate(metric_names):
        vals = [row[1 + j] * 100.0 for row in rows]
        ax.bar(x + (j - 1.5) * width, vals, width, label=metric)
    ax.set_xticks(x)
    ax.set_xticklabels([row[0] for row in rows], rotation=20, ha="right")
    ax.set_ylabel("percent")
    ax.set_ylim(0, 105)
    ax.set_title("model comparison")
    ax.legend(loc="lower right", fontsize="small")
    fig.tight_layout()
    _save(fig, path_svg)
    plt.close(fig)

    with open(path_csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("model," + ",".join(metric_names) + "\n")
        for row in rows:
            fh.write(row[0] + "," + ",".join(percent(v) for v in row[1:]) + "\n")
