"""Command-line interface.

Subcommands: ingest, synth, inspect, compare, train, evaluate, predict.
Flag values override config-file values, which override built-in
defaults. Set HARBENCH_VERBOSE=1 for progress logging.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import ingest
from .config import RunConfig, build_run_config, load_config_file
from .dataset import MHEALTH_COLUMN_MAP, ColumnMap
from .errors import ConfigError, HarbenchError
from .learners import MODEL_KINDS, ModelSpec, load_model, save_model, train
from .labels import label_name
from .metrics import confusion_csv, evaluate, report_to_json, table_csv
from .preprocess import (
    FilterSpec,
    filter_signals,
    normalize_filter_kind,
    run_pipeline,
)
from .synth import SyntheticSpec, generate

log = logging.getLogger("harbench")


def _stage(name: str, fn, *args, **kwargs):
    """Run one pipeline stage, tagging any toolkit error with its name."""
    try:
        return fn(*args, **kwargs)
    except HarbenchError as exc:
        exc.args = (f"[{name}] {exc}",) + exc.args[1:]
        raise


def _add_preprocess_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--filter", choices=["mavg", "median", "none"], default=None)
    p.add_argument("--filter-window", type=int, default=None)
    p.add_argument("--label-shift", type=int, default=None)
    p.add_argument("--trim-radius", type=int, default=None)
    p.add_argument("--keep-null", action="store_true",
                   help="keep null-labeled rows instead of dropping them")
    p.add_argument("--windowed", action="store_true")
    p.add_argument("--window-len", type=int, default=None)
    p.add_argument("--window-stride", type=int, default=None)
    p.add_argument("--split-mode", choices=["stratified", "subject"], default=None)
    p.add_argument("--train-fraction", type=float, default=None)


def _flag_overrides(args: argparse.Namespace) -> dict[str, str]:
    mapping = {
        "filter": "filter",
        "filter_window": "filter_window",
        "label_shift": "label_shift",
        "trim_radius": "trim_radius",
        "window_len": "window_len",
        "window_stride": "window_stride",
        "split_mode": "split_mode",
        "train_fraction": "train_fraction",
        "seed": "seed",
        "models": "models",
        "jobs": "jobs",
    }
    out: dict[str, str] = {}
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            out[key] = str(value)
    if getattr(args, "windowed", False):
        out["windowed"] = "true"
    if getattr(args, "keep_null", False):
        out["drop_null"] = "false"
    if getattr(args, "save_models", False):
        out["save_models"] = "true"
    return out


def _column_map(args: argparse.Namespace) -> ColumnMap:
    if getattr(args, "feature_columns", None):
        cols = tuple(int(c) for c in args.feature_columns.split(","))
        return ColumnMap(
            source_column_count=args.source_columns,
            feature_columns=cols,
            label_column=args.label_column,
        )
    return MHEALTH_COLUMN_MAP


def _load_any_dataset(path):
    if ingest.is_canonical_file(path):
        return ingest.load_canonical(path)
    raise ConfigError(
        f"{path} is not a canonical dataset file; run `harbench ingest` first"
    )


def cmd_ingest(args) -> int:
    cmap = _column_map(args)
    paths = [str(p) for p in args.logs]
    if args.subject_ids:
        sids = [int(s) for s in args.subject_ids.split(",")]
    else:
        sids = list(range(1, len(paths) + 1))
    ds = _stage("ingest", ingest.load_dataset, paths, cmap, sids, workers=args.jobs or 1)
    _stage("write", ingest.save_canonical, ds, args.out)
    if args.csv:
        _stage("write", ingest.export_csv, ds, args.csv)
    print(f"ingested {ds.n_rows} rows x {ds.n_channels} channels -> {args.out}")
    return 0


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n_classes=args.classes,
        n_features=args.features,
        samples_per_class=args.samples_per_class,
        cluster_separation=args.separation,
        noise_std=args.noise,
        seed=args.seed or 0,
    )
    ds = _stage("synth", generate, spec)
    _stage("write", ingest.save_canonical, ds, args.out)
    print(f"wrote {ds.n_rows} synthetic rows -> {args.out}")
    return 0


def cmd_inspect(args) -> int:
    from . import plots

    ds = _stage("load", _load_any_dataset, args.dataset)
    start = args.start
    end = args.end if args.end is not None else ds.n_rows
    if not (0 <= start < end <= ds.n_rows):
        raise ConfigError(
            f"range [{start}, {end}) out of bounds for {ds.n_rows} rows"
        )
    wanted = [c.strip() for c in (args.channels or "").split(",") if c.strip()]
    if not wanted:
        raise ConfigError("no channels selected (use --channels name1,name2,...)")
    indices = []
    for name in wanted:
        if name in ds.channels:
            indices.append(ds.channels.index(name))
        elif name.isdigit() and int(name) < ds.n_channels:
            indices.append(int(name))
        else:
            raise ConfigError(f"unknown channel {name!r}; have {list(ds.channels)}")

    fspec = FilterSpec(
        kind=normalize_filter_kind(args.filter or "moving_average"),
        window=args.filter_window or 25,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    index = np.arange(start, end, dtype=np.float64)
    raw = {ds.channels[i]: ds.matrix[start:end, i] for i in indices}
    _stage("plot", plots.plot_channels, out / "raw.svg", out / "raw.csv",
           index, raw, "raw data")
    filtered_ds = _stage("filter", filter_signals, ds, fspec)
    filt = {ds.channels[i]: filtered_ds.matrix[start:end, i] for i in indices}
    _stage("plot", plots.plot_channels, out / "filtered.svg", out / "filtered.csv",
           index, filt, f"filtered data ({fspec.kind}, window {fspec.window})")
    _stage("plot", plots.plot_label_trace, out / "labels.svg", out / "labels.csv",
           index, ds.labels[start:end].astype(np.float64), args.ref_change,
           "label trace")
    print(f"wrote raw/filtered/label plots -> {out}")
    return 0


def _compare_config(args) -> RunConfig:
    kv: dict[str, str] = {}
    if args.config:
        kv.update(load_config_file(args.config))
    kv.update(_flag_overrides(args))
    if args.dataset:
        kv["dataset"] = str(args.dataset)
    return build_run_config(kv, out_dir=str(args.out) if args.out else None)


def cmd_compare(args) -> int:
    config = _compare_config(args)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if config.dataset is not None:
        ds = _stage("load", _load_any_dataset, config.dataset)
    else:
        cmap = _column_map(args)
        ds = _stage("load", ingest.load_dataset, config.raw_paths, cmap,
                    config.subject_ids or range(1, len(config.raw_paths) + 1))
    log.info("loaded %d rows x %d channels", ds.n_rows, ds.n_channels)

    train_ds, test_ds = _stage("preprocess", run_pipeline, ds, config.preprocess)
    log.info("split: %d train / %d test rows", train_ds.n_rows, test_ds.n_rows)

    context = {
        "preprocess": config.preprocess.to_text().strip().splitlines(),
        "seed": config.seed,
        "train_rows": train_ds.n_rows,
        "test_rows": test_ds.n_rows,
    }
    reports = []
    for spec in config.model_specs():
        t0 = time.perf_counter()
        model = _stage(f"train:{spec.kind}", train, spec, train_ds)
        report = _stage(f"evaluate:{spec.kind}", evaluate, model, test_ds,
                        context=context)
        reports.append(report)
        log.info("%s: accuracy %.4f (%.1fs)", spec.kind, report.accuracy,
                 time.perf_counter() - t0)
        (out / f"{spec.kind}_report.json").write_text(report_to_json(report),
                                                      encoding="utf-8")
        (out / f"{spec.kind}_confusion.csv").write_text(confusion_csv(report.confusion),
                                                        encoding="utf-8")
        if config.save_models:
            _stage(f"save:{spec.kind}", save_model, model, out / f"{spec.kind}.model")

    (out / "metrics.csv").write_text(table_csv(reports), encoding="utf-8")
    (out / "run_config.txt").write_text(config.to_text(), encoding="utf-8")
    from . import plots
    _stage("plot", plots.plot_metric_bars, out / "metrics_bars.svg",
           out / "metrics_bars.csv", reports)
    print(table_csv(reports), end="")
    print(f"reports written to {out}")
    return 0


def cmd_train(args) -> int:
    ds = _stage("load", _load_any_dataset, args.dataset)
    kv: dict[str, str] = {}
    if args.config:
        kv.update(load_config_file(args.config))
    from .config import model_params_from_mapping

    params = model_params_from_mapping(kv).get(args.model, {})
    spec = ModelSpec(kind=args.model, params=params, seed=args.seed or 0)
    model = _stage("train", train, spec, ds)
    _stage("save", save_model, model, args.out)
    print(f"trained {args.model} on {ds.n_rows} rows -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    model = _stage("load", load_model, args.model_file)
    ds = _stage("load", _load_any_dataset, args.dataset)
    report = _stage("evaluate", evaluate, model, ds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{model.kind}_report.json").write_text(report_to_json(report), encoding="utf-8")
    (out / f"{model.kind}_confusion.csv").write_text(confusion_csv(report.confusion),
                                                     encoding="utf-8")
    (out / "metrics.csv").write_text(table_csv([report]), encoding="utf-8")
    print(table_csv([report]), end="")
    return 0


def cmd_predict(args) -> int:
    model = _stage("load", load_model, args.model_file)
    ds = _stage("load", _load_any_dataset, args.dataset)
    header = ["index", "code", "name"] + [f"score_{c}" for c in model.class_codes]
    lines = [",".join(header)]
    if ds.n_rows:
        if ds.n_channels != model.n_features:
            raise ConfigError(
                f"model expects {model.n_features} features, dataset has {ds.n_channels}"
            )
        scores = _stage("predict", model.predict_scores, ds.matrix)
        codes = model.class_codes[np.argmax(scores, axis=1)]
        for i in range(ds.n_rows):
            code = int(codes[i])
            name = label_name(code) if 0 <= code <= 12 else str(code)
            lines.append(",".join(
                [str(i), str(code), name] + [repr(float(s)) for s in scores[i]]
            ))
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {ds.n_rows} predictions -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harbench",
        description="Wearable-sensor activity classification benchmark toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse raw sensor logs into a canonical dataset")
    p.add_argument("logs", nargs="+", help="log files, one per subject")
    p.add_argument("--subject-ids", default=None, help="comma-separated ids, one per file")
    p.add_argument("--out", required=True, help="canonical dataset output path")
    p.add_argument("--csv", default=None, help="also export the dataset as CSV")
    p.add_argument("--source-columns", type=int, default=24)
    p.add_argument("--feature-columns", default=None,
                   help="comma-separated 0-based column indices")
    p.add_argument("--label-column", type=int, default=23)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic Gaussian-cluster dataset")
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--features", type=int, default=12)
    p.add_argument("--samples-per-class", type=int, default=400)
    p.add_argument("--separation", type=float, default=10.0)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("inspect", help="plot raw/filtered channels and the label trace")
    p.add_argument("--dataset", required=True)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--end", type=int, default=None)
    p.add_argument("--channels", default=None, help="channel names or indices")
    p.add_argument("--filter", choices=["mavg", "median", "none"], default=None)
    p.add_argument("--filter-window", type=int, default=None)
    p.add_argument("--ref-change", type=int, default=None,
                   help="reference activity-change index to overlay on the label trace")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_inspect)

    p = sub.add_parser("compare", help="train and evaluate models on one shared split")
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--dataset", default=None, help="canonical dataset file")
    p.add_argument("--models", default=None,
                   help=f"comma-separated subset of {','.join(MODEL_KINDS)}")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--save-models", action="store_true")
    p.add_argument("--jobs", type=int, default=None)
    _add_preprocess_flags(p)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("train", help="train one model on a canonical dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True, choices=list(MODEL_KINDS))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="config file with model.<kind>.<param> keys")
    p.add_argument("--out", required=True, help="model file output path")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a saved model on a canonical dataset")
    p.add_argument("--model-file", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("predict", help="batch-score a canonical dataset with a saved model")
    p.add_argument("--model-file", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="predictions CSV path")
    p.set_defaults(fn=cmd_predict)

    return parser


def main(argv=None) -> int:
    level = logging.INFO if os.environ.get("HARBENCH_VERBOSE") else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except HarbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
