"""Run configuration: key=value config files merged with CLI flags.

Precedence, lowest to highest: built-in defaults, config file, CLI
flags. A config file is flat `key = value` text; blank lines and
`#` comments are ignored. Model hyperparameters use dotted keys, e.g.
`model.gradient_boost.n_rounds = 20`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .learners import DEFAULT_PARAMS, MODEL_KINDS, ModelSpec, derive_model_seed
from .preprocess import PreprocessSpec

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"config line {lineno}: empty key")
        out[key] = value
    return out


def load_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


def _parse_bool(value: str, key: str) -> bool:
    v = value.lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def _coerce(kind: str, name: str, value: str):
    default = DEFAULT_PARAMS[kind].get(name)
    if name not in DEFAULT_PARAMS[kind]:
        raise ConfigError(f"model.{kind}.{name}: unknown hyperparameter")
    if isinstance(default, bool):
        return _parse_bool(value, f"model.{kind}.{name}")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    # string-or-None settings such as max_features
    if value.lower() in ("none", "null"):
        return None
    try:
        return int(value)
    except ValueError:
        return value


def model_params_from_mapping(kv: dict[str, str]) -> dict[str, dict]:
    """Extract per-kind hyperparameter overrides from dotted config keys."""
    params: dict[str, dict] = {kind: {} for kind in MODEL_KINDS}
    for key, value in kv.items():
        if not key.startswith("model."):
            continue
        parts = key.split(".")
        if len(parts) != 3:
            raise ConfigError(f"{key}: expected model.<kind>.<param>")
        _, kind, name = parts
        if kind not in MODEL_KINDS:
            raise ConfigError(f"{key}: unknown model kind {kind!r}")
        params[kind][name] = _coerce(kind, name, value)
    return params


@dataclass(frozen=True)
class RunConfig:
    """Everything one comparison run needs, reproducibly."""

    models: tuple[str, ...]
    preprocess: PreprocessSpec
    out_dir: str
    seed: int = 0
    dataset: str | None = None          # canonical dataset file
    raw_paths: tuple[str, ...] = ()     # or raw logs ...
    subject_ids: tuple[int, ...] = ()   # ... one subject id per raw path
    model_params: dict = field(default_factory=dict)
    save_models: bool = False
    jobs: int = 1

    def __post_init__(self):
        if not self.models:
            raise ConfigError("at least one model is required")
        for kind in self.models:
            if kind not in MODEL_KINDS:
                raise ConfigError(f"unknown model kind {kind!r} (choose from {MODEL_KINDS})")
        if self.dataset is None and not self.raw_paths:
            raise ConfigError("either a canonical dataset or raw log paths are required")

    def model_specs(self) -> list[ModelSpec]:
        """One spec per model, RNG derived from (run seed, model kind)."""
        specs = []
        for kind in self.models:
            params = dict(self.model_params.get(kind, {}))
            if self.jobs > 1 and kind in ("random_forest", "gradient_boost"):
                params.setdefault("n_jobs", self.jobs)
            specs.append(ModelSpec(
                kind=kind, params=params, seed=derive_model_seed(self.seed, kind),
            ))
        return specs

    def to_text(self) -> str:
        """Exact, reloadable key=value form (embedded in every report)."""
        lines = ["# harbench run configuration"]
        if self.dataset is not None:
            lines.append(f"dataset = {self.dataset}")
        if self.raw_paths:
            lines.append("raw_paths = " + ",".join(self.raw_paths))
            lines.append("subject_ids = " + ",".join(str(s) for s in self.subject_ids))
        lines.append(f"out = {self.out_dir}")
        lines.append(f"seed = {self.seed}")
        lines.append("models = " + ",".join(self.models))
        lines.append(f"save_models = {'true' if self.save_models else 'false'}")
        lines.append(f"jobs = {self.jobs}")
        lines.append(self.preprocess.to_text().rstrip("\n"))
        for kind in sorted(self.model_params):
            for name, value in sorted(self.model_params[kind].items()):
                lines.append(f"model.{kind}.{name} = {value}")
        return "\n".join(lines) + "\n"


def build_run_config(kv: dict[str, str], *, out_dir: str | None = None) -> RunConfig:
    """RunConfig from a merged key=value mapping (defaults already applied)."""
    models = tuple(
        m.strip() for m in kv.get("models", ",".join(MODEL_KINDS)).split(",") if m.strip()
    )
    seed = int(kv.get("seed", 0))
    pspec = PreprocessSpec.from_mapping(kv).with_seed(seed)
    raw_paths = tuple(p.strip() for p in kv.get("raw_paths", "").split(",") if p.strip())
    subject_ids = tuple(
        int(s) for s in kv.get("subject_ids", "").split(",") if s.strip()
    )
    if raw_paths and not subject_ids:
        subject_ids = tuple(range(1, len(raw_paths) + 1))
    return RunConfig(
        models=models,
        preprocess=pspec,
        out_dir=out_dir or kv.get("out", "harbench-out"),
        seed=seed,
        dataset=kv.get("dataset"),
        raw_paths=raw_paths,
        subject_ids=subject_ids,
        model_params=model_params_from_mapping(kv),
        save_models=_parse_bool(kv.get("save_models", "false"), "save_models"),
        jobs=int(kv.get("jobs", 1)),
    )
