"""Flat key/value experiment configs and the sweep plan.

Config files are plain `key = value` lines (# comments allowed). Keys mirror
FederationConfig plus the task block (synthetic generator or CSV paths) and
the sweep block. CLI flags override file values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .data import Dataset, load_csv_dataset, make_synthetic_task
from .errors import ConfigurationError
from .federation import FederationConfig

FED_KEYS = {
    "num_clients": int,
    "rounds": int,
    "learning_rate": float,
    "momentum": float,
    "batch_size": int,
    "local_steps": int,
    "sparsity_fraction": float,
    "method": str,
    "dirichlet_alpha": float,
    "seed": int,
    "classifier_cost": float,
    "feature_cost": float,
    "hidden_dim": int,
}

TASK_KEYS = {
    "train_samples": int,
    "eval_samples": int,
    "num_classes": int,
    "input_dim": int,
    "class_sep": float,
    "data_seed": int,
    "train_csv": str,
    "eval_csv": str,
    "label_column": str,
}

SWEEP_KEYS = {
    "sweep_fractions": str,
    "sweep_methods": str,
    "repetitions": int,
}


@dataclass
class TaskConfig:
    train_samples: int = 8000
    eval_samples: int = 2000
    num_classes: int = 8
    input_dim: int = 32
    class_sep: float = 0.65
    data_seed: int = 0
    train_csv: str | None = None
    eval_csv: str | None = None
    label_column: str = "label"

    def build_datasets(self) -> tuple[Dataset, Dataset]:
        if self.train_csv:
            if not self.eval_csv:
                raise ConfigurationError("train_csv given without eval_csv")
            train = load_csv_dataset(self.train_csv, self.label_column)
            num_classes = max(train.num_classes, self.num_classes)
            train = Dataset(train.features, train.labels, num_classes)
            eval_set = load_csv_dataset(self.eval_csv, self.label_column, num_classes)
            return train, eval_set
        return make_synthetic_task(
            self.train_samples,
            self.eval_samples,
            self.num_classes,
            self.input_dim,
            self.data_seed,
            self.class_sep,
        )


@dataclass
class ExperimentPlan:
    base: FederationConfig
    task: TaskConfig
    fractions: list[float] = field(default_factory=lambda: [0.01, 0.05, 0.10, 0.20])
    methods: list[str] = field(default_factory=lambda: ["topk", "cwmp"])
    repetitions: int = 3

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigurationError("repetitions must be >= 1")
        for f in self.fractions:
            if not 0.0 < f <= 1.0:
                raise ConfigurationError(f"sweep fraction {f} outside (0, 1]")

    def seeds(self) -> list[int]:
        return [self.base.seed + r for r in range(self.repetitions)]


def parse_config_file(path) -> dict[str, str]:
    mapping: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key or not value:
                raise ConfigurationError(f"{path}:{lineno}: expected key = value")
            if key in mapping:
                raise ConfigurationError(f"{path}:{lineno}: duplicate key {key!r}")
            mapping[key] = value
    return mapping


def _coerce(key: str, value: str, kind):
    try:
        return kind(value)
    except ValueError:
        raise ConfigurationError(f"config key {key!r}: cannot parse {value!r} as {kind.__name__}")


def _float_list(value: str) -> list[float]:
    return [float(v) for v in value.split(",") if v.strip()]


def _str_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def plan_from_mapping(mapping: dict[str, str], overrides: dict | None = None) -> ExperimentPlan:
    """Assemble an ExperimentPlan from file keys plus already-typed overrides."""
    fed_kwargs: dict = {}
    task_kwargs: dict = {}
    sweep_kwargs: dict = {}
    for key, value in mapping.items():
        if key in FED_KEYS:
            fed_kwargs[key] = _coerce(key, value, FED_KEYS[key])
        elif key in TASK_KEYS:
            task_kwargs[key] = _coerce(key, value, TASK_KEYS[key])
        elif key in SWEEP_KEYS:
            sweep_kwargs[key] = _coerce(key, value, SWEEP_KEYS[key])
        else:
            raise ConfigurationError(f"unknown config key {key!r}")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in FED_KEYS:
            fed_kwargs[key] = value
        elif key in SWEEP_KEYS:
            sweep_kwargs[key] = value
        else:
            raise ConfigurationError(f"unknown override {key!r}")
    plan_kwargs: dict = {}
    if "sweep_fractions" in sweep_kwargs:
        plan_kwargs["fractions"] = _float_list(str(sweep_kwargs["sweep_fractions"]))
    if "sweep_methods" in sweep_kwargs:
        plan_kwargs["methods"] = _str_list(str(sweep_kwargs["sweep_methods"]))
    if "repetitions" in sweep_kwargs:
        plan_kwargs["repetitions"] = sweep_kwargs["repetitions"]
    return ExperimentPlan(
        base=FederationConfig(**fed_kwargs), task=TaskConfig(**task_kwargs), **plan_kwargs
    )


def load_plan(config_path=None, overrides: dict | None = None) -> ExperimentPlan:
    mapping = parse_config_file(config_path) if config_path else {}
    return plan_from_mapping(mapping, overrides)
