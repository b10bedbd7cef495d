"""Experiment configuration: JSON schema, defaults, and validation."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Optional, Union

from ..autodiff.optim import canonical_optimizer
from ..errors import ConfigError
from ..snapshot.models import ACTIVATIONS, SNAPSHOT_MODELS

TASKS = ("snapshot", "link", "node_regression")
EVENT_MODELS = ("tgn", "tgat")
FORMATS = ("auto", "dtdg_json", "jodie_csv", "event_csv")
SEED_ENV = "TGBENCH_SEED"

_NUM = (int, float)


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved run description.

    ``None`` never survives :func:`resolve_config` except for fields that are
    genuinely optional (``momentum``, ``max_events``, ``event_cap``, ``name``).
    Defaults follow the baseline snapshot protocol (lag 8, 200 epochs, lr
    0.01, ReLU, Adam) and the event-model hyperparameter table (TGN: batch
    200, dropout 0.1, lr 1e-4; TGAT: batch 256, hidden 64, dropout 0.5).
    """

    task: str = "snapshot"
    dataset: str = ""
    format: str = "auto"
    model: Optional[str] = None
    name: Optional[str] = None
    preset: str = ""
    seed: int = 0
    out_dir: str = "runs"
    # shared training fields
    epochs: Optional[int] = None
    lr: Optional[float] = None
    optimizer: str = "adam"
    momentum: Optional[float] = None
    # snapshot fields
    lag: int = 8
    activation: str = "relu"
    hidden: Optional[int] = None
    K: int = 2
    train_ratio: float = 0.8
    step_mode: str = "epoch"
    standardize: str = "global"
    # event fields
    embedding: str = "attention"
    aggregator: str = "last"
    use_memory: bool = True
    layers: Optional[int] = None
    heads: int = 2
    d_mem: int = 172
    d_emb: int = 100
    d_time: int = 100
    neighbors: int = 10
    dropout: Optional[float] = None
    batch_size: Optional[int] = None
    patience: int = 10
    unseen_fraction: float = 0.1
    val_ratio: float = 0.15
    test_ratio: float = 0.15
    max_events: Optional[int] = None
    event_cap: Optional[int] = None
    feature_norm: bool = True
    resample_negatives: bool = True
    agg_method: str = "attn"
    attn_mode: str = "prod"
    time_mode: str = "time"

    @property
    def is_event(self) -> bool:
        return self.task in ("link", "node_regression")

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def run_id(self) -> str:
        """Stable hash of everything that affects results (the output directory does not)."""
        d = self.to_dict()
        d.pop("out_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def replace(self, **changes) -> "ExperimentConfig":
        d = self.to_dict()
        d.update(changes)
        return resolve_config(d)


_TYPES: dict[str, tuple] = {
    "task": (str,), "dataset": (str,), "format": (str,), "model": (str, type(None)),
    "name": (str, type(None)), "preset": (str,), "seed": (int,), "out_dir": (str,),
    "epochs": (int, type(None)), "lr": (*_NUM, type(None)), "optimizer": (str,),
    "momentum": (*_NUM, type(None)), "lag": (int,), "activation": (str,), "hidden": (int, type(None)),
    "K": (int,), "train_ratio": _NUM, "step_mode": (str,), "standardize": (str,),
    "embedding": (str,), "aggregator": (str,), "use_memory": (bool,), "layers": (int, type(None)),
    "heads": (int,), "d_mem": (int,), "d_emb": (int,), "d_time": (int,), "neighbors": (int,),
    "dropout": (*_NUM, type(None)), "batch_size": (int, type(None)), "patience": (int,),
    "unseen_fraction": _NUM, "val_ratio": _NUM, "test_ratio": _NUM, "max_events": (int, type(None)),
    "event_cap": (int, type(None)), "feature_norm": (bool,),
    "resample_negatives": (bool,), "agg_method": (str,), "attn_mode": (str,),
    "time_mode": (str,),
}

_CHOICES: dict[str, tuple] = {
    "task": TASKS, "format": FORMATS, "activation": tuple(ACTIVATIONS), "step_mode": ("epoch", "snapshot"),
    "standardize": ("global", "per_node"), "embedding": ("identity", "time", "sum", "attention"),
    "aggregator": ("last", "mean"), "agg_method": ("attn", "lstm", "mean"), "attn_mode": ("prod", "map"),
    "time_mode": ("time", "pos", "empty"),
}

_POSITIVE_INT = ("lag", "K", "heads", "d_mem", "d_emb", "d_time", "neighbors", "patience",
                 "hidden", "batch_size", "max_events", "event_cap")


def _check_type(key: str, value: Any) -> Any:
    allowed = _TYPES[key]
    # bool is an int subclass; only accept it where a bool is expected
    if isinstance(value, bool) and bool not in allowed:
        raise ConfigError(f"{key}: expected {_type_names(allowed)}, got bool")
    if not isinstance(value, allowed):
        raise ConfigError(f"{key}: expected {_type_names(allowed)}, got {type(value).__name__}")
    if float in allowed and isinstance(value, int) and value is not None:
        return float(value)
    return value


def _type_names(types) -> str:
    return " or ".join("null" if t is type(None) else t.__name__ for t in types)


def _defaults(task: str, model: str) -> dict[str, Any]:
    if task == "snapshot":
        return {"epochs": 200, "lr": 0.01, "hidden": 32, "layers": 1, "dropout": 0.0, "batch_size": 0}
    if model == "tgat":
        return {"epochs": 100, "lr": 1e-4, "hidden": 64, "layers": 2, "dropout": 0.5, "batch_size": 256}
    return {"epochs": 100, "lr": 1e-4, "hidden": 0, "layers": 1, "dropout": 0.1, "batch_size": 200}


def resolve_config(raw: dict[str, Any]) -> ExperimentConfig:
    """Validate a raw mapping and fill task-dependent defaults."""
    if not isinstance(raw, dict):
        raise ConfigError(f"config must be a JSON object, got {type(raw).__name__}")
    unknown = sorted(set(raw) - set(_TYPES))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    values = {k: _check_type(k, v) for k, v in raw.items()}
    for key, choices in _CHOICES.items():
        if key in values and values[key] not in choices:
            raise ConfigError(f"{key}: {values[key]!r} is not one of {choices}")
    task = values.get("task", "snapshot")
    model = values.get("model")
    if model is None:
        model = "gconv_gru" if task == "snapshot" else "tgn"
    if task == "snapshot" and model not in SNAPSHOT_MODELS:
        raise ConfigError(f"model: {model!r} is not a snapshot model {SNAPSHOT_MODELS}")
    if task != "snapshot" and model not in EVENT_MODELS:
        raise ConfigError(f"model: task {task!r} needs one of {EVENT_MODELS}, got {model!r}")
    values["model"] = model
    for key, default in _defaults(task, model).items():
        if values.get(key) is None:
            values[key] = default

    if "optimizer" in values:
        try:
            values["optimizer"] = canonical_optimizer(values["optimizer"])
        except ConfigError as exc:
            raise ConfigError(f"optimizer: {exc}") from None
    opt = values.get("optimizer", "adam")
    if opt == "sgd_momentum" and values.get("momentum") is None:
        raise ConfigError("momentum: required when optimizer is sgd_momentum (sgdm)")
    m = values.get("momentum")
    if m is not None and not 0.0 <= m < 1.0:
        raise ConfigError(f"momentum: must lie in [0, 1), got {m}")
    if values["lr"] <= 0:
        raise ConfigError(f"lr: must be positive, got {values['lr']}")
    if values["epochs"] < 0:
        raise ConfigError(f"epochs: must be >= 0, got {values['epochs']}")
    for key in _POSITIVE_INT:
        v = values.get(key)
        if v is not None and v < 1 and not (key in ("hidden", "batch_size") and v == 0):
            raise ConfigError(f"{key}: must be >= 1, got {v}")
    if task != "snapshot" and values["batch_size"] < 1:
        raise ConfigError("batch_size: must be >= 1 for event tasks")
    if task == "snapshot" and values.get("hidden", 1) < 1:
        raise ConfigError("hidden: must be >= 1 for snapshot models")
    if values["layers"] not in (1, 2):
        raise ConfigError(f"layers: must be 1 or 2, got {values['layers']}")
    for key in ("train_ratio",):
        if key in values and not 0.0 < values[key] < 1.0:
            raise ConfigError(f"{key}: must lie in (0, 1), got {values[key]}")
    if "unseen_fraction" in values and not 0.0 <= values["unseen_fraction"] < 1.0:
        raise ConfigError(f"unseen_fraction: must lie in [0, 1), got {values['unseen_fraction']}")
    vr, tr = values.get("val_ratio", 0.15), values.get("test_ratio", 0.15)
    if not (vr > 0 and tr > 0 and vr + tr < 1):
        raise ConfigError("val_ratio/test_ratio: must be positive and sum below 1")
    d = values.get("dropout", 0.0)
    if not 0.0 <= d < 1.0:
        raise ConfigError(f"dropout: must lie in [0, 1), got {d}")
    return ExperimentConfig(**values)


def parse_config(source: Union[str, Path, dict], apply_env: bool = True) -> ExperimentConfig:
    """Load a JSON config file (or an already-decoded mapping) into a resolved config.

    When ``apply_env`` is set, ``TGBENCH_SEED`` replaces the seed.
    """
    if isinstance(source, dict):
        raw = dict(source)
    else:
        path = Path(source)
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"{path}: config file not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if apply_env and os.environ.get(SEED_ENV):
        try:
            raw["seed"] = int(os.environ[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV}: expected an integer, got {os.environ[SEED_ENV]!r}") from None
    return resolve_config(raw)
