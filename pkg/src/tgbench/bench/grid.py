"""Grid expansion: Cartesian products and the named table presets."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

from ..errors import ConfigError
from .config import ExperimentConfig, resolve_config

# (learning rate, activation, optimizer, momentum) rows of the four snapshot-model tables
_ADAM_ROWS = [(lr, act, "adam", None) for act in ("relu", "tanh") for lr in (0.1, 0.01, 0.001, 0.0001)]


def _optimizer_rows(lr: float):
    return [(lr, "tanh", "sgd", None), (lr, "tanh", "sgd_momentum", 0.5),
            (lr, "tanh", "sgd_momentum", 0.9), (lr, "tanh", "rmsprop", None)]


SNAPSHOT_TABLES = {
    "table_4_1_2": ("gconv_gru", _ADAM_ROWS + _optimizer_rows(0.0001)),
    "table_4_1_3": ("gconv_lstm", _ADAM_ROWS + _optimizer_rows(0.1)),
    "table_4_1_4": ("evolvegcn_o", _ADAM_ROWS + _optimizer_rows(0.0001)),
    "table_4_1_5": ("evolvegcn_h", _ADAM_ROWS + _optimizer_rows(0.001)),
}

LAG_MODELS = ("gconv_lstm", "gconv_gru", "evolvegcn_o", "evolvegcn_h")
LAGS = (4, 6, 8)

TGN_ROWS = [
    ("TGN-attn", {"embedding": "attention", "aggregator": "last", "use_memory": True, "layers": 1}),
    ("TGN-id", {"embedding": "identity", "aggregator": "last", "use_memory": True, "layers": 1}),
    ("TGN-time", {"embedding": "time", "aggregator": "last", "use_memory": True, "layers": 1}),
    ("TGN-sum", {"embedding": "sum", "aggregator": "last", "use_memory": True, "layers": 1}),
    ("TGN-mean", {"embedding": "attention", "aggregator": "mean", "use_memory": True, "layers": 1}),
    ("TGN-l2", {"embedding": "attention", "aggregator": "last", "use_memory": True, "layers": 2}),
    ("TGN-no mem", {"embedding": "attention", "aggregator": "last", "use_memory": False, "layers": 1}),
]

TGAT_ROWS = [
    ("TGAT - attn", {"agg_method": "attn", "attn_mode": "prod", "time_mode": "time", "lr": 0.0001}),
    ("TGAT-lstm", {"agg_method": "lstm", "attn_mode": "prod", "time_mode": "time", "lr": 0.0001}),
    ("TGAT-mean", {"agg_method": "mean", "attn_mode": "prod", "time_mode": "time", "lr": 0.0001}),
    ("TGAT-map", {"agg_method": "attn", "attn_mode": "map", "time_mode": "time", "lr": 0.0001}),
    ("TGAT-pos", {"agg_method": "attn", "attn_mode": "prod", "time_mode": "pos", "lr": 0.0001}),
    ("TGAT-empty", {"agg_method": "attn", "attn_mode": "prod", "time_mode": "empty", "lr": 0.0001}),
    ("TGAT-0.00001", {"agg_method": "attn", "attn_mode": "prod", "time_mode": "time", "lr": 0.00001}),
    ("TGAT-0.001", {"agg_method": "attn", "attn_mode": "prod", "time_mode": "time", "lr": 0.001}),
    ("TGAT-0.01", {"agg_method": "attn", "attn_mode": "prod", "time_mode": "time", "lr": 0.01}),
]

PRESETS = ("table_4_1_2", "table_4_1_3", "table_4_1_4", "table_4_1_5", "table_5_1", "table_5_3",
           "table_4_1_1_lags")


@dataclass
class GridSpec:
    """A base config plus varied fields, or a named preset (which ignores ``vary`` for its own columns)."""

    base: dict[str, Any] = field(default_factory=dict)
    vary: dict[str, list] = field(default_factory=dict)
    preset: str = ""


def preset_rows(preset: str) -> list[dict[str, Any]]:
    """The raw config overrides of a preset, one mapping per table row."""
    if preset in SNAPSHOT_TABLES:
        model, rows = SNAPSHOT_TABLES[preset]
        return [{"task": "snapshot", "model": model, "lr": lr, "activation": act, "optimizer": opt,
                 "momentum": mom, "lag": 8} for lr, act, opt, mom in rows]
    if preset == "table_4_1_1_lags":
        return [{"task": "snapshot", "model": m, "lag": lag, "lr": 0.01, "activation": "relu",
                 "optimizer": "adam"} for m in LAG_MODELS for lag in LAGS]
    if preset == "table_5_1":
        return [{"task": "link", "model": "tgn", "name": name, "lr": 0.0001, **row} for name, row in TGN_ROWS]
    if preset == "table_5_3":
        return [{"task": "link", "model": "tgat", "name": name, **row} for name, row in TGAT_ROWS]
    raise ConfigError(f"unknown preset {preset!r}; expected one of {PRESETS}")


def _product(vary: dict[str, list]) -> list[dict[str, Any]]:
    if not vary:
        return [{}]
    keys = sorted(vary)
    for k in keys:
        if not isinstance(vary[k], list) or not vary[k]:
            raise ConfigError(f"vary.{k}: expected a non-empty list")
    return [dict(zip(keys, combo)) for combo in itertools.product(*(vary[k] for k in keys))]


def expand_grid(spec: GridSpec) -> list[ExperimentConfig]:
    """Preset rows (or a single base row) crossed with the Cartesian product of ``vary``."""
    rows = preset_rows(spec.preset) if spec.preset else [{}]
    out = []
    for row in rows:
        for combo in _product(spec.vary):
            raw = {**spec.base, **row, **combo}
            if spec.preset:
                raw["preset"] = spec.preset
            out.append(resolve_config(raw))
    if not out:
        raise ConfigError("grid expansion is empty")
    return out
