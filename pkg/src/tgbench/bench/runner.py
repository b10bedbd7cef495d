"""Execute configs and write results.csv, results.md, and per-run artifacts."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from pathlib import Path
from statistics import median
from typing import Optional, Sequence, Union

import numpy as np

from ..data import dtdg_to_ctdg, load_dtdg_json, load_event_csv, load_jodie_csv, parse_dtdg
from ..data.events import EventStream
from ..data.snapshots import SnapshotSequence
from ..data.synthetic import covid_like_document, interaction_stream, planted_successor_stream
from ..errors import ConfigError, TGBenchError
from ..event.models import TgatConfig, TgnConfig
from ..train.event_loop import train_event_run
from ..train.report import METRIC_FIELDS, RunReport
from ..train.snapshot_loop import train_snapshot_run
from .config import ExperimentConfig

RESULT_COLUMNS = ("run_id", "preset", "model", "dataset", "lag", "lr", "activation", "optimizer", "embedding",
                  "aggregator", "layers", "seed", "mse", "ap_seen", "ap_unseen", "auc_seen", "auc_unseen",
                  "accuracy", "epochs_run", "wall_seconds", "status")
SYNTHETIC_PREFIX = "synthetic:"


def _detect_format(cfg: ExperimentConfig) -> str:
    if cfg.format != "auto":
        return cfg.format
    if cfg.dataset.startswith(SYNTHETIC_PREFIX):
        return "synthetic"
    suffix = Path(cfg.dataset).suffix.lower()
    if suffix == ".json":
        return "dtdg_json"
    if suffix == ".csv":
        with open(cfg.dataset, newline="") as fh:
            header = fh.readline().strip().split(",")
        return "event_csv" if header[:3] == ["src", "dst", "t"] else "jodie_csv"
    raise ConfigError(f"dataset: cannot infer the format of {cfg.dataset!r}; set 'format'")


def _synthetic_document(name: str, seed: int) -> dict:
    if name != "covid":
        raise ConfigError(f"dataset: synthetic snapshot dataset must be 'synthetic:covid', got {name!r}")
    return covid_like_document(seed=seed)


@lru_cache(maxsize=8)
def _snapshots(dataset: str, fmt: str, lag: int, standardize: str) -> SnapshotSequence:
    if fmt == "synthetic":
        return parse_dtdg(_synthetic_document(dataset[len(SYNTHETIC_PREFIX):], 0), lag, dataset, standardize)
    if fmt != "dtdg_json":
        raise ConfigError(f"dataset: snapshot task needs a DTDG JSON file, got format {fmt!r}")
    return load_dtdg_json(dataset, lag=lag, standardize=standardize)


@lru_cache(maxsize=8)
def _events(dataset: str, fmt: str, lag: int, standardize: str, event_cap: Optional[int]) -> EventStream:
    if fmt == "synthetic":
        name = dataset[len(SYNTHETIC_PREFIX):]
        if name == "interactions":
            return interaction_stream(seed=0, feature_dim=172)
        if name == "planted":
            return planted_successor_stream(seed=0)
        return dtdg_to_ctdg(parse_dtdg(_synthetic_document(name, 0), lag, dataset, standardize), event_cap)
    if fmt == "dtdg_json":
        return dtdg_to_ctdg(load_dtdg_json(dataset, lag=lag, standardize=standardize), event_cap)
    if fmt == "jodie_csv":
        return load_jodie_csv(dataset)
    return load_event_csv(dataset)


def load_snapshots(cfg: ExperimentConfig) -> SnapshotSequence:
    return _snapshots(cfg.dataset, _detect_format(cfg), cfg.lag, cfg.standardize)


def load_events(cfg: ExperimentConfig) -> EventStream:
    stream = _events(cfg.dataset, _detect_format(cfg), cfg.lag, cfg.standardize, cfg.event_cap)
    if cfg.max_events is not None:
        stream = stream.head(cfg.max_events)
    return stream


def model_config(cfg: ExperimentConfig) -> Union[TgnConfig, TgatConfig]:
    if cfg.model == "tgn":
        return TgnConfig(embedding=cfg.embedding, aggregator=cfg.aggregator, use_memory=cfg.use_memory,
                         num_layers=cfg.layers, heads=cfg.heads, d_mem=cfg.d_mem, d_emb=cfg.d_emb,
                         d_time=cfg.d_time, neighbors=cfg.neighbors, dropout=cfg.dropout)
    return TgatConfig(agg_method=cfg.agg_method, attn_mode=cfg.attn_mode, time_mode=cfg.time_mode,
                      num_layers=cfg.layers, hidden=cfg.hidden, dropout=cfg.dropout, heads=cfg.heads,
                      d_time=cfg.d_time, neighbors=cfg.neighbors)


def run_one(cfg: ExperimentConfig) -> RunReport:
    """Run one experiment; failures come back as a report with status "error"."""
    echo = cfg.to_dict()
    try:
        if not cfg.dataset:
            raise ConfigError("dataset: no dataset given")
        if cfg.task == "snapshot":
            return train_snapshot_run(load_snapshots(cfg), cfg.model, lr=cfg.lr, activation=cfg.activation,
                                      optimizer=cfg.optimizer, momentum=cfg.momentum, epochs=cfg.epochs,
                                      seed=cfg.seed, hidden=cfg.hidden, K=cfg.K, train_ratio=cfg.train_ratio,
                                      step_mode=cfg.step_mode, config=echo)
        return train_event_run(load_events(cfg), cfg.model, model_config(cfg), cfg.task, lr=cfg.lr,
                               optimizer=cfg.optimizer, momentum=cfg.momentum, epochs=cfg.epochs,
                               batch_size=cfg.batch_size, patience=cfg.patience, seed=cfg.seed,
                               unseen_fraction=cfg.unseen_fraction, val_ratio=cfg.val_ratio,
                               test_ratio=cfg.test_ratio, feature_norm=cfg.feature_norm,
                               resample_negatives=cfg.resample_negatives, config=echo)
    except (TGBenchError, OSError, ValueError, ArithmeticError) as exc:
        report = RunReport(config=echo, seed=cfg.seed, status="error")
        report.error = f"{type(exc).__name__}: {exc}"
        return report


def result_row(cfg: ExperimentConfig, report: RunReport) -> dict[str, str]:
    row = {
        "run_id": cfg.run_id(), "preset": cfg.preset, "model": cfg.name or cfg.model, "dataset": cfg.dataset,
        "lag": str(cfg.lag), "lr": repr(cfg.lr), "activation": cfg.activation,
        "optimizer": optimizer_label(cfg), "embedding": cfg.embedding if cfg.model == "tgn" else "",
        "aggregator": cfg.aggregator if cfg.model == "tgn" and cfg.use_memory else "",
        "layers": str(cfg.layers), "seed": str(cfg.seed),
    }
    row.update(report.metric_columns())
    row["epochs_run"] = str(report.epochs_run)
    row["wall_seconds"] = f"{report.wall_seconds:.3f}"
    row["status"] = report.status
    return row


def optimizer_label(cfg: ExperimentConfig) -> str:
    if cfg.optimizer == "sgd_momentum":
        return f"SGDM({cfg.momentum:g})"
    return {"adam": "Adam", "sgd": "SGD", "rmsprop": "RMSProp"}[cfg.optimizer]


def _write_run_artifacts(run_dir: Path, cfg: ExperimentConfig, report: RunReport) -> None:
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(cfg.to_json() + "\n")
    (run_dir / "report.json").write_text(report.to_json() + "\n")
    if report.mse_series is not None:
        with (run_dir / "mse_per_snapshot.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["snapshot_index", "mse"])
            for i, v in enumerate(report.mse_series):
                w.writerow([i, repr(float(v))])


def _fmt(v: Optional[float], digits: int = 4) -> str:
    return "" if v is None else f"{v:.{digits}f}"


def _grouped(pairs: Sequence[tuple[ExperimentConfig, RunReport]]):
    """Reports grouped by config without the seed, in first-seen order."""
    groups: dict[str, list] = {}
    for cfg, rep in pairs:
        key = cfg.replace(seed=0).run_id()
        groups.setdefault(key, []).append((cfg, rep))
    return list(groups.values())


def _median_metric(group, name: str) -> Optional[float]:
    vals = [rep.metrics[name] for _, rep in group if rep.status == "ok" and name in rep.metrics]
    return median(vals) if vals else None


def _median_epoch_seconds(group) -> Optional[float]:
    vals = [float(np.mean(rep.epoch_seconds)) for _, rep in group if rep.epoch_seconds]
    return median(vals) if vals else None


def _md_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


_MODEL_NAMES = {
    "gconv_lstm": "Graph Convolutional Long Short Term Memory (gconv_LSTM)",
    "gconv_gru": "Graph Convolutional Gated Recurrent Unit (gconv_gru)",
    "evolvegcn_o": "Evolving Graph Convolutional without Hidden Layer (EvolveGCNO)",
    "evolvegcn_h": "Evolving Graph Convolutional with Hidden Layer (EvolveGCNH)",
}

_EMBED_NAMES = {"attention": "attention", "identity": "identity", "time": "time projection", "sum": "sum"}


def markdown_table(preset: str, pairs: Sequence[tuple[ExperimentConfig, RunReport]]) -> str:
    """A markdown table in the layout of the preset's source table; cells are medians over seeds."""
    groups = _grouped(pairs)
    if preset.startswith("table_4_1_") and preset != "table_4_1_1_lags":
        rows = []
        for g in groups:
            c = g[0][0]
            rows.append([f"{c.lr:g}", "ReLU" if c.activation == "relu" else "tanh", optimizer_label(c),
                         _fmt(_median_metric(g, "mse"), 4)])
        return _md_table(["Learning Rate", "Activation Function", "Optimizer", "MSE"], rows)
    if preset == "table_4_1_1_lags":
        cells: dict[str, dict[int, Optional[float]]] = {}
        lags: list[int] = []
        for g in groups:
            c = g[0][0]
            cells.setdefault(c.model, {})[c.lag] = _median_metric(g, "mse")
            if c.lag not in lags:
                lags.append(c.lag)
        header = ["Model Name"] + [f"MSE Time_Step/lag = {lag}" for lag in lags]
        rows = [[_MODEL_NAMES.get(m, m)] + [_fmt(v.get(lag)) for lag in lags] for m, v in cells.items()]
        return _md_table(header, rows)
    if preset == "table_5_1":
        rows = []
        for g in groups:
            c = g[0][0]
            mem = c.use_memory
            rows.append([c.name or c.model, _EMBED_NAMES[c.embedding], "id" if mem else "-",
                         c.aggregator if mem else "-", "node" if mem else "-", "GRU" if mem else "-",
                         str(c.layers)] + [_fmt(_median_metric(g, m)) for m in
                                           ("ap_seen", "ap_unseen", "auc_seen", "auc_unseen")]
                        + [_fmt(_median_epoch_seconds(g), 1)])
        return _md_table(["Name", "Embedding", "Message", "Message Aggr", "Memory", "Memory Upd", "Num Layers",
                          "Test ap Seen", "Test ap Unseen", "Test auc Seen", "Test auc Unseen",
                          "Time per epoch (s)"], rows)
    if preset == "table_5_3":
        rows = []
        for g in groups:
            c = g[0][0]
            rows.append([c.name or c.model, c.agg_method, c.attn_mode, c.time_mode, f"{c.lr:g}",
                         _fmt(_median_metric(g, "accuracy"), 9), _fmt(_median_metric(g, "auc_seen"), 9),
                         _fmt(_median_metric(g, "ap_seen"), 9)])
        return _md_table(["Configuration", "agg_method", "attn mode", "time", "lr", "acc", "auc", "ap"], rows)
    rows = []
    for g in groups:
        c = g[0][0]
        rows.append([c.replace(seed=0).run_id(), c.name or c.model, c.task, str(len(g))]
                    + [_fmt(_median_metric(g, m)) for m in METRIC_FIELDS])
    return _md_table(["config", "model", "task", "seeds"] + list(METRIC_FIELDS), rows)


def write_results_csv(path: Path, rows: Sequence[dict[str, str]]) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    path.write_text(buf.getvalue())


def run_and_emit(configs: Sequence[ExperimentConfig], parallelism: int = 1, out_dir: Union[str, Path] = "runs",
                 preset: str = "") -> tuple[list[RunReport], int]:
    """Run every config, write the result files, and return (reports, exit code).

    Runs are independent, so with ``parallelism > 1`` they go to a process
    pool; results are collected in input order either way.
    """
    if not configs:
        raise ConfigError("no configurations to run")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if parallelism > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            reports = list(pool.map(run_one, configs))
    else:
        reports = [run_one(c) for c in configs]
    rows = []
    for cfg, rep in zip(configs, reports):
        _write_run_artifacts(out / "runs" / cfg.run_id(), cfg, rep)
        rows.append(result_row(cfg, rep))
    write_results_csv(out / "results.csv", rows)
    (out / "results.md").write_text(markdown_table(preset, list(zip(configs, reports))))
    code = 0 if all(r.status == "ok" for r in reports) else 1
    return reports, code
