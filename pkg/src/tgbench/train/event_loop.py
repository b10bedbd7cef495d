"""Chronological mini-batch training and evaluation of TGN / TGAT."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..autodiff import Optimizer, Tensor, backward, canonical_optimizer, no_grad
from ..autodiff import ops
from ..data.events import EventStream
from ..data.splits import HoldoutSplit, inductive_holdout
from ..errors import ConfigError
from ..event.models import EventState, TgatConfig, TgnConfig, build_event_model
from .metrics import accuracy, average_precision, mse, roc_auc
from .report import RunReport
from .sampling import negative_sample

TASKS = ("link", "node_regression")


def _batches(idx: np.ndarray, size: int):
    for a in range(0, idx.size, size):
        yield idx[a:a + size]


def time_statistics(stream: EventStream, idx: np.ndarray) -> float:
    """Mean gap between consecutive events of the same node over ``idx`` (1.0 if undefined)."""
    last: dict[int, float] = {}
    gaps = []
    for i in idx:
        t = float(stream.t[i])
        for n in (int(stream.src[i]), int(stream.dst[i])):
            if n in last:
                gaps.append(t - last[n])
            last[n] = t
    scale = float(np.mean(gaps)) if gaps else 0.0
    return scale if scale > 0 else 1.0


def normalized_features(stream: EventStream, idx: np.ndarray) -> np.ndarray:
    """Event features z-scored per column with statistics from ``idx``; constant columns are centred only."""
    ref = stream.features[idx] if idx.size else stream.features
    mu = ref.mean(axis=0)
    sd = ref.std(axis=0)
    sd[sd == 0] = 1.0
    return (stream.features - mu) / sd


def _bce(pos_logits: Tensor, neg_logits: Tensor) -> Tensor:
    """Mean binary cross-entropy with positives labelled 1 and negatives 0."""
    return ops.mean(ops.softplus(-pos_logits)) + ops.mean(ops.softplus(neg_logits))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _partition_metrics(pos: np.ndarray, neg: np.ndarray,
                       rng: np.random.Generator) -> tuple[Optional[float], Optional[float]]:
    """AP and AUC of positives against negatives.

    The pooled list is shuffled first: AP breaks score ties by input order,
    and listing all positives first would reward a constant scorer.
    """
    if pos.size == 0:
        return None, None
    scores = np.concatenate([pos, neg])
    labels = np.concatenate([np.ones(pos.size), np.zeros(neg.size)])
    perm = rng.permutation(scores.size)
    return average_precision(scores[perm], labels[perm]), roc_auc(scores, labels)


def evaluate_event_model(model, state: EventState, stream: EventStream, eval_idx: np.ndarray,
                         unseen: Optional[np.ndarray], rng: np.random.Generator,
                         batch_size: int = 200) -> dict[str, float]:
    """Score each batch with one seeded negative per positive, then advance the state through it.

    ``unseen`` is a boolean mask over ``eval_idx``. Metrics of an empty
    partition are left out of the result. Parameters are never touched.
    """
    model.eval()
    eval_idx = np.asarray(eval_idx, dtype=np.int64)
    unseen = np.zeros(eval_idx.size, dtype=bool) if unseen is None else np.asarray(unseen, dtype=bool)
    dests = stream.destination_nodes()
    pos_all, neg_all = np.empty(eval_idx.size), np.empty(eval_idx.size)
    offset = 0
    with no_grad():
        for b in _batches(eval_idx, batch_size):
            src, dst, t = stream.src[b], stream.dst[b], stream.t[b]
            neg = negative_sample(dst, dests, rng)
            pl, nl, write = model.link_logits(state, src, dst, neg, t)
            pos_all[offset:offset + b.size] = pl.data
            neg_all[offset:offset + b.size] = nl.data
            offset += b.size
            model.commit(state, write)
            model.observe(state, src, dst, t, b)
    out: dict[str, float] = {}
    for name, sel in (("seen", ~unseen), ("unseen", unseen)):
        ap, auc = _partition_metrics(pos_all[sel], neg_all[sel], rng)
        if ap is not None:
            out[f"ap_{name}"] = ap
            out[f"auc_{name}"] = auc
    seen = ~unseen
    if seen.any():
        probs = _sigmoid(np.concatenate([pos_all[seen], neg_all[seen]]))
        labels = np.concatenate([np.ones(int(seen.sum())), np.zeros(int(seen.sum()))])
        out["accuracy"] = accuracy(probs, labels)
    return out


def _regression_targets(stream: EventStream, b: np.ndarray):
    """Unique (node, t) endpoint pairs of a batch and their labels."""
    nodes = np.concatenate([stream.src[b], stream.dst[b]])
    times = np.concatenate([stream.t[b], stream.t[b]])
    pairs = np.unique(np.stack([times, nodes.astype(np.float64)], axis=1), axis=0)
    t_pairs, n_pairs = pairs[:, 0], pairs[:, 1].astype(np.int64)
    y = stream.node_labels[t_pairs.astype(np.int64), n_pairs]
    return n_pairs, t_pairs, y


def evaluate_regression(model, state: EventState, stream: EventStream, eval_idx: np.ndarray,
                        batch_size: int = 200) -> float:
    model.eval()
    preds, ys = [], []
    with no_grad():
        for b in _batches(np.asarray(eval_idx, dtype=np.int64), batch_size):
            nodes, times, y = _regression_targets(stream, b)
            pred, write = model.regress(state, nodes, times)
            preds.append(pred.data)
            ys.append(y)
            model.commit(state, write)
            model.observe(state, stream.src[b], stream.dst[b], stream.t[b], b)
    return mse(np.concatenate(preds), np.concatenate(ys))


def _replay(model, stream: EventStream, idx: np.ndarray, batch_size: int) -> EventState:
    state = model.new_state()
    for b in _batches(np.asarray(idx, dtype=np.int64), batch_size):
        model.advance(state, stream.src[b], stream.dst[b], stream.t[b], b)
    return state


@dataclass
class EventRunSetup:
    """Everything derived from the stream before training starts."""

    split: HoldoutSplit
    edge_features: np.ndarray
    time_scale: float


def prepare_event_run(stream: EventStream, task: str, seed: int, unseen_fraction: float,
                      val_ratio: float = 0.15, test_ratio: float = 0.15, feature_norm: bool = True) -> EventRunSetup:
    frac = unseen_fraction if task == "link" else 0.0
    split = inductive_holdout(stream, frac, seed=seed, val_ratio=val_ratio, test_ratio=test_ratio)
    feats = normalized_features(stream, split.train) if feature_norm else stream.features
    return EventRunSetup(split, feats, time_statistics(stream, split.train))


def train_event_run(stream: EventStream, kind: str, model_config, task: str = "link", *,
                    lr: float = 1e-4, optimizer: str = "adam", momentum: Optional[float] = None,
                    epochs: int = 100, batch_size: int = 200, patience: int = 10, seed: int = 0,
                    unseen_fraction: float = 0.1, val_ratio: float = 0.15, test_ratio: float = 0.15,
                    feature_norm: bool = True, resample_negatives: bool = True,
                    config: Optional[dict] = None) -> RunReport:
    """Train an event model on the chronological training window and report test metrics.

    Early stopping watches validation AP (link) or MSE (regression) and
    restores the best parameters; before test scoring the memory and
    neighbour store are rebuilt by replaying the train and validation events.
    With ``resample_negatives=False`` every epoch trains against the same
    negatives, so the epoch losses differ only through the parameters.
    """
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r}; expected one of {TASKS}")
    if kind == "tgn" and not isinstance(model_config, TgnConfig) or \
            kind == "tgat" and not isinstance(model_config, TgatConfig):
        raise ConfigError(f"model {kind!r} does not match config type {type(model_config).__name__}")
    if task == "node_regression" and stream.node_labels is None:
        raise ConfigError("node_regression needs a stream with node labels (a converted stream)")
    opt_kind = canonical_optimizer(optimizer)
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    setup = prepare_event_run(stream, task, seed, unseen_fraction, val_ratio, test_ratio, feature_norm)
    split = setup.split
    model = build_event_model(kind, model_config, stream.num_nodes, setup.edge_features, rng,
                              time_scale=setup.time_scale)
    opt = Optimizer(model.parameters(), opt_kind, lr, **({"momentum": momentum} if momentum is not None else {}))
    dests = stream.destination_nodes()
    report = RunReport(config=dict(config or {}), seed=seed)
    higher_better = task == "link"
    best, best_state, since_best = None, model.state_dict(), 0
    eval_seed = int(rng.integers(2 ** 31))
    neg_seed = None if resample_negatives else int(rng.integers(2 ** 31))

    for _ in range(epochs):
        t0 = time.perf_counter()
        model.train()
        state = model.new_state()
        losses = []
        neg_rng = rng if neg_seed is None else np.random.default_rng(neg_seed)
        for b in _batches(split.train, batch_size):
            src, dst, t = stream.src[b], stream.dst[b], stream.t[b]
            if task == "link":
                neg = negative_sample(dst, dests, neg_rng)
                pl, nl, write = model.link_logits(state, src, dst, neg, t, rng)
                loss = _bce(pl, nl)
            else:
                nodes, times, y = _regression_targets(stream, b)
                pred, write = model.regress(state, nodes, times, rng=rng)
                diff = pred - Tensor(y)
                loss = ops.mean(diff * diff)
            backward(loss)
            opt.step()
            losses.append(loss.item())
            model.commit(state, write)
            model.observe(state, src, dst, t, b)
        report.train_loss.append(float(np.mean(losses)) if losses else float("nan"))
        if task == "link":
            val = evaluate_event_model(model, state, stream, split.val, None,
                                       np.random.default_rng(eval_seed), batch_size).get("ap_seen", float("nan"))
        else:
            val = evaluate_regression(model, state, stream, split.val, batch_size)
        report.val_metric.append(val)
        report.epoch_seconds.append(time.perf_counter() - t0)
        report.epochs_run += 1
        improved = best is None or (val > best if higher_better else val < best)
        if improved:
            best, best_state, since_best = val, model.state_dict(), 0
        else:
            since_best += 1
            if since_best >= patience:
                break

    model.load_state_dict(best_state)
    history = np.concatenate([split.train, split.val])
    state = _replay(model, stream, history, batch_size)
    test_idx = split.test
    if task == "link":
        unseen = np.isin(test_idx, split.test_unseen)
        report.metrics.update(evaluate_event_model(model, state, stream, test_idx, unseen,
                                                   np.random.default_rng(eval_seed + 1), batch_size))
    else:
        report.metrics["mse"] = evaluate_regression(model, state, stream, test_idx, batch_size)
    report.wall_seconds = time.perf_counter() - start
    return report
