"""Full-rollout training of snapshot regressors."""
from __future__ import annotations

import time
from dataclasses import fields, replace
from typing import Optional

import numpy as np

from ..autodiff import Optimizer, Tensor, backward, canonical_optimizer, no_grad
from ..autodiff import ops
from ..data.snapshots import SnapshotSequence, temporal_split
from ..errors import ConfigError
from ..snapshot.models import SNAPSHOT_MODELS, SnapshotRegressor, prepare_operators
from .metrics import mse
from .report import RunReport


def _rollout(model: SnapshotRegressor, seq: SnapshotSequence, operators, state):
    """Predictions and squared-error losses over ``seq`` starting from ``state``."""
    losses, preds = [], []
    for snap, graph in zip(seq, operators):
        pred, state = model.step(Tensor(snap.features), state, graph)
        diff = pred - Tensor(snap.target)
        losses.append(ops.mean(diff * diff))
        preds.append(pred)
    return losses, preds, state


def _mean(losses):
    total = losses[0]
    for l in losses[1:]:
        total = total + l
    return ops.mul_scalar(total, 1.0 / len(losses))


def evaluate_snapshot_model(model: SnapshotRegressor, train: SnapshotSequence, test: SnapshotSequence,
                            train_ops=None, test_ops=None) -> tuple[float, list[float]]:
    """Roll through the training snapshots, then score the continued rollout on ``test``."""
    train_ops = train_ops or [prepare_operators(s) for s in train]
    test_ops = test_ops or [prepare_operators(s) for s in test]
    model.eval()
    with no_grad():
        _, _, state = _rollout(model, train, train_ops, model.init_state(train.num_nodes))
        _, preds, _ = _rollout(model, test, test_ops, state)
    series = [mse(p.data, s.target) for p, s in zip(preds, test)]
    overall = mse(np.concatenate([p.data for p in preds]), np.concatenate([s.target for s in test]))
    return overall, series


def train_snapshot_run(seq: SnapshotSequence, kind: str, *, lr: float = 0.01, activation: str = "relu",
                       optimizer: str = "adam", momentum: Optional[float] = None, epochs: int = 200,
                       seed: int = 0, hidden: int = 32, K: int = 2, train_ratio: float = 0.8,
                       step_mode: str = "epoch", config: Optional[dict] = None) -> RunReport:
    """Train ``kind`` on the first part of ``seq`` and report test MSE.

    Each epoch restarts the recurrent state at zero and rolls over the training
    snapshots in order. With ``step_mode="epoch"`` the loss is the mean MSE of
    the rollout and one optimizer step is taken; ``"snapshot"`` steps after
    every snapshot instead (the graph is cut between snapshots).
    """
    if kind not in SNAPSHOT_MODELS:
        raise ConfigError(f"unknown snapshot model {kind!r}; expected one of {SNAPSHOT_MODELS}")
    opt_kind = canonical_optimizer(optimizer)
    if step_mode not in ("epoch", "snapshot"):
        raise ConfigError(f"unknown step_mode {step_mode!r}")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    train, test = temporal_split(seq, train_ratio)
    model = SnapshotRegressor(kind, seq.lag, hidden=hidden, K=K, activation=activation, rng=rng)
    opt_kwargs = {"momentum": momentum} if momentum is not None else {}
    opt = Optimizer(model.parameters(), opt_kind, lr, **opt_kwargs)
    train_ops = [prepare_operators(s) for s in train]
    test_ops = [prepare_operators(s) for s in test]
    report = RunReport(config=dict(config or {}), seed=seed)

    for _ in range(epochs):
        t0 = time.perf_counter()
        model.train()
        state = model.init_state(seq.num_nodes)
        if step_mode == "epoch":
            losses, _, _ = _rollout(model, train, train_ops, state)
            loss = _mean(losses)
            backward(loss)
            opt.step()
            epoch_loss = loss.item()
        else:
            total = 0.0
            for snap, graph in zip(train, train_ops):
                pred, state = model.step(Tensor(snap.features), state, graph)
                diff = pred - Tensor(snap.target)
                loss = ops.mean(diff * diff)
                backward(loss)
                opt.step()
                total += loss.item()
                state = _detach_state(state)
            epoch_loss = total / len(train)
        report.train_loss.append(epoch_loss)
        report.epoch_seconds.append(time.perf_counter() - t0)
        report.epochs_run += 1

    overall, series = evaluate_snapshot_model(model, train, test, train_ops, test_ops)
    report.metrics["mse"] = overall
    report.mse_series = series
    report.wall_seconds = time.perf_counter() - start
    return report


def _detach_state(state):
    updates = {}
    for f in fields(state):
        v = getattr(state, f.name)
        if isinstance(v, Tensor):
            updates[f.name] = v.detach()
    return replace(state, **updates)
