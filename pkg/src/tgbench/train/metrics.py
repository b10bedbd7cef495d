"""Regression and ranking metrics."""
from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from ..errors import ContractError


def mse(pred, target) -> float:
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    if pred.shape != target.shape:
        raise ContractError(f"mse: length mismatch {pred.shape} vs {target.shape}")
    if pred.size == 0:
        raise ContractError("mse: empty input")
    return float(np.mean((pred - target) ** 2))


def _labels(labels) -> np.ndarray:
    y = np.asarray(labels).reshape(-1)
    if not np.all((y == 0) | (y == 1)):
        raise ContractError("labels must be 0 or 1")
    return y.astype(bool)


def average_precision(scores, labels) -> float:
    """Mean precision at the rank of each positive; ties keep input order."""
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = _labels(labels)
    if s.shape != y.shape:
        raise ContractError("average_precision: scores and labels differ in length")
    if not y.any():
        raise ContractError("average_precision: no positive labels")
    order = np.argsort(-s, kind="stable")
    hits = y[order]
    ranks = np.flatnonzero(hits) + 1
    precision = np.cumsum(hits)[hits] / ranks
    return float(precision.mean())


def roc_auc(scores, labels) -> float:
    """P(random positive outscores random negative), ties counted one half."""
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = _labels(labels)
    if s.shape != y.shape:
        raise ContractError("roc_auc: scores and labels differ in length")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ContractError("roc_auc: need at least one positive and one negative")
    ranks = rankdata(s)  # average ranks give the half credit for ties
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def accuracy(probabilities, labels, threshold: float = 0.5) -> float:
    p = np.asarray(probabilities, dtype=np.float64).reshape(-1)
    y = _labels(labels)
    if p.size == 0:
        raise ContractError("accuracy: empty input")
    return float(np.mean((p >= threshold) == y))
