"""Discrete-time dynamic graphs: daily mobility snapshots with lagged case features.

Targets are z-scored with the mean and standard deviation of the *whole* raw
series by default. This leaks test-period statistics into the training
windows; it is kept because the benchmark numbers are defined that way.
``standardize="per_node"`` z-scores each node's series separately instead.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import ContractError, FormatError


@dataclass(frozen=True)
class Snapshot:
    edges: np.ndarray      # (E, 2) int64 rows of (src, dst)
    weights: np.ndarray    # (E,) float64 movement counts
    features: np.ndarray   # (N, lag) standardized cases of the previous lag days
    target: np.ndarray     # (N,) standardized cases of the next day

    @property
    def num_nodes(self) -> int:
        return self.features.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]


@dataclass(frozen=True)
class SnapshotSequence:
    num_nodes: int
    lag: int
    snapshots: tuple[Snapshot, ...]
    standardization: tuple[float, float] = (0.0, 1.0)
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.snapshots)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return SnapshotSequence(self.num_nodes, self.lag, self.snapshots[i], self.standardization, self.meta)
        return self.snapshots[i]

    def __iter__(self):
        return iter(self.snapshots)


def build_lag_windows(y_hat: np.ndarray, lag: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Sliding windows over a standardized (T, N) series.

    Window ``i`` has features ``[n, k] = y_hat[i + k, n]`` and target
    ``y_hat[i + lag]``.
    """
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y_hat.ndim != 2:
        raise ContractError(f"build_lag_windows: expected a (T, N) series, got shape {y_hat.shape}")
    T = y_hat.shape[0]
    if lag < 1 or T <= lag:
        raise ContractError(f"build_lag_windows: need 1 <= lag < T, got lag={lag}, T={T}")
    features = [y_hat[i:i + lag].T.copy() for i in range(T - lag)]
    targets = [y_hat[i + lag].copy() for i in range(T - lag)]
    return features, targets


def standardize_series(y: np.ndarray, mode: str = "global") -> tuple[np.ndarray, tuple]:
    if mode == "global":
        mu, sigma = float(y.mean()), float(y.std())
        if not sigma > 0:
            raise FormatError("degenerate standardization: series has zero variance")
        return (y - mu) / sigma, (mu, sigma)
    if mode == "per_node":
        mu, sigma = y.mean(axis=0), y.std(axis=0)
        if np.any(sigma <= 0):
            raise FormatError("degenerate standardization: a node series has zero variance")
        return (y - mu) / sigma, (mu.tolist(), sigma.tolist())
    raise ContractError(f"unknown standardization mode {mode!r}")


def _require(obj: dict, key: str, path: Path):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"{path}: missing key {key!r}")
    return obj[key]


def parse_dtdg(raw: dict, lag: int, path: Path | str = "<memory>", standardize: str = "global") -> SnapshotSequence:
    path = Path(path)
    T = _require(raw, "time_periods", path)
    y = _require(raw, "y", path)
    mapping = _require(raw, "edge_mapping", path)
    edge_index = _require(mapping, "edge_index", path)
    edge_weight = _require(mapping, "edge_weight", path)
    if not isinstance(T, int) or T < 1:
        raise FormatError(f"{path}: key 'time_periods' must be a positive integer")
    if not isinstance(y, list) or len(y) != T:
        raise FormatError(f"{path}: key 'y' must hold {T} rows")
    widths = {len(row) for row in y}
    if len(widths) != 1:
        raise FormatError(f"{path}: key 'y' has ragged rows (widths {sorted(widths)})")
    N = widths.pop()
    if not 1 <= lag < T:
        raise ContractError(f"lag must satisfy 1 <= lag < time_periods={T}, got {lag}")

    y_arr = np.asarray(y, dtype=np.float64)
    y_hat, stats = standardize_series(y_arr, standardize)
    features, targets = build_lag_windows(y_hat, lag)

    snapshots = []
    for i, (x, target) in enumerate(zip(features, targets)):
        day = str(i + lag - 1)
        pairs = _require(edge_index, day, path)
        weights = _require(edge_weight, day, path)
        edges = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != edges.shape[0]:
            raise FormatError(f"{path}: key 'edge_weight/{day}' has {w.shape[0]} weights "
                              f"for {edges.shape[0]} edges")
        if edges.size and (edges.min() < 0 or edges.max() >= N):
            raise FormatError(f"{path}: key 'edge_index/{day}' has a node index outside [0, {N})")
        if np.any(w < 0):
            raise FormatError(f"{path}: key 'edge_weight/{day}' has a negative weight")
        snapshots.append(Snapshot(edges, w, x, target))
    return SnapshotSequence(N, lag, tuple(snapshots), stats, {"path": str(path), "time_periods": T})


def load_dtdg_json(path, lag: int = 8, standardize: str = "global") -> SnapshotSequence:
    """Load the canonical DTDG JSON document into lag-``lag`` snapshots."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None
    return parse_dtdg(raw, lag, path, standardize)


def write_dtdg_json(path, y: np.ndarray, edges: Sequence[np.ndarray], weights: Sequence[np.ndarray]) -> None:
    y = np.asarray(y, dtype=np.float64)
    doc = {
        "edge_mapping": {
            "edge_index": {str(t): np.asarray(e, dtype=np.int64).tolist() for t, e in enumerate(edges)},
            "edge_weight": {str(t): np.asarray(w, dtype=np.float64).tolist() for t, w in enumerate(weights)},
        },
        "time_periods": int(y.shape[0]),
        "y": y.tolist(),
    }
    Path(path).write_text(json.dumps(doc))


def temporal_split(seq: SnapshotSequence, train_ratio: float = 0.8) -> tuple[SnapshotSequence, SnapshotSequence]:
    if not 0.0 < train_ratio < 1.0:
        raise ContractError(f"train_ratio must lie in (0, 1), got {train_ratio}")
    cut = math.floor(train_ratio * len(seq))
    if cut == 0 or cut == len(seq):
        raise ContractError(f"temporal_split: ratio {train_ratio} on {len(seq)} snapshots leaves an empty side")
    return seq[:cut], seq[cut:]
