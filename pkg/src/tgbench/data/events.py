"""Continuous-time dynamic graphs stored as columnar event arrays."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from ..errors import ContractError, FormatError


@dataclass(frozen=True)
class Event:
    src: int
    dst: int
    t: float
    features: np.ndarray
    idx: int


@dataclass(frozen=True)
class EventStream:
    """Time-sorted interactions ``(src, dst, t, features)``.

    ``num_sources`` is set for bipartite streams (users first, then items);
    ``node_labels`` optionally holds per-(timestamp, node) regression targets
    as a (num_timestamps, num_nodes) array indexed by integer timestamp.
    """

    src: np.ndarray
    dst: np.ndarray
    t: np.ndarray
    features: np.ndarray
    num_nodes: int
    num_sources: Optional[int] = None
    node_labels: Optional[np.ndarray] = None

    def __post_init__(self):
        n = self.src.shape[0]
        if not (self.dst.shape[0] == self.t.shape[0] == self.features.shape[0] == n):
            raise ContractError("EventStream: column lengths differ")
        if self.features.ndim != 2:
            raise ContractError("EventStream: features must be a 2-D array")
        if n and np.any(np.diff(self.t) < 0):
            raise ContractError("EventStream: timestamps must be nondecreasing")
        if n and (min(self.src.min(), self.dst.min()) < 0
                  or max(self.src.max(), self.dst.max()) >= self.num_nodes):
            raise ContractError(f"EventStream: node index outside [0, {self.num_nodes})")

    def __len__(self) -> int:
        return int(self.src.shape[0])

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def idx(self) -> np.ndarray:
        return np.arange(len(self))

    @property
    def bipartite(self) -> bool:
        return self.num_sources is not None

    def event(self, i: int) -> Event:
        return Event(int(self.src[i]), int(self.dst[i]), float(self.t[i]), self.features[i], i)

    @property
    def events(self) -> list[Event]:
        return [self.event(i) for i in range(len(self))]

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self.event(i)

    def head(self, n: int) -> "EventStream":
        return EventStream(self.src[:n], self.dst[:n], self.t[:n], self.features[:n],
                           self.num_nodes, self.num_sources, self.node_labels)

    def destination_nodes(self) -> np.ndarray:
        """Candidate negative destinations: item nodes if bipartite, else all nodes."""
        if self.bipartite:
            return np.arange(self.num_sources, self.num_nodes)
        return np.arange(self.num_nodes)


def load_jodie_csv(path) -> EventStream:
    """Read ``user_id,item_id,timestamp,state_label,f0,...``; items follow users."""
    path = Path(path)
    users, items, times, feats = [], [], [], []
    width = None
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 4:
                raise FormatError(f"{path}:{lineno}: expected at least 4 columns, got {len(row)}")
            if width is None:
                width = len(row) - 4
            elif len(row) - 4 != width:
                raise FormatError(f"{path}:{lineno}: {len(row) - 4} features, expected {width}")
            try:
                users.append(int(row[0]))
                items.append(int(row[1]))
                times.append(float(row[2]))
                feats.append([float(v) for v in row[4:]])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    if not users:
        raise FormatError(f"{path}: no events")
    users_a = np.asarray(users, dtype=np.int64)
    items_a = np.asarray(items, dtype=np.int64)
    if users_a.min() < 0 or items_a.min() < 0:
        raise FormatError(f"{path}: negative node id")
    num_users = int(users_a.max()) + 1
    num_items = int(items_a.max()) + 1
    t = np.asarray(times, dtype=np.float64)
    order = np.argsort(t, kind="stable")
    features = np.asarray(feats, dtype=np.float64).reshape(len(users), width)
    return EventStream(users_a[order], items_a[order] + num_users, t[order], features[order],
                       num_users + num_items, num_sources=num_users)


def write_jodie_csv(stream: EventStream, path) -> None:
    if not stream.bipartite:
        raise ContractError("write_jodie_csv needs a bipartite stream")
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "item_id", "timestamp", "state_label"]
                   + [f"f{k}" for k in range(stream.feature_dim)])
        for i in range(len(stream)):
            w.writerow([int(stream.src[i]), int(stream.dst[i]) - stream.num_sources, repr(float(stream.t[i])), 0]
                       + [repr(float(v)) for v in stream.features[i]])


def write_event_csv(stream: EventStream, path, labels_path=None) -> None:
    """Write ``src,dst,t,f0..fk`` and, if labels exist, a ``t,node,target`` sidecar."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["src", "dst", "t"] + [f"f{k}" for k in range(stream.feature_dim)])
        for i in range(len(stream)):
            w.writerow([int(stream.src[i]), int(stream.dst[i]), repr(float(stream.t[i]))]
                       + [repr(float(v)) for v in stream.features[i]])
    if stream.node_labels is not None:
        labels_path = Path(labels_path) if labels_path else label_sidecar_path(path)
        with labels_path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "node", "target"])
            for t, row in enumerate(stream.node_labels):
                for node, value in enumerate(row):
                    w.writerow([t, node, repr(float(value))])


def label_sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + "_labels.csv")


def load_event_csv(path, labels_path=None, num_nodes: Optional[int] = None) -> EventStream:
    """Read an event CSV written by :func:`write_event_csv` (labels optional)."""
    path = Path(path)
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if data.shape[1] < 3:
        raise FormatError(f"{path}: expected columns src,dst,t,...")
    src, dst = data[:, 0].astype(np.int64), data[:, 1].astype(np.int64)
    n = num_nodes or int(max(src.max(), dst.max())) + 1
    labels = None
    labels_path = Path(labels_path) if labels_path else label_sidecar_path(path)
    if labels_path.exists():
        rows = np.loadtxt(labels_path, delimiter=",", skiprows=1, ndmin=2)
        ts, nodes = rows[:, 0].astype(np.int64), rows[:, 1].astype(np.int64)
        n = max(n, int(nodes.max()) + 1)
        labels = np.zeros((int(ts.max()) + 1, n))
        labels[ts, nodes] = rows[:, 2]
    return EventStream(src, dst, data[:, 2].copy(), data[:, 3:].copy(), n, node_labels=labels)
