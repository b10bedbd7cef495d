"""Snapshot sequence to event stream conversion."""
from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import ContractError
from .events import EventStream
from .snapshots import SnapshotSequence


def dtdg_to_ctdg(seq: SnapshotSequence, event_cap: Optional[int] = None) -> EventStream:
    """One edge-addition event per snapshot edge, stamped with the snapshot index.

    Each event carries ``[weight, features[src], features[dst]]`` so the
    feature width is ``1 + 2 * lag``. Events of a timestamp keep the
    snapshot's edge order. ``event_cap`` keeps only the first ``event_cap``
    edges of every snapshot. Per-node labels for timestamp ``i`` are the
    snapshot's regression targets.
    """
    if event_cap is not None and event_cap < 0:
        raise ContractError(f"event_cap must be nonnegative, got {event_cap}")
    src, dst, ts, feats = [], [], [], []
    for i, snap in enumerate(seq.snapshots):
        edges, weights = snap.edges, snap.weights
        if event_cap is not None:
            edges, weights = edges[:event_cap], weights[:event_cap]
        if edges.shape[0] == 0:
            continue
        s, d = edges[:, 0], edges[:, 1]
        src.append(s)
        dst.append(d)
        ts.append(np.full(s.shape[0], float(i)))
        feats.append(np.concatenate([weights[:, None], snap.features[s], snap.features[d]], axis=1))
    width = 1 + 2 * seq.lag
    labels = np.stack([snap.target for snap in seq.snapshots]) if len(seq) else np.zeros((0, seq.num_nodes))
    if not src:
        empty = np.zeros(0, dtype=np.int64)
        return EventStream(empty, empty, np.zeros(0), np.zeros((0, width)), seq.num_nodes, node_labels=labels)
    return EventStream(np.concatenate(src), np.concatenate(dst), np.concatenate(ts),
                       np.concatenate(feats), seq.num_nodes, node_labels=labels)
