"""Chronological train/validation/test cut with inductive node masking."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from .events import EventStream


@dataclass(frozen=True)
class HoldoutSplit:
    """Index arrays into the source stream.

    ``dropped`` holds training-window events that touch a masked node; they
    take part in nothing. Test events are split by whether they touch a
    masked ("unseen") node.
    """

    train: np.ndarray
    val: np.ndarray
    test_seen: np.ndarray
    test_unseen: np.ndarray
    dropped: np.ndarray
    masked_nodes: frozenset
    val_time: float
    test_time: float

    @property
    def test(self) -> np.ndarray:
        return np.sort(np.concatenate([self.test_seen, self.test_unseen]))


def inductive_holdout(stream: EventStream, unseen_fraction: float = 0.1, seed: int = 0,
                      val_ratio: float = 0.15, test_ratio: float = 0.15) -> HoldoutSplit:
    """Cut by timestamp quantiles, then mask ``unseen_fraction`` of the nodes.

    Masked nodes are drawn first from nodes that only appear after the
    training cut, then topped up at random from the other nodes active in the
    validation/test window.
    """
    if not 0.0 <= unseen_fraction < 1.0:
        raise ContractError(f"unseen_fraction must lie in [0, 1), got {unseen_fraction}")
    if not (0 < val_ratio and 0 < test_ratio and val_ratio + test_ratio < 1):
        raise ContractError("val_ratio and test_ratio must be positive and sum below 1")
    if len(stream) == 0:
        raise ContractError("inductive_holdout: empty stream")
    t = stream.t
    val_time, test_time = np.quantile(t, [1.0 - val_ratio - test_ratio, 1.0 - test_ratio])
    idx = np.arange(len(stream))
    in_train = t <= val_time
    in_val = (t > val_time) & (t <= test_time)
    in_test = t > test_time

    masked: set[int] = set()
    if unseen_fraction > 0:
        rng = np.random.default_rng(seed)
        active = np.unique(np.concatenate([stream.src, stream.dst]))
        count = max(1, int(round(unseen_fraction * active.size)))
        train_nodes = set(np.concatenate([stream.src[in_train], stream.dst[in_train]]).tolist())
        later = np.unique(np.concatenate([stream.src[~in_train], stream.dst[~in_train]]))
        fresh = np.array([n for n in later if n not in train_nodes], dtype=np.int64)
        if fresh.size > count:
            fresh = rng.choice(fresh, size=count, replace=False)
        masked.update(fresh.tolist())
        rest = np.array([n for n in later if n not in masked], dtype=np.int64)
        need = min(count - len(masked), rest.size)
        if need > 0:
            masked.update(rng.choice(rest, size=need, replace=False).tolist())
        if not masked and active.size:
            masked.add(int(rng.choice(active)))

    marr = np.array(sorted(masked), dtype=np.int64)
    touches = np.isin(stream.src, marr) | np.isin(stream.dst, marr)
    test_seen = idx[in_test & ~touches]
    test_unseen = idx[in_test & touches]
    if unseen_fraction > 0 and in_test.any() and test_seen.size == 0:
        raise ContractError("degenerate split: node masking leaves no seen test events")
    if unseen_fraction > 0 and stream.num_nodes < 2:
        raise ContractError("degenerate split: cannot mask nodes of a single-node stream")
    return HoldoutSplit(
        train=idx[in_train & ~touches], val=idx[in_val], test_seen=test_seen, test_unseen=test_unseen,
        dropped=idx[in_train & touches], masked_nodes=frozenset(masked),
        val_time=float(val_time), test_time=float(test_time))
