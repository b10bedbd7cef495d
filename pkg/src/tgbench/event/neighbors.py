"""Per-node temporal adjacency with most-recent, strictly-past sampling."""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError


@dataclass
class NeighborSample:
    """Left-padded (M, k) arrays; real entries sit at the end, most recent last.

    Padded slots repeat the query node and time and are excluded by ``mask``.
    """

    ids: np.ndarray
    eidx: np.ndarray
    times: np.ndarray
    mask: np.ndarray

    @property
    def k(self) -> int:
        return self.ids.shape[1]


class NeighborStore:
    def __init__(self, num_nodes: int):
        self.num_nodes = num_nodes
        self._nbr = [[] for _ in range(num_nodes)]
        self._eidx = [[] for _ in range(num_nodes)]
        self._time = [[] for _ in range(num_nodes)]
        self.latest = -np.inf

    def record_event(self, src: int, dst: int, t: float, idx: int) -> None:
        """Append the event under both endpoints; events must arrive in time order."""
        if t < self.latest:
            raise ContractError(f"record_event: time {t} precedes stored time {self.latest}")
        self.latest = t
        for a, b in ((src, dst), (dst, src)):
            self._nbr[a].append(int(b))
            self._eidx[a].append(int(idx))
            self._time[a].append(float(t))

    def record_batch(self, src, dst, t, idx) -> None:
        for s, d, ti, i in zip(src, dst, t, idx):
            self.record_event(int(s), int(d), float(ti), int(i))

    def history(self, node: int) -> list[tuple[int, int, float]]:
        return list(zip(self._nbr[node], self._eidx[node], self._time[node]))

    def sample_recent(self, node: int, t_query: float, k: int) -> list[tuple[int, int, float]]:
        """Up to k most recent (neighbor, event idx, t) with t < t_query, most recent last."""
        if k < 1:
            raise ContractError(f"sample_recent: k must be >= 1, got {k}")
        times = self._time[node]
        end = bisect_left(times, t_query)
        start = max(0, end - k)
        return list(zip(self._nbr[node][start:end], self._eidx[node][start:end], times[start:end]))

    def sample(self, nodes: np.ndarray, t_query: np.ndarray, k: int) -> NeighborSample:
        m = len(nodes)
        ids = np.repeat(np.asarray(nodes, dtype=np.int64)[:, None], k, axis=1)
        times = np.repeat(np.asarray(t_query, dtype=np.float64)[:, None], k, axis=1)
        eidx = np.zeros((m, k), dtype=np.int64)
        mask = np.zeros((m, k), dtype=bool)
        for row, (node, tq) in enumerate(zip(nodes, t_query)):
            tl = self._time[node]
            end = bisect_left(tl, tq)
            start = max(0, end - k)
            n = end - start
            if n == 0:
                continue
            ids[row, k - n:] = self._nbr[node][start:end]
            eidx[row, k - n:] = self._eidx[node][start:end]
            times[row, k - n:] = tl[start:end]
            mask[row, k - n:] = True
        if np.any(mask & (times >= np.asarray(t_query)[:, None])):
            raise ContractError("temporal leakage: sampled neighbour is not strictly in the past")
        return NeighborSample(ids, eidx, times, mask)
