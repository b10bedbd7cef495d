"""Per-node memory, pending raw messages ("mail"), aggregation, and GRU updates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from ..autodiff import GRUCell, Tensor
from ..autodiff import ops
from ..errors import ContractError
from .time_encoding import TimeEncoder


class RawMail(NamedTuple):
    """Mail for one endpoint of one event; composed later as [s_self ‖ s_other ‖ φ(dt) ‖ e]."""

    t: float
    idx: int
    s_self: np.ndarray
    s_other: np.ndarray
    dt: float
    features: np.ndarray


class Memory:
    def __init__(self, num_nodes: int, dim: int):
        self.S = np.zeros((num_nodes, dim))
        self.last_update = np.zeros(num_nodes)

    @property
    def dim(self) -> int:
        return self.S.shape[1]

    def copy(self) -> "Memory":
        m = Memory(0, self.dim)
        m.S, m.last_update = self.S.copy(), self.last_update.copy()
        return m


class RawMessageStore:
    def __init__(self):
        self.pending: dict[int, list[RawMail]] = {}

    def add(self, node: int, mail: RawMail) -> None:
        self.pending.setdefault(int(node), []).append(mail)

    def has(self, node: int) -> bool:
        return int(node) in self.pending

    def get(self, node: int) -> list[RawMail]:
        return self.pending.get(int(node), [])

    def clear(self, node: int) -> None:
        self.pending.pop(int(node), None)

    def __len__(self) -> int:
        return sum(len(v) for v in self.pending.values())


def compute_raw_messages(src, dst, t, eidx, memory: Memory, edge_features: np.ndarray) -> list[tuple[int, RawMail]]:
    """Mail for both endpoints of each event, using the memory as it stands now."""
    out = []
    for s, d, ti, i in zip(src, dst, t, eidx):
        s, d, ti, i = int(s), int(d), float(ti), int(i)
        e = edge_features[i]
        out.append((s, RawMail(ti, i, memory.S[s].copy(), memory.S[d].copy(), ti - memory.last_update[s], e)))
        out.append((d, RawMail(ti, i, memory.S[d].copy(), memory.S[s].copy(), ti - memory.last_update[d], e)))
    return out


def compose(mails: Sequence[RawMail], time_encoder: TimeEncoder) -> Tensor:
    """Stack mails into an (m, 2·d_mem + d_time + F) message tensor."""
    s_self = np.stack([m.s_self for m in mails])
    s_other = np.stack([m.s_other for m in mails])
    feats = np.stack([m.features for m in mails])
    phi = time_encoder(np.array([m.dt for m in mails]))
    return ops.concat([Tensor(s_self), Tensor(s_other), phi, Tensor(feats)], axis=1)


def _latest(mails: Sequence[RawMail]) -> RawMail:
    return max(mails, key=lambda m: (m.t, m.idx))


def aggregate_messages(mails: Sequence[RawMail], mode: str, time_encoder: TimeEncoder) -> tuple[Tensor, float]:
    """One message for a node: the latest mail ("last") or the mean ("mean")."""
    if not mails:
        raise ContractError("aggregate_messages: no pending mail")
    t = max(m.t for m in mails)
    if mode == "last":
        return ops.reshape(compose([_latest(mails)], time_encoder), (-1,)), t
    if mode == "mean":
        return ops.mean(compose(mails, time_encoder), axis=0), t
    raise ContractError(f"unknown aggregation mode {mode!r}")


def aggregate_batch(mail_lists: Sequence[Sequence[RawMail]], mode: str,
                    time_encoder: TimeEncoder) -> tuple[Tensor, np.ndarray]:
    """Vectorised :func:`aggregate_messages` over several nodes: (P, D) and (P,)."""
    if any(not m for m in mail_lists):
        raise ContractError("aggregate_batch: a node has no pending mail")
    times = np.array([max(m.t for m in ml) for ml in mail_lists])
    if mode == "last":
        return compose([_latest(ml) for ml in mail_lists], time_encoder), times
    if mode == "mean":
        flat = [m for ml in mail_lists for m in ml]
        owner = np.repeat(np.arange(len(mail_lists)), [len(ml) for ml in mail_lists])
        summed = ops.scatter_add(compose(flat, time_encoder), owner, len(mail_lists))
        inv = Tensor(1.0 / np.array([len(ml) for ml in mail_lists], dtype=np.float64)[:, None])
        return summed * ops.expand(inv, summed.shape), times
    raise ContractError(f"unknown aggregation mode {mode!r}")


@dataclass
class MemoryWrite:
    """Memory rows computed in a forward pass, to be committed afterwards."""

    nodes: np.ndarray
    values: np.ndarray
    times: np.ndarray

    def restrict(self, keep) -> Optional["MemoryWrite"]:
        """The part of the write touching ``keep``; None when nothing is left."""
        sel = np.isin(self.nodes, np.asarray(keep, dtype=np.int64))
        if not sel.any():
            return None
        return MemoryWrite(self.nodes[sel], self.values[sel], self.times[sel])


def update_memory(memory: Memory, mailbox: RawMessageStore, nodes: Sequence[int], gru: GRUCell,
                  time_encoder: TimeEncoder, mode: str = "last") -> Optional[tuple[Tensor, MemoryWrite]]:
    """GRU update of ``nodes`` that have pending mail; returns new rows (with trace) and the write.

    Nodes without pending mail are skipped and their rows are untouched.
    """
    nodes = np.array([n for n in nodes if mailbox.has(n)], dtype=np.int64)
    if nodes.size == 0:
        return None
    msg, times = aggregate_batch([mailbox.get(n) for n in nodes], mode, time_encoder)
    new = gru(msg, Tensor(memory.S[nodes]))
    return new, MemoryWrite(nodes, new.data.copy(), times)


def commit(memory: Memory, mailbox: RawMessageStore, write: Optional[MemoryWrite]) -> None:
    if write is None:
        return
    memory.S[write.nodes] = write.values
    memory.last_update[write.nodes] = write.times
    for n in write.nodes:
        mailbox.clear(n)
