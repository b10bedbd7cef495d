"""TGN and TGAT over event streams.

Both models answer "embed these nodes at these times" from a mutable
:class:`EventState` (neighbour store, and for TGN the memory and mailbox).
A forward pass never mutates the state; memory rows it computes come back as
a :class:`MemoryWrite` that the caller commits after the optimizer step, and
:meth:`observe` then files the batch's own events. Mail produced by a batch is
therefore applied at the earliest in the next batch that reads the node.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..autodiff import GRUCell, Linear, Module, Parameter, Tensor, glorot, no_grad
from ..autodiff import ops
from ..errors import ConfigError
from .layers import EdgeDecoder, NodeRegressor, TemporalNeighborhoodLayer, TemporalSumLayer
from .memory import Memory, MemoryWrite, RawMessageStore, aggregate_batch, commit, compute_raw_messages
from .neighbors import NeighborSample, NeighborStore
from .time_encoding import RankEncoder, TimeEncoder

TGN_EMBEDDINGS = ("identity", "time", "sum", "attention")
TGN_AGGREGATORS = ("last", "mean")


@dataclass(frozen=True)
class TgnConfig:
    embedding: str = "attention"
    aggregator: str = "last"
    use_memory: bool = True
    num_layers: int = 1
    heads: int = 2
    d_mem: int = 172
    d_emb: int = 100
    d_time: int = 100
    neighbors: int = 10
    dropout: float = 0.1

    def __post_init__(self):
        if self.embedding not in TGN_EMBEDDINGS:
            raise ConfigError(f"unknown TGN embedding {self.embedding!r}; expected one of {TGN_EMBEDDINGS}")
        if self.aggregator not in TGN_AGGREGATORS:
            raise ConfigError(f"unknown TGN aggregator {self.aggregator!r}")
        if self.num_layers not in (1, 2):
            raise ConfigError(f"TGN supports 1 or 2 layers, got {self.num_layers}")
        if not self.use_memory and self.embedding in ("identity", "time"):
            raise ConfigError(f"embedding {self.embedding!r} needs the memory module")
        if min(self.d_mem, self.d_emb, self.d_time, self.neighbors, self.heads) < 1:
            raise ConfigError("TGN dimensions, heads, and neighbour budget must be positive")


TGN_CONFIGS: dict[str, TgnConfig] = {
    "TGN-attn": TgnConfig(),
    "TGN-id": TgnConfig(embedding="identity"),
    "TGN-time": TgnConfig(embedding="time"),
    "TGN-sum": TgnConfig(embedding="sum"),
    "TGN-mean": TgnConfig(aggregator="mean"),
    "TGN-l2": TgnConfig(num_layers=2),
    "TGN-no mem": TgnConfig(use_memory=False),
}


@dataclass(frozen=True)
class TgatConfig:
    agg_method: str = "attn"
    attn_mode: str = "prod"
    time_mode: str = "time"
    num_layers: int = 2
    hidden: int = 64
    dropout: float = 0.5
    heads: int = 2
    d_time: int = 100
    neighbors: int = 10

    def __post_init__(self):
        if self.agg_method not in ("attn", "lstm", "mean"):
            raise ConfigError(f"unknown TGAT agg_method {self.agg_method!r}")
        if self.attn_mode not in ("prod", "map"):
            raise ConfigError(f"unknown TGAT attn_mode {self.attn_mode!r}")
        if self.time_mode not in ("time", "pos", "empty"):
            raise ConfigError(f"unknown TGAT time_mode {self.time_mode!r}")
        if self.num_layers not in (1, 2):
            raise ConfigError(f"TGAT supports 1 or 2 layers, got {self.num_layers}")


TGAT_CONFIGS: dict[str, tuple[TgatConfig, float]] = {
    "TGAT - attn": (TgatConfig(), 1e-4),
    "TGAT-lstm": (TgatConfig(agg_method="lstm"), 1e-4),
    "TGAT-mean": (TgatConfig(agg_method="mean"), 1e-4),
    "TGAT-map": (TgatConfig(attn_mode="map"), 1e-4),
    "TGAT-pos": (TgatConfig(time_mode="pos"), 1e-4),
    "TGAT-empty": (TgatConfig(time_mode="empty"), 1e-4),
    "TGAT-0.00001": (TgatConfig(), 1e-5),
    "TGAT-0.001": (TgatConfig(), 1e-3),
    "TGAT-0.01": (TgatConfig(), 1e-2),
}


@dataclass
class EventState:
    neighbors: NeighborStore
    memory: Optional[Memory] = None
    mailbox: Optional[RawMessageStore] = None


@dataclass
class _Tree:
    levels: list            # (ids, times) per depth; depth 0 is the query set
    samples: list           # NeighborSample per depth


def build_tree(store: NeighborStore, nodes: np.ndarray, times: np.ndarray, k: int, depth: int) -> _Tree:
    levels = [(np.asarray(nodes, dtype=np.int64), np.asarray(times, dtype=np.float64))]
    samples = []
    for _ in range(depth):
        ids, ts = levels[-1]
        nb = store.sample(ids, ts, k)
        samples.append(nb)
        levels.append((np.concatenate([ids, nb.ids.reshape(-1)]), np.concatenate([ts, nb.times.reshape(-1)])))
    return _Tree(levels, samples)


class _EventModel(Module):
    """Shared plumbing: state, neighbour entries, observation, and decoders."""

    num_layers: int
    neighbors: int

    def __init__(self, num_nodes: int, edge_features: np.ndarray, emb_dim: int, rng: np.random.Generator):
        self.num_nodes = num_nodes
        self.edge_features = np.asarray(edge_features, dtype=np.float64)
        self.decoder = EdgeDecoder(emb_dim, rng)
        self.regressor = NodeRegressor(emb_dim, rng)

    @property
    def edge_dim(self) -> int:
        return self.edge_features.shape[1]

    def new_state(self) -> EventState:
        return EventState(NeighborStore(self.num_nodes))

    def _entries(self, h_nbr: Tensor, nb: NeighborSample, t_query: np.ndarray, enc) -> Tensor:
        m, k = nb.ids.shape
        e = Tensor(self.edge_features[nb.eidx.reshape(-1)])
        parts = [h_nbr, e]
        if enc is not None:
            parts.append(enc(nb, t_query))
        return ops.reshape(ops.concat(parts, axis=1), (m, k, -1))

    def _propagate(self, tree: _Tree, h_deep: Tensor, layers, query_enc, nbr_enc,
                   rng: Optional[np.random.Generator]) -> Tensor:
        h = h_deep
        for depth in reversed(range(len(tree.samples))):
            ids, ts = tree.levels[depth]
            m = ids.shape[0]
            nb = tree.samples[depth]
            h_self = h[:m]
            h_nbr = h[m:]
            layer = layers[len(tree.samples) - 1 - depth]
            entries = self._entries(h_nbr, nb, ts, nbr_enc)
            h = layer(h_self, query_enc(m), entries, nb.mask, rng)
        return h

    def observe(self, state: EventState, src, dst, t, eidx) -> None:
        """File a processed batch: mail for both endpoints, then neighbour entries."""
        if state.memory is not None:
            for node, mail in compute_raw_messages(src, dst, t, eidx, state.memory, self.edge_features):
                state.mailbox.add(node, mail)
        state.neighbors.record_batch(src, dst, t, eidx)

    def commit(self, state: EventState, write: Optional[MemoryWrite]) -> None:
        if state.memory is not None:
            commit(state.memory, state.mailbox, write)

    def advance(self, state: EventState, src, dst, t, eidx) -> None:
        """Replay a batch without scoring it: apply endpoint mail, commit, observe.

        Produces the same state as a scored pass over the same batches, since
        scored passes also commit only the batch's own endpoints.
        """
        if state.memory is not None:
            endpoints = np.unique(np.concatenate([src, dst]).astype(np.int64))
            with no_grad():
                _, _, write = self._base_table(state, endpoints)
            self.commit(state, write)
        self.observe(state, src, dst, t, eidx)

    def _base_table(self, state: EventState, uniq: np.ndarray):
        return Tensor(self.node_features[uniq]), None, None

    def link_logits(self, state: EventState, src, dst, neg, t, rng=None):
        """Decoder logits for (src, dst) and (src, neg) pairs at event times ``t``.

        The returned write covers only the true endpoints; negatives and
        sampled neighbours read memory with their pending mail applied but
        never write it.
        """
        b = len(src)
        nodes = np.concatenate([src, dst, neg])
        times = np.concatenate([t, t, t])
        z, write = self.embed(state, nodes, times, rng)
        z_src, z_dst, z_neg = z[:b], z[b:2 * b], z[2 * b:]
        if write is not None:
            write = write.restrict(np.concatenate([src, dst]))
        return self.decoder.logits(z_src, z_dst), self.decoder.logits(z_src, z_neg), write

    def regress(self, state: EventState, nodes, times, commit_nodes=None, rng=None):
        z, write = self.embed(state, nodes, times, rng)
        if write is not None:
            write = write.restrict(nodes if commit_nodes is None else commit_nodes)
        return self.regressor(z), write


class TGN(_EventModel):
    """Memory-based temporal graph network.

    Messages are the identity of the composed mail; memory rows are updated
    by a GRU. The embedding mode decides how memory becomes the embedding:
    a linear projection ("identity"), a time-decayed projection ("time"), or
    one or two layers of temporal-neighbourhood sum / attention.
    """

    def __init__(self, config: TgnConfig, num_nodes: int, edge_features: np.ndarray,
                 rng: np.random.Generator, node_features: Optional[np.ndarray] = None,
                 time_scale: float = 1.0):
        super().__init__(num_nodes, edge_features, config.d_emb, rng)
        self.config = config
        self.num_layers = config.num_layers
        self.neighbors = config.neighbors
        self.time_scale = float(time_scale) if time_scale > 0 else 1.0
        self.time_encoder = TimeEncoder(config.d_time)
        if node_features is None:
            node_features = np.zeros((num_nodes, config.d_mem))
        self.node_features = np.asarray(node_features, dtype=np.float64)
        F = self.edge_dim
        if config.use_memory:
            msg_dim = 2 * config.d_mem + config.d_time + F
            self.memory_updater = GRUCell(msg_dim, config.d_mem, rng)
            base_dim = config.d_mem
        else:
            base_dim = self.node_features.shape[1]
        if config.embedding == "identity":
            self.project = Linear(base_dim, config.d_emb, rng)
        elif config.embedding == "time":
            self.time_weight = Parameter(glorot(rng, 1, config.d_mem).reshape(-1))
            self.project = Linear(base_dim, config.d_emb, rng)
        else:
            self.layers = []
            dims = [base_dim] + [config.d_emb] * config.num_layers
            for i in range(config.num_layers):
                if config.embedding == "sum":
                    self.layers.append(TemporalSumLayer(dims[i], F, config.d_time, config.d_emb, rng))
                else:
                    self.layers.append(TemporalNeighborhoodLayer(
                        dims[i], F, config.d_time, config.d_emb, config.d_emb, config.heads, rng,
                        dropout=config.dropout))

    @property
    def uses_neighbors(self) -> bool:
        return self.config.embedding in ("sum", "attention")

    def new_state(self) -> EventState:
        state = super().new_state()
        if self.config.use_memory:
            state.memory = Memory(self.num_nodes, self.config.d_mem)
            state.mailbox = RawMessageStore()
        return state

    def _base_table(self, state: EventState, uniq: np.ndarray):
        """Per-node base rows (memory after pending mail, or raw features) and last-update times."""
        if not self.config.use_memory:
            return Tensor(self.node_features[uniq]), None, None
        mem = state.memory
        base = mem.S[uniq].copy()
        last = mem.last_update[uniq].copy()
        pend = np.array([i for i, n in enumerate(uniq) if state.mailbox.has(n)], dtype=np.int64)
        if pend.size == 0:
            return Tensor(base), last, None
        nodes = uniq[pend]
        msg, t_agg = aggregate_batch([state.mailbox.get(n) for n in nodes], self.config.aggregator,
                                     self.time_encoder)
        new = self.memory_updater(msg, Tensor(mem.S[nodes]))
        base[pend] = 0.0
        table = Tensor(base) + ops.scatter_add(new, pend, uniq.shape[0])
        last[pend] = t_agg
        return table, last, MemoryWrite(nodes, new.data.copy(), t_agg)

    def embed(self, state: EventState, nodes, times, rng: Optional[np.random.Generator] = None):
        """Embeddings (len(nodes), d_emb) and the pending memory write."""
        nodes = np.asarray(nodes, dtype=np.int64)
        times = np.asarray(times, dtype=np.float64)
        depth = self.num_layers if self.uses_neighbors else 0
        tree = build_tree(state.neighbors, nodes, times, self.neighbors, depth)
        deep_ids, _ = tree.levels[-1]
        uniq, inv = np.unique(deep_ids, return_inverse=True)
        table, last, write = self._base_table(state, uniq)
        h = ops.index_select(table, inv)
        mode = self.config.embedding
        if mode == "identity":
            return self.project(h), write
        if mode == "time":
            dt = (times - last[inv]) / self.time_scale
            factor = ops.add_scalar(ops.matmul(Tensor(dt[:, None]), ops.reshape(self.time_weight, (1, -1))), 1.0)
            return self.project(h * factor), write
        phi0 = self.time_encoder(np.zeros(1))

        def query_enc(m):
            return ops.expand(phi0, (m, self.config.d_time))

        def nbr_enc(nb, t_query):
            return self.time_encoder((t_query[:, None] - nb.times).reshape(-1))

        return self._propagate(tree, h, self.layers, query_enc, nbr_enc, rng), write


class TGAT(_EventModel):
    """Temporal graph attention without memory; level-0 inputs are raw node features."""

    def __init__(self, config: TgatConfig, num_nodes: int, edge_features: np.ndarray,
                 rng: np.random.Generator, node_features: Optional[np.ndarray] = None):
        super().__init__(num_nodes, edge_features, config.hidden, rng)
        self.config = config
        self.num_layers = config.num_layers
        self.neighbors = config.neighbors
        if node_features is None:
            node_features = np.zeros((num_nodes, self.edge_dim))
        self.node_features = np.asarray(node_features, dtype=np.float64)
        F = self.edge_dim
        if config.time_mode == "time":
            self.time_encoder = TimeEncoder(config.d_time)
        elif config.time_mode == "pos":
            self.rank_encoder = RankEncoder(config.neighbors, config.d_time, rng)
        t_dim = config.d_time if config.time_mode != "empty" else 0
        dims = [self.node_features.shape[1]] + [config.hidden] * config.num_layers
        self.layers = [
            TemporalNeighborhoodLayer(dims[i], F, t_dim, config.hidden, config.hidden, config.heads, rng,
                                      agg=config.agg_method, score=config.attn_mode, dropout=config.dropout)
            for i in range(config.num_layers)]

    def embed(self, state: EventState, nodes, times, rng: Optional[np.random.Generator] = None):
        nodes = np.asarray(nodes, dtype=np.int64)
        times = np.asarray(times, dtype=np.float64)
        tree = build_tree(state.neighbors, nodes, times, self.neighbors, self.num_layers)
        deep_ids, _ = tree.levels[-1]
        h = Tensor(self.node_features[deep_ids])
        mode, d_t = self.config.time_mode, self.config.d_time

        if mode == "time":
            phi0 = self.time_encoder(np.zeros(1))

            def query_enc(m):
                return ops.expand(phi0, (m, d_t))

            def nbr_enc(nb, t_query):
                return self.time_encoder((t_query[:, None] - nb.times).reshape(-1))
        elif mode == "pos":
            k = self.neighbors

            def query_enc(m):
                return self.rank_encoder(np.full(m, k))

            def nbr_enc(nb, t_query):
                return self.rank_encoder(np.tile(np.arange(k), nb.ids.shape[0]))
        else:
            def query_enc(m):
                return Tensor(np.zeros((m, 0)))

            nbr_enc = None

        return self._propagate(tree, h, self.layers, query_enc, nbr_enc, rng), None


def build_event_model(kind: str, config, num_nodes: int, edge_features: np.ndarray,
                      rng: np.random.Generator, **kwargs) -> _EventModel:
    if kind == "tgn":
        if not isinstance(config, TgnConfig):
            raise ConfigError("model 'tgn' needs a TgnConfig")
        return TGN(config, num_nodes, edge_features, rng, **kwargs)
    if kind == "tgat":
        if not isinstance(config, TgatConfig):
            raise ConfigError("model 'tgat' needs a TgatConfig")
        kwargs.pop("time_scale", None)
        return TGAT(config, num_nodes, edge_features, rng, **kwargs)
    raise ConfigError(f"unknown event model {kind!r}; expected 'tgn' or 'tgat'")
