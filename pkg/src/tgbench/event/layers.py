"""Neighbourhood aggregation layers and prediction heads for event models."""
from __future__ import annotations

from typing import Optional

import numpy as np

from ..autodiff import Linear, LSTMCell, MLP, Module, Tensor
from ..autodiff import ops
from ..errors import ConfigError

MASK_FILL = -1e10


def _split_heads(x: Tensor, m: int, k: int, heads: int) -> Tensor:
    """(m, k, d) -> (m * heads, k, d / heads)."""
    d = x.shape[-1] // heads
    x = ops.reshape(x, (m, k, heads, d))
    return ops.reshape(ops.transpose(x, (0, 2, 1, 3)), (m * heads, k, d))


class TemporalNeighborhoodLayer(Module):
    """Aggregates a node's sampled temporal neighbours into a new representation.

    Query input is [h_self ‖ T_query]; neighbour entries are
    [h_nbr ‖ e ‖ T_nbr]. ``agg`` selects softmax attention, an LSTM over the
    time-ordered entries, or an unweighted mean of value projections;
    ``score`` selects scaled dot products ("prod") or a two-layer perceptron
    on [q ‖ k] ("map"). The output is a two-layer perceptron on
    [combined ‖ h_self]; nodes without neighbours get a zero combined vector.
    """

    def __init__(self, self_dim: int, edge_dim: int, time_dim: int, model_dim: int, out_dim: int,
                 heads: int, rng: np.random.Generator, agg: str = "attn", score: str = "prod",
                 dropout: float = 0.0):
        if agg not in ("attn", "lstm", "mean"):
            raise ConfigError(f"unknown aggregation {agg!r}")
        if score not in ("prod", "map"):
            raise ConfigError(f"unknown attention mode {score!r}")
        if model_dim % heads:
            raise ConfigError(f"model dimension {model_dim} not divisible by {heads} heads")
        self.agg, self.score, self.heads, self.dropout = agg, score, heads, dropout
        self.model_dim = model_dim
        entry_dim = self_dim + edge_dim + time_dim
        if agg == "lstm":
            self.cell = LSTMCell(entry_dim, model_dim, rng)
        else:
            self.w_v = Linear(entry_dim, model_dim, rng)
            self.w_o = Linear(model_dim, model_dim, rng)
        if agg == "attn":
            self.w_q = Linear(self_dim + time_dim, model_dim, rng)
            self.w_k = Linear(entry_dim, model_dim, rng)
            if score == "map":
                dh = model_dim // heads
                self.scorer = MLP(2 * dh, dh, 1, rng)
        self.merge = MLP(model_dim + self_dim, out_dim, out_dim, rng, dropout=dropout)
        self.last_attention: Optional[np.ndarray] = None

    def __call__(self, h_self: Tensor, t_query: Tensor, entries: Tensor, mask: np.ndarray,
                 rng: Optional[np.random.Generator] = None) -> Tensor:
        m, k = mask.shape
        has_any = mask.any(axis=1).astype(np.float64)[:, None]
        fmask = mask.astype(np.float64)
        if self.agg == "lstm":
            combined = self._lstm(entries, fmask)
        elif self.agg == "mean":
            values = ops.reshape(self.w_v(ops.reshape(entries, (m * k, -1))), (m, k, self.model_dim))
            weights = fmask / np.maximum(fmask.sum(axis=1, keepdims=True), 1.0)
            w = ops.expand(Tensor(weights[:, :, None]), values.shape)
            combined = self.w_o(ops.sum_(values * w, axis=1))
        else:
            combined = self.w_o(self._attend(h_self, t_query, entries, mask))
        combined = combined * ops.expand(Tensor(has_any), combined.shape)
        if rng is not None:
            combined = ops.dropout(combined, self.dropout, rng, self.training)
        return self.merge(ops.concat([combined, h_self], axis=1), rng)

    def _attend(self, h_self, t_query, entries, mask):
        m, k = mask.shape
        H, d = self.heads, self.model_dim
        dh = d // H
        flat = ops.reshape(entries, (m * k, -1))
        q = ops.reshape(self.w_q(ops.concat([h_self, t_query], axis=1)), (m, 1, d))
        keys = _split_heads(ops.reshape(self.w_k(flat), (m, k, d)), m, k, H)        # (mH, k, dh)
        values = _split_heads(ops.reshape(self.w_v(flat), (m, k, d)), m, k, H)      # (mH, k, dh)
        q = _split_heads(q, m, 1, H)                                                # (mH, 1, dh)
        if self.score == "prod":
            scores = ops.matmul(q, ops.transpose(keys, (0, 2, 1))) * (1.0 / np.sqrt(dh))
            scores = ops.reshape(scores, (m * H, k))
        else:
            pairs = ops.concat([ops.expand(q, keys.shape), keys], axis=2)
            scores = ops.reshape(self.scorer(ops.reshape(pairs, (m * H * k, 2 * dh))), (m * H, k))
        fill = np.where(np.repeat(mask, H, axis=0), 0.0, MASK_FILL)
        attn = ops.softmax(scores + Tensor(fill), axis=1)
        self.last_attention = attn.data.reshape(m, H, k)
        out = ops.matmul(ops.reshape(attn, (m * H, 1, k)), values)                 # (mH, 1, dh)
        return ops.reshape(out, (m, d))

    def _lstm(self, entries, fmask):
        m, k = fmask.shape
        h = Tensor(np.zeros((m, self.model_dim)))
        c = Tensor(np.zeros((m, self.model_dim)))
        for s in range(k):
            if not fmask[:, s].any():
                continue
            x = ops.reshape(entries[:, s, :], (m, -1))
            h_new, c_new = self.cell(x, (h, c))
            keep = Tensor(np.repeat(fmask[:, s:s + 1], self.model_dim, axis=1))
            drop = Tensor(1.0 - keep.data)
            h = h_new * keep + h * drop
            c = c_new * keep + c * drop
        return h


class TemporalSumLayer(Module):
    """h ← relu(W_self h + Σ_j W_nbr [h_j ‖ e ‖ φ(t − t_j)])."""

    def __init__(self, self_dim: int, edge_dim: int, time_dim: int, out_dim: int, rng: np.random.Generator):
        self.w_self = Linear(self_dim, out_dim, rng)
        self.w_nbr = Linear(self_dim + edge_dim + time_dim, out_dim, rng, bias=False)
        self.out_dim = out_dim

    def __call__(self, h_self: Tensor, t_query: Tensor, entries: Tensor, mask: np.ndarray,
                 rng: Optional[np.random.Generator] = None) -> Tensor:
        m, k = mask.shape
        proj = ops.reshape(self.w_nbr(ops.reshape(entries, (m * k, -1))), (m, k, self.out_dim))
        w = ops.expand(Tensor(mask.astype(np.float64)[:, :, None]), proj.shape)
        return ops.relu(self.w_self(h_self) + ops.sum_(proj * w, axis=1))


class EdgeDecoder(Module):
    """Logit of an interaction from [z_src ‖ z_dst] through a two-layer perceptron."""

    def __init__(self, dim: int, rng: np.random.Generator, hidden: Optional[int] = None):
        self.mlp = MLP(2 * dim, hidden or dim, 1, rng)

    def logits(self, z_src: Tensor, z_dst: Tensor) -> Tensor:
        out = self.mlp(ops.concat([z_src, z_dst], axis=1))
        return ops.reshape(out, (z_src.shape[0],))

    def __call__(self, z_src: Tensor, z_dst: Tensor) -> Tensor:
        return ops.sigmoid(self.logits(z_src, z_dst))


class NodeRegressor(Module):
    """Scalar prediction per embedding via d -> d -> 1 perceptron, linear output."""

    def __init__(self, dim: int, rng: np.random.Generator):
        self.mlp = MLP(dim, dim, 1, rng)

    def __call__(self, z: Tensor) -> Tensor:
        return ops.reshape(self.mlp(z), (z.shape[0],))


def edge_decoder(decoder: EdgeDecoder, z_src: Tensor, z_dst: Tensor) -> Tensor:
    return decoder(z_src, z_dst)
