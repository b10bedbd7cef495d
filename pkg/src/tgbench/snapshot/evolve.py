"""GCN layers whose weight matrix is evolved over time by a recurrent cell.

In both variants the weight ``W`` (F_in x F_out) is handled column-wise: its
transpose is a batch of F_out sequence elements of width F_in.

* ``-O``: an LSTM cell consumes ``W_{t-1}`` as input and emits ``W_t`` as its
  hidden output; the LSTM cell state is carried per column.
* ``-H``: ``W`` is the hidden state of a GRU whose input summarises the node
  embeddings by top-k scoring against a learned vector ``p``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..autodiff import GRUCell, LSTMCell, Module, Parameter, Tensor, glorot
from ..autodiff import ops
from ..errors import DimensionError


@dataclass
class EvolveState:
    W: Tensor                      # (F_in, F_out)
    cell: Optional[Tensor] = None  # (F_out, F_in) LSTM cell state, -O only


def _identity(x: Tensor) -> Tensor:
    return x


def top_k_rows(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest scores, descending; ties go to the lower index."""
    order = np.lexsort((np.arange(scores.shape[0]), -scores))
    return order[:k]


class EvolveGCNO(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        self.in_features, self.out_features = in_features, out_features
        self.initial_weight = Parameter(glorot(rng, in_features, out_features))
        self.recurrent = LSTMCell(in_features, in_features, rng)
        self.evolve = True

    def init_state(self) -> EvolveState:
        return EvolveState(self.initial_weight, Tensor(np.zeros((self.out_features, self.in_features))))

    def __call__(self, X: Tensor, state: EvolveState, A_hat: np.ndarray,
                 activation: Callable[[Tensor], Tensor] = _identity) -> tuple[Tensor, EvolveState]:
        return evolvegcn_o_step(X, A_hat, state, self, activation)


def evolvegcn_o_step(X: Tensor, A_hat: np.ndarray, state: EvolveState, layer: EvolveGCNO,
                     activation: Callable[[Tensor], Tensor] = _identity) -> tuple[Tensor, EvolveState]:
    if X.shape[1] != layer.in_features:
        raise DimensionError(f"EvolveGCN-O expects {layer.in_features} features, got {X.shape}")
    if layer.evolve:
        cols = ops.transpose(state.W)
        h, c = layer.recurrent(cols, (cols, state.cell))
        W, cell = ops.transpose(h), c
    else:
        W, cell = state.W, state.cell
    out = activation(ops.matmul(ops.matmul(Tensor(A_hat), X), W))
    return out, EvolveState(W, cell)


class EvolveGCNH(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        self.in_features, self.out_features = in_features, out_features
        self.initial_weight = Parameter(glorot(rng, in_features, out_features))
        self.p = Parameter(glorot(rng, in_features, 1).reshape(-1))
        self.recurrent = GRUCell(in_features, in_features, rng)

    def init_state(self) -> EvolveState:
        return EvolveState(self.initial_weight)

    def summarize(self, X: Tensor) -> Tensor:
        """F_out rows of X, chosen by score X·p/|p| and scaled by tanh(score).

        The selection itself is piecewise constant; gradients flow through
        the selected rows and the tanh scaling. Graphs with fewer than F_out
        nodes are padded with zero rows.
        """
        n, k = X.shape[0], self.out_features
        norm = ops.sqrt(ops.sum_(self.p * self.p))
        scores = ops.matmul(X, ops.reshape(self.p, (-1, 1)))
        scores = ops.div(scores, ops.expand(ops.reshape(norm, (1, 1)), scores.shape))
        top = top_k_rows(scores.data.reshape(-1), min(k, n))
        rows = ops.index_select(X, top)
        scale = ops.tanh(ops.index_select(scores, top))
        Z = rows * ops.expand(scale, rows.shape)
        if n < k:
            Z = ops.concat([Z, Tensor(np.zeros((k - n, X.shape[1])))], axis=0)
        return Z

    def __call__(self, X: Tensor, state: EvolveState, A_hat: np.ndarray,
                 activation: Callable[[Tensor], Tensor] = _identity) -> tuple[Tensor, EvolveState]:
        return evolvegcn_h_step(X, A_hat, state, self, activation)


def evolvegcn_h_step(X: Tensor, A_hat: np.ndarray, state: EvolveState, layer: EvolveGCNH,
                     activation: Callable[[Tensor], Tensor] = _identity) -> tuple[Tensor, EvolveState]:
    if X.shape[1] != layer.in_features:
        raise DimensionError(f"EvolveGCN-H expects {layer.in_features} features, got {X.shape}")
    Z = layer.summarize(X)
    W = ops.transpose(layer.recurrent(Z, ops.transpose(state.W)))
    out = activation(ops.matmul(ops.matmul(Tensor(A_hat), X), W))
    return out, EvolveState(W)
