"""Node-regression models over snapshot sequences."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import Linear, Module, Tensor
from ..autodiff import ops
from ..data.snapshots import Snapshot
from ..errors import ConfigError, DimensionError
from .cells import GConvGRU, GConvLSTM
from .evolve import EvolveGCNH, EvolveGCNO
from .graph_ops import scaled_laplacian, sym_norm_adjacency

SNAPSHOT_MODELS = ("gconv_gru", "gconv_lstm", "evolvegcn_o", "evolvegcn_h")
ACTIVATIONS = {"relu": ops.relu, "tanh": ops.tanh}


def activation_fn(name: str):
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ConfigError(f"unknown activation {name!r}; expected one of {sorted(ACTIVATIONS)}") from None


def regression_readout(H: Tensor, activation: str, head: Linear) -> Tensor:
    """activation(H)·w + b, one scalar per node (returned as an (N,) tensor)."""
    if H.shape[1] != head.weight.shape[0]:
        raise DimensionError(f"readout expects {head.weight.shape[0]} features, got {H.shape}")
    out = head(activation_fn(activation)(H))
    return ops.reshape(out, (H.shape[0],))


@dataclass(frozen=True)
class GraphOperators:
    laplacian: np.ndarray   # scaled Laplacian for Chebyshev filters
    adjacency: np.ndarray   # self-looped normalized adjacency for GCN layers


def prepare_operators(snapshot: Snapshot, lambda_max: float = 2.0) -> GraphOperators:
    n = snapshot.num_nodes
    return GraphOperators(scaled_laplacian(snapshot.edges, snapshot.weights, n, lambda_max),
                          sym_norm_adjacency(snapshot.edges, snapshot.weights, n, add_self_loops=True))


class SnapshotRegressor(Module):
    """A recurrent graph layer followed by the activation + linear readout."""

    def __init__(self, kind: str, in_features: int, hidden: int = 32, K: int = 2,
                 activation: str = "relu", rng: np.random.Generator | None = None):
        if kind not in SNAPSHOT_MODELS:
            raise ConfigError(f"unknown snapshot model {kind!r}; expected one of {SNAPSHOT_MODELS}")
        activation_fn(activation)
        rng = rng if rng is not None else np.random.default_rng(0)
        self.kind = kind
        self.activation = activation
        if kind == "gconv_gru":
            self.layer = GConvGRU(in_features, hidden, K, rng)
        elif kind == "gconv_lstm":
            self.layer = GConvLSTM(in_features, hidden, K, rng)
        elif kind == "evolvegcn_o":
            self.layer = EvolveGCNO(in_features, hidden, rng)
        else:
            self.layer = EvolveGCNH(in_features, hidden, rng)
        self.head = Linear(hidden, 1, rng)

    def init_state(self, num_nodes: int):
        if self.kind in ("gconv_gru", "gconv_lstm"):
            return self.layer.init_state(num_nodes)
        return self.layer.init_state()

    def step(self, X: Tensor, state, graph: GraphOperators):
        """Advance one snapshot; returns (per-node predictions, new state)."""
        if self.kind in ("gconv_gru", "gconv_lstm"):
            state = self.layer(X, state, graph.laplacian)
            H = state.H
        else:
            H, state = self.layer(X, state, graph.adjacency)
        return regression_readout(H, self.activation, self.head), state
