"""Graph-convolutional recurrent cells and evolving-weight GCNs for snapshot sequences."""
from .cells import ChebConv, GConvGRU, GConvGRUState, GConvLSTM, GConvLSTMState, cheb_basis, cheb_conv
from .evolve import EvolveGCNH, EvolveGCNO, EvolveState, evolvegcn_h_step, evolvegcn_o_step, top_k_rows
from .graph_ops import scaled_laplacian, sym_norm_adjacency, weighted_adjacency
from .models import (ACTIVATIONS, SNAPSHOT_MODELS, GraphOperators, SnapshotRegressor, activation_fn,
                     prepare_operators, regression_readout)

__all__ = [
    "ACTIVATIONS", "ChebConv", "EvolveGCNH", "EvolveGCNO", "EvolveState", "GConvGRU", "GConvGRUState",
    "GConvLSTM", "GConvLSTMState", "GraphOperators", "SNAPSHOT_MODELS", "SnapshotRegressor",
    "activation_fn", "cheb_basis", "cheb_conv", "evolvegcn_h_step", "evolvegcn_o_step",
    "prepare_operators", "regression_readout", "scaled_laplacian", "sym_norm_adjacency", "top_k_rows",
    "weighted_adjacency",
]
