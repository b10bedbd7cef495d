"""Dense normalized graph operators.

Edges are directed ``(src, dst)`` pairs and aggregate at ``dst``: the dense
matrix has ``A[dst, src] += weight`` and node degrees are its row sums.
"""
from __future__ import annotations

import numpy as np

from ..errors import DimensionError, DomainError


def weighted_adjacency(edges, weights, num_nodes: int) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if weights.shape[0] != edges.shape[0]:
        raise DimensionError(f"{edges.shape[0]} edges but {weights.shape[0]} weights")
    if np.any(weights < 0):
        raise DomainError("edge weights must be nonnegative")
    if edges.size and (edges.min() < 0 or edges.max() >= num_nodes):
        raise DimensionError(f"edge index outside [0, {num_nodes})")
    A = np.zeros((num_nodes, num_nodes))
    np.add.at(A, (edges[:, 1], edges[:, 0]), weights)
    return A


def _normalize(A: np.ndarray) -> np.ndarray:
    deg = A.sum(axis=1)
    inv = np.zeros_like(deg)
    nz = deg > 0
    inv[nz] = deg[nz] ** -0.5
    return inv[:, None] * A * inv[None, :]


def sym_norm_adjacency(edges, weights, num_nodes: int, add_self_loops: bool = True) -> np.ndarray:
    """D^-1/2 (A [+ I]) D^-1/2; zero-degree rows stay zero."""
    A = weighted_adjacency(edges, weights, num_nodes)
    if add_self_loops:
        A = A + np.eye(num_nodes)
    return _normalize(A)


def scaled_laplacian(edges, weights, num_nodes: int, lambda_max: float = 2.0) -> np.ndarray:
    """(2 / lambda_max) (I - D^-1/2 A D^-1/2) - I."""
    L = np.eye(num_nodes) - sym_norm_adjacency(edges, weights, num_nodes, add_self_loops=False)
    return (2.0 / lambda_max) * L - np.eye(num_nodes)
