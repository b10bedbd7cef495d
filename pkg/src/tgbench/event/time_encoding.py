"""Learnable cosine time encodings."""
from __future__ import annotations

import numpy as np

from ..autodiff import Module, Parameter, Tensor
from ..autodiff import ops


def time_encode(delta_t, omega: np.ndarray, phase: np.ndarray) -> np.ndarray:
    """φ(Δt)_j = cos(ω_j Δt + b_j) for a scalar or 1-D array of time differences."""
    dt = np.asarray(delta_t, dtype=np.float64)
    return np.cos(dt[..., None] * omega + phase)


class TimeEncoder(Module):
    """Cosine features of a time difference with a geometric frequency ladder.

    Frequencies start at ω_j = 10^(-9 j / d) (spanning 1 down to ~1e-9) with
    zero phase; both are trained.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"time encoding dimension must be >= 1, got {dim}")
        self.dim = dim
        self.omega = Parameter(1.0 / 10 ** np.linspace(0, 9, dim, endpoint=False))
        self.phase = Parameter(np.zeros(dim))

    def __call__(self, delta_t) -> Tensor:
        dt = np.asarray(delta_t, dtype=np.float64).reshape(-1, 1)
        angle = ops.matmul(Tensor(dt), ops.reshape(self.omega, (1, self.dim)))
        return ops.cos(ops.broadcast_add_bias(angle, self.phase))


class RankEncoder(Module):
    """Learned embedding per neighbour slot; slot ``k`` encodes the query itself."""

    def __init__(self, slots: int, dim: int, rng: np.random.Generator):
        self.dim = dim
        self.slots = slots
        self.table = Parameter(rng.normal(0.0, 0.1, size=(slots + 1, dim)))

    def __call__(self, slot_index) -> Tensor:
        return ops.index_select(self.table, np.asarray(slot_index, dtype=np.int64).reshape(-1))
