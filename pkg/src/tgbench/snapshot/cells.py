"""Chebyshev graph convolution and the graph-convolutional GRU / LSTM cells."""
from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from ..autodiff import Module, Parameter, Tensor, glorot
from ..autodiff import ops
from ..errors import DimensionError
from .graph_ops import scaled_laplacian


def cheb_basis(L_hat: np.ndarray, X: Tensor, K: int) -> list[Tensor]:
    """[T_0(L̂)X, ..., T_{K-1}(L̂)X] via T_k = 2 L̂ T_{k-1} - T_{k-2}."""
    if X.ndim != 2 or X.shape[0] != L_hat.shape[0]:
        raise DimensionError(f"cheb_basis: operator {L_hat.shape} vs features {X.shape}")
    L = Tensor(L_hat)
    basis = [X]
    if K > 1:
        basis.append(ops.matmul(L, X))
    for _ in range(2, K):
        basis.append(ops.matmul(L, basis[-1]) * 2.0 - basis[-2])
    return basis


class ChebConv(Module):
    """out = Σ_k T_k(L̂) X θ_k + bias, with L̂ the scaled Laplacian (lambda_max = 2)."""

    def __init__(self, in_features: int, out_features: int, K: int, rng: np.random.Generator,
                 lambda_max: float = 2.0):
        if K < 1:
            raise DimensionError(f"Chebyshev order must be >= 1, got {K}")
        self.K = K
        self.lambda_max = lambda_max
        self.in_features, self.out_features = in_features, out_features
        self.theta = [Parameter(glorot(rng, in_features, out_features)) for _ in range(K)]
        self.bias = Parameter(np.zeros(out_features))

    def apply_basis(self, basis: list[Tensor]) -> Tensor:
        out = ops.matmul(basis[0], self.theta[0])
        for b, th in zip(basis[1:], self.theta[1:]):
            out = out + ops.matmul(b, th)
        return ops.broadcast_add_bias(out, self.bias)

    def __call__(self, X: Tensor, L_hat: np.ndarray) -> Tensor:
        if X.shape[1] != self.in_features:
            raise DimensionError(f"ChebConv expects {self.in_features} input features, got {X.shape}")
        return self.apply_basis(cheb_basis(L_hat, X, self.K))


def cheb_conv(X: Tensor, edges, weights, conv: ChebConv) -> Tensor:
    L_hat = scaled_laplacian(edges, weights, X.shape[0], conv.lambda_max)
    return conv(X, L_hat)


@dataclass
class GConvGRUState:
    H: Tensor


@dataclass
class GConvLSTMState:
    H: Tensor
    C: Tensor


class GConvGRU(Module):
    """Graph GRU where every gate map is a Chebyshev convolution."""

    def __init__(self, in_features: int, hidden: int, K: int, rng: np.random.Generator):
        self.hidden = hidden
        self.K = K
        self.conv_xz, self.conv_hz = ChebConv(in_features, hidden, K, rng), ChebConv(hidden, hidden, K, rng)
        self.conv_xr, self.conv_hr = ChebConv(in_features, hidden, K, rng), ChebConv(hidden, hidden, K, rng)
        self.conv_xh, self.conv_hh = ChebConv(in_features, hidden, K, rng), ChebConv(hidden, hidden, K, rng)

    def init_state(self, num_nodes: int) -> GConvGRUState:
        return GConvGRUState(Tensor(np.zeros((num_nodes, self.hidden))))

    def __call__(self, X: Tensor, state: GConvGRUState, L_hat: np.ndarray) -> GConvGRUState:
        H = state.H
        if H.shape != (X.shape[0], self.hidden):
            raise DimensionError(f"GConvGRU: hidden state {H.shape} vs ({X.shape[0]}, {self.hidden})")
        bx = cheb_basis(L_hat, X, self.K)
        bh = cheb_basis(L_hat, H, self.K)
        z = ops.sigmoid(self.conv_xz.apply_basis(bx) + self.conv_hz.apply_basis(bh))
        r = ops.sigmoid(self.conv_xr.apply_basis(bx) + self.conv_hr.apply_basis(bh))
        h_tilde = ops.tanh(self.conv_xh.apply_basis(bx) + self.conv_hh(r * H, L_hat))
        return GConvGRUState(z * H + (1.0 - z) * h_tilde)


class GConvLSTM(Module):
    """Graph LSTM with Chebyshev gate maps and peephole vectors w_ci, w_cf, w_co."""

    def __init__(self, in_features: int, hidden: int, K: int, rng: np.random.Generator):
        self.hidden = hidden
        self.K = K
        self.conv_x = {g: ChebConv(in_features, hidden, K, rng) for g in "ifco"}
        self.conv_h = {g: ChebConv(hidden, hidden, K, rng) for g in "ifco"}
        self.w_ci = Parameter(glorot(rng, 1, hidden).reshape(-1))
        self.w_cf = Parameter(glorot(rng, 1, hidden).reshape(-1))
        self.w_co = Parameter(glorot(rng, 1, hidden).reshape(-1))

    def init_state(self, num_nodes: int) -> GConvLSTMState:
        zeros = np.zeros((num_nodes, self.hidden))
        return GConvLSTMState(Tensor(zeros), Tensor(zeros.copy()))

    def __call__(self, X: Tensor, state: GConvLSTMState, L_hat: np.ndarray) -> GConvLSTMState:
        H, C = state.H, state.C
        if H.shape != (X.shape[0], self.hidden):
            raise DimensionError(f"GConvLSTM: hidden state {H.shape} vs ({X.shape[0]}, {self.hidden})")
        shape = H.shape
        bx = cheb_basis(L_hat, X, self.K)
        bh = cheb_basis(L_hat, H, self.K)

        def gate(g):
            return self.conv_x[g].apply_basis(bx) + self.conv_h[g].apply_basis(bh)

        i = ops.sigmoid(gate("i") + ops.expand(self.w_ci, shape) * C)
        f = ops.sigmoid(gate("f") + ops.expand(self.w_cf, shape) * C)
        C_new = f * C + i * ops.tanh(gate("c"))
        o = ops.sigmoid(gate("o") + ops.expand(self.w_co, shape) * C_new)
        return GConvLSTMState(o * ops.tanh(C_new), C_new)
