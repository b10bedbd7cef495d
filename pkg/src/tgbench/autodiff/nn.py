"""Parameter containers and the dense layers shared by all models."""
from __future__ import annotations

from typing import Iterator, Optional

import numpy as np

from . import tensor as T
from .tensor import Parameter, Tensor


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape=None) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape or (fan_in, fan_out))


class Module:
    """Base class: discovers parameters held in attributes, lists, and dicts."""

    training = True

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        seen: set[int] = set()
        for name, p in self._walk(prefix):
            if id(p) not in seen:
                seen.add(id(p))
                yield name, p

    def _walk(self, prefix):
        for key, value in vars(self).items():
            yield from _walk_value(f"{prefix}{key}", value)

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def modules(self) -> Iterator["Module"]:
        yield self
        for value in vars(self).values():
            for child in _child_modules(value):
                yield from child.modules()

    def train(self, mode: bool = True) -> "Module":
        for m in self.modules():
            m.training = mode
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for name, p in self.named_parameters():
            p.data[...] = state[name]

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())


def _walk_value(name, value):
    if isinstance(value, Parameter):
        yield name, value
    elif isinstance(value, Module):
        yield from value._walk(name + ".")
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            yield from _walk_value(f"{name}.{i}", v)
    elif isinstance(value, dict):
        for k, v in value.items():
            yield from _walk_value(f"{name}.{k}", v)


def _child_modules(value):
    if isinstance(value, Module):
        yield value
    elif isinstance(value, (list, tuple)):
        for v in value:
            yield from _child_modules(v)
    elif isinstance(value, dict):
        for v in value.values():
            yield from _child_modules(v)


def parameter_checksum(module: Module) -> str:
    import hashlib

    h = hashlib.sha256()
    for name, p in module.named_parameters():
        h.update(name.encode())
        h.update(np.ascontiguousarray(p.data).tobytes())
    return h.hexdigest()


class Linear(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator, bias: bool = True):
        self.weight = Parameter(glorot(rng, in_features, out_features))
        self.bias = Parameter(np.zeros(out_features)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        out = T.matmul(x, self.weight)
        return T.broadcast_add_bias(out, self.bias) if self.bias is not None else out


class MLP(Module):
    """Two-layer perceptron: linear, ReLU, (dropout,) linear."""

    def __init__(self, in_features: int, hidden: int, out_features: int, rng: np.random.Generator,
                 dropout: float = 0.0):
        self.fc1 = Linear(in_features, hidden, rng)
        self.fc2 = Linear(hidden, out_features, rng)
        self.dropout = dropout

    def __call__(self, x: Tensor, rng: Optional[np.random.Generator] = None) -> Tensor:
        h = T.relu(self.fc1(x))
        if rng is not None:
            h = T.dropout(h, self.dropout, rng, self.training)
        return self.fc2(h)


class GRUCell(Module):
    """Gated recurrent cell with the reset gate applied before the hidden map.

    z = σ(x·Wxz + h·Whz + bz), r = σ(x·Wxr + h·Whr + br),
    ñ = tanh(x·Wxn + (r⊙h)·Whn + bn), h' = z⊙h + (1−z)⊙ñ.
    """

    def __init__(self, input_size: int, hidden_size: int, rng: np.random.Generator):
        self.hidden_size = hidden_size
        self.w_x = Parameter(np.concatenate(
            [glorot(rng, input_size, hidden_size) for _ in range(3)], axis=1))
        self.w_h = Parameter(np.concatenate(
            [glorot(rng, hidden_size, hidden_size) for _ in range(2)], axis=1))
        self.w_hn = Parameter(glorot(rng, hidden_size, hidden_size))
        self.bias = Parameter(np.zeros(3 * hidden_size))

    def __call__(self, x: Tensor, h: Tensor) -> Tensor:
        d = self.hidden_size
        gx = T.broadcast_add_bias(T.matmul(x, self.w_x), self.bias)
        gh = T.matmul(h, self.w_h)
        z = T.sigmoid(gx[:, :d] + gh[:, :d])
        r = T.sigmoid(gx[:, d:2 * d] + gh[:, d:])
        n = T.tanh(gx[:, 2 * d:] + T.matmul(r * h, self.w_hn))
        return z * h + (1.0 - z) * n


class LSTMCell(Module):
    """Standard LSTM cell without peepholes; returns (h', c')."""

    def __init__(self, input_size: int, hidden_size: int, rng: np.random.Generator):
        self.hidden_size = hidden_size
        self.w_x = Parameter(np.concatenate(
            [glorot(rng, input_size, hidden_size) for _ in range(4)], axis=1))
        self.w_h = Parameter(np.concatenate(
            [glorot(rng, hidden_size, hidden_size) for _ in range(4)], axis=1))
        self.bias = Parameter(np.zeros(4 * hidden_size))

    def __call__(self, x: Tensor, state: tuple[Tensor, Tensor]) -> tuple[Tensor, Tensor]:
        h, c = state
        d = self.hidden_size
        g = T.broadcast_add_bias(T.matmul(x, self.w_x) + T.matmul(h, self.w_h), self.bias)
        i = T.sigmoid(g[:, :d])
        f = T.sigmoid(g[:, d:2 * d])
        cand = T.tanh(g[:, 2 * d:3 * d])
        o = T.sigmoid(g[:, 3 * d:])
        c_new = f * c + i * cand
        return o * T.tanh(c_new), c_new
