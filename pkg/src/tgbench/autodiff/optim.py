"""Adam, SGD, SGD with momentum, and RMSProp over ``Parameter`` lists."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ConfigError, ContractError
from .tensor import Parameter

OPTIMIZERS = ("adam", "sgd", "sgd_momentum", "rmsprop")
_ALIASES = {"sgdm": "sgd_momentum", "sgd-momentum": "sgd_momentum", "rms": "rmsprop"}


def canonical_optimizer(name: str) -> str:
    key = _ALIASES.get(name.lower(), name.lower())
    if key not in OPTIMIZERS:
        raise ConfigError(f"unknown optimizer {name!r}; expected one of {OPTIMIZERS}")
    return key


@dataclass
class OptimizerState:
    kind: str
    lr: float
    momentum: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    decay: float = 0.99
    buffers: dict[int, dict[str, np.ndarray]] = field(default_factory=dict)
    step_count: int = 0

    def __post_init__(self):
        self.kind = canonical_optimizer(self.kind)
        if not self.lr > 0:
            raise ConfigError(f"learning rate must be positive, got {self.lr}")
        if self.kind == "sgd_momentum" and not 0.0 <= self.momentum < 1.0:
            raise ConfigError(f"momentum must lie in [0, 1), got {self.momentum}")


def optimizer_step(params: Sequence[Parameter], state: OptimizerState, names: Sequence[str] | None = None) -> None:
    """Apply one update in place, then clear the gradients."""
    for i, p in enumerate(params):
        if p.grad is None:
            label = names[i] if names else f"handle {p.handle}"
            raise ContractError(f"optimizer_step: parameter {label} has no gradient")
    state.step_count += 1
    t = state.step_count
    for p in params:
        g = p.grad
        buf = state.buffers.setdefault(p.handle, {})
        if state.kind == "sgd":
            p.data -= state.lr * g
        elif state.kind == "sgd_momentum":
            v = buf.get("velocity")
            v = g.copy() if v is None else state.momentum * v + g
            buf["velocity"] = v
            p.data -= state.lr * v
        elif state.kind == "rmsprop":
            s = buf.get("square_avg", np.zeros_like(p.data))
            s = state.decay * s + (1.0 - state.decay) * g * g
            buf["square_avg"] = s
            p.data -= state.lr * g / (np.sqrt(s) + state.epsilon)
        else:
            m = buf.get("m", np.zeros_like(p.data))
            v = buf.get("v", np.zeros_like(p.data))
            m = state.beta1 * m + (1.0 - state.beta1) * g
            v = state.beta2 * v + (1.0 - state.beta2) * g * g
            buf["m"], buf["v"] = m, v
            m_hat = m / (1.0 - state.beta1 ** t)
            v_hat = v / (1.0 - state.beta2 ** t)
            p.data -= state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
        p.grad = None


class Optimizer:
    """Convenience wrapper binding a parameter list to an ``OptimizerState``."""

    def __init__(self, params: Sequence[Parameter], kind: str, lr: float, **kwargs):
        self.params = list(params)
        self.state = OptimizerState(kind=kind, lr=lr, **kwargs)

    def step(self) -> None:
        # parameters outside the current trace are left untouched
        optimizer_step([p for p in self.params if p.grad is not None], self.state)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None
