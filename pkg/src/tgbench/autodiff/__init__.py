"""Minimal float64 tensor engine with reverse-mode differentiation."""
from . import tensor as ops
from .gradcheck import gradient_check
from .nn import GRUCell, Linear, LSTMCell, MLP, Module, glorot, parameter_checksum
from .optim import OPTIMIZERS, Optimizer, OptimizerState, canonical_optimizer, optimizer_step
from .tensor import Parameter, Tensor, backward, no_grad

__all__ = [
    "GRUCell", "LSTMCell", "Linear", "MLP", "Module", "OPTIMIZERS", "Optimizer", "OptimizerState",
    "Parameter", "Tensor", "backward", "canonical_optimizer", "glorot", "gradient_check", "no_grad",
    "ops", "optimizer_step", "parameter_checksum",
]
