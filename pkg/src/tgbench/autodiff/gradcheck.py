"""Central finite-difference verification of analytic gradients."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..errors import NumericError
from .tensor import Tensor, backward


def _scalar(loss: Tensor) -> float:
    value = float(np.asarray(loss.data).reshape(-1)[0])
    if not np.isfinite(value):
        raise NumericError(f"gradient_check: loss is not finite ({value})")
    return value


def gradient_check(builder: Callable[[], Tensor], params: Sequence[Tensor], eps: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    The relative error of one entry is ``|a - n| / max(1, |a|, |n|)``.
    ``builder`` must be deterministic and must read the current parameter data.
    """
    for p in params:
        p.grad = None
    loss = builder()
    _scalar(loss)
    backward(loss)
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]

    worst = 0.0
    for p, a in zip(params, analytic):
        flat = p.data.reshape(-1)
        a_flat = a.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            f_plus = _scalar(builder())
            flat[i] = orig - eps
            f_minus = _scalar(builder())
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * eps)
            err = abs(a_flat[i] - numeric) / max(1.0, abs(a_flat[i]), abs(numeric))
            worst = max(worst, err)
    for p in params:
        p.grad = None
    return worst
