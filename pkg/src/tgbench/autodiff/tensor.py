"""Dense float64 tensors with a recorded trace for reverse-mode differentiation.

Every primitive below computes its forward value with numpy and, when any
input requires a gradient, attaches a closure that maps the output gradient to
input gradients. Shapes must match exactly for elementwise primitives; the
only broadcasting forms are the explicit ``broadcast_add_bias`` and ``expand``
primitives.
"""
from __future__ import annotations

import contextlib
import itertools
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from ..errors import ContractError, DimensionError, DomainError

_GRAD_ENABLED = True
_HANDLES = itertools.count()


@contextlib.contextmanager
def no_grad():
    """Disable trace recording inside the block."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    """A float64 array that optionally records how it was produced."""

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "op", "__weakref__")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.array(data, dtype=np.float64) if not isinstance(data, np.ndarray) \
            else data.astype(np.float64, copy=False)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self._parents: tuple = ()
        self._backward: Optional[Callable] = None
        self.op: Optional[str] = None

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def __repr__(self) -> str:
        tag = f", op={self.op}" if self.op else ""
        return f"Tensor(shape={self.shape}{tag}, requires_grad={self.requires_grad})"

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.size == 1 else _not_scalar(self)

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    # operator sugar; tensor-tensor forms keep the exact-shape rule
    def __add__(self, other):
        return add(self, other) if isinstance(other, Tensor) else add_scalar(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other) if isinstance(other, Tensor) else add_scalar(self, -other)

    def __rsub__(self, other):
        return add_scalar(mul_scalar(self, -1.0), other)

    def __mul__(self, other):
        return mul(self, other) if isinstance(other, Tensor) else mul_scalar(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other) if isinstance(other, Tensor) else mul_scalar(self, 1.0 / other)

    def __neg__(self):
        return mul_scalar(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return slice_(self, key)

    @property
    def T(self) -> "Tensor":
        return transpose(self)


class Parameter(Tensor):
    """A learnable leaf tensor with a stable integer handle."""

    __slots__ = ("handle",)

    def __init__(self, data):
        super().__init__(data, requires_grad=True)
        self.handle = next(_HANDLES)


def _not_scalar(t: Tensor):
    raise ContractError(f"item() needs a single-element tensor, got shape {t.shape}")


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data: np.ndarray, op: str, parents: Sequence[Tensor], backward_fn: Callable) -> Tensor:
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
        out.op = op
    return out


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op}: shapes {a.shape} and {b.shape} differ")


def backward(root: Tensor) -> None:
    """Populate ``grad`` on every tensor reachable from scalar ``root``."""
    if root.size != 1:
        raise ContractError(f"backward needs a scalar root, got shape {root.shape}")
    order: list[Tensor] = []
    seen: set[int] = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in seen:
                stack.append((parent, False))

    grads: dict[int, np.ndarray] = {id(root): np.ones_like(root.data)}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        node.grad = g if node.grad is None else node.grad + g
        if node._backward is None:
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            grads[key] = pg if key not in grads else grads[key] + pg


# ----------------------------------------------------------------- arithmetic

def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)
    return _make(a.data + b.data, "add", (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("sub", a, b)
    return _make(a.data - b.data, "sub", (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("mul", a, b)
    ad, bd = a.data, b.data
    return _make(ad * bd, "mul", (a, b), lambda g: (g * bd, g * ad))


def div(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("div", a, b)
    ad, bd = a.data, b.data
    return _make(ad / bd, "div", (a, b), lambda g: (g / bd, -g * ad / (bd * bd)))


def add_scalar(a: Tensor, c: float) -> Tensor:
    return _make(a.data + float(c), "add_scalar", (a,), lambda g: (g,))


def mul_scalar(a: Tensor, c: float) -> Tensor:
    c = float(c)
    return _make(a.data * c, "mul_scalar", (a,), lambda g: (g * c,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """2-D product, or batched 3-D product with equal leading batch size."""
    ok = (a.ndim == b.ndim == 2 and a.shape[1] == b.shape[0]) or (
        a.ndim == b.ndim == 3 and a.shape[0] == b.shape[0] and a.shape[2] == b.shape[1])
    if not ok:
        raise DimensionError(f"matmul: shapes {a.shape} and {b.shape} do not conform")
    ad, bd = a.data, b.data

    def bw(g):
        ga = g @ np.swapaxes(bd, -1, -2) if a.requires_grad else None
        gb = np.swapaxes(ad, -1, -2) @ g if b.requires_grad else None
        return ga, gb

    return _make(ad @ bd, "matmul", (a, b), bw)


def broadcast_add_bias(x: Tensor, bias: Tensor) -> Tensor:
    """Add a length-F vector to every row of an (..., F) tensor."""
    if bias.ndim != 1 or x.ndim < 1 or x.shape[-1] != bias.shape[0]:
        raise DimensionError(f"broadcast_add_bias: shapes {x.shape} and {bias.shape} do not conform")
    lead = tuple(range(x.ndim - 1))
    return _make(x.data + bias.data, "broadcast_add_bias", (x, bias),
                 lambda g: (g, g.sum(axis=lead) if lead else g))


def expand(x: Tensor, shape: Sequence[int]) -> Tensor:
    """Explicitly broadcast ``x`` to ``shape`` (numpy rules, size-1 axes only)."""
    shape = tuple(shape)
    try:
        out = np.broadcast_to(x.data, shape)
    except ValueError:
        raise DimensionError(f"expand: cannot broadcast {x.shape} to {shape}") from None
    src_shape = x.shape
    extra = len(shape) - len(src_shape)

    def bw(g):
        g = g.sum(axis=tuple(range(extra))) if extra else g
        axes = tuple(i for i, n in enumerate(src_shape) if n == 1 and g.shape[i] != 1)
        return (g.sum(axis=axes, keepdims=True) if axes else g,)

    return _make(np.ascontiguousarray(out), "expand", (x,), bw)


# ------------------------------------------------------------------ structure

def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    src = x.shape
    try:
        out = x.data.reshape(shape)
    except ValueError:
        raise DimensionError(f"reshape: cannot reshape {src} to {tuple(shape)}") from None
    return _make(out, "reshape", (x,), lambda g: (g.reshape(src),))


def transpose(x: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    if axes is None:
        axes = tuple(reversed(range(x.ndim)))
    axes = tuple(axes)
    if sorted(axes) != list(range(x.ndim)):
        raise DimensionError(f"transpose: axes {axes} invalid for shape {x.shape}")
    inverse = tuple(np.argsort(axes))
    return _make(np.ascontiguousarray(x.data.transpose(axes)), "transpose", (x,),
                 lambda g: (g.transpose(inverse),))


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise DimensionError("concat: no inputs")
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise DimensionError(f"concat: shapes {[t.shape for t in tensors]} along axis {axis}") from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def bw(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _make(out, "concat", tensors, bw)


def slice_(x: Tensor, key) -> Tensor:
    """Basic (view) indexing: ints and slices."""
    parts = key if isinstance(key, tuple) else (key,)
    if any(not isinstance(k, (int, slice, type(Ellipsis))) for k in parts):
        raise DimensionError("slice: only ints and slices are supported; use index_select")
    out = x.data[key]
    src = x.shape

    def bw(g):
        full = np.zeros(src)
        full[key] = g
        return (full,)

    return _make(out.copy(), "slice", (x,), bw)


def index_select(x: Tensor, index, axis: int = 0) -> Tensor:
    """Gather entries along ``axis``; repeated indices accumulate gradient."""
    index = np.asarray(index, dtype=np.int64)
    if index.ndim != 1:
        raise DimensionError(f"index_select: index must be 1-D, got shape {index.shape}")
    n = x.shape[axis]
    if index.size and (index.min() < -n or index.max() >= n):
        raise DimensionError(f"index_select: index out of range for axis of size {n}")
    src = x.shape

    def bw(g):
        full = np.zeros(src)
        moved = np.moveaxis(full, axis, 0)
        np.add.at(moved, index, np.moveaxis(g, axis, 0))
        return (full,)

    return _make(np.take(x.data, index, axis=axis), "index_select", (x,), bw)


def scatter_add(src: Tensor, index, num_rows: int) -> Tensor:
    """Sum rows of ``src`` into a zero tensor of ``num_rows`` rows at ``index``."""
    index = np.asarray(index, dtype=np.int64)
    if index.ndim != 1 or src.ndim < 1 or index.shape[0] != src.shape[0]:
        raise DimensionError(f"scatter_add: index shape {index.shape} vs source {src.shape}")
    if index.size and (index.min() < 0 or index.max() >= num_rows):
        raise DimensionError(f"scatter_add: index out of range for {num_rows} rows")
    out = np.zeros((num_rows,) + src.shape[1:])
    np.add.at(out, index, src.data)
    return _make(out, "scatter_add", (src,), lambda g: (g[index],))


# ----------------------------------------------------------------- reductions

def _norm_axis(axis, ndim):
    if axis is None:
        return tuple(range(ndim))
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    return tuple(a % ndim for a in axes)


def sum_(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _norm_axis(axis, x.ndim)
    src = x.shape
    out = x.data.sum(axis=axes, keepdims=keepdims)

    def bw(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, src).copy(),)

    return _make(np.asarray(out), "sum", (x,), bw)


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _norm_axis(axis, x.ndim)
    count = int(np.prod([x.shape[a] for a in axes])) if axes else 1
    if count == 0:
        raise DomainError(f"mean: empty reduction over axes {axes} of shape {x.shape}")
    return mul_scalar(sum_(x, axis=axis, keepdims=keepdims), 1.0 / count)


# ---------------------------------------------------------------- elementwise

def _sigmoid(v: np.ndarray) -> np.ndarray:
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


def sigmoid(x: Tensor) -> Tensor:
    s = _sigmoid(x.data)
    return _make(s, "sigmoid", (x,), lambda g: (g * s * (1.0 - s),))


def tanh(x: Tensor) -> Tensor:
    t = np.tanh(x.data)
    return _make(t, "tanh", (x,), lambda g: (g * (1.0 - t * t),))


def relu(x: Tensor) -> Tensor:
    gate = (x.data > 0).astype(np.float64)
    return _make(x.data * gate, "relu", (x,), lambda g: (g * gate,))


def exp(x: Tensor) -> Tensor:
    e = np.exp(x.data)
    return _make(e, "exp", (x,), lambda g: (g * e,))


def log(x: Tensor) -> Tensor:
    if np.any(x.data < 0):
        raise DomainError("log: negative input")
    xd = x.data
    with np.errstate(divide="ignore"):
        out = np.log(xd)
    return _make(out, "log", (x,), lambda g: (g / xd,))


def sqrt(x: Tensor) -> Tensor:
    if np.any(x.data < 0):
        raise DomainError("sqrt: negative input")
    r = np.sqrt(x.data)
    return _make(r, "sqrt", (x,), lambda g: (g * 0.5 / r,))


def cos(x: Tensor) -> Tensor:
    xd = x.data
    return _make(np.cos(xd), "cos", (x,), lambda g: (-g * np.sin(xd),))


def softplus(x: Tensor) -> Tensor:
    """log(1 + e^x), evaluated without overflow."""
    xd = x.data
    return _make(np.logaddexp(0.0, xd), "softplus", (x,), lambda g: (g * _sigmoid(xd),))


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    if x.ndim == 0 or x.shape[axis] == 0:
        raise DomainError(f"softmax: empty axis {axis} for shape {x.shape}")
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)

    def bw(g):
        return (s * (g - (g * s).sum(axis=axis, keepdims=True)),)

    return _make(s, "softmax", (x,), bw)


def dropout(x: Tensor, p: float, rng: np.random.Generator, training: bool = True) -> Tensor:
    """Inverted dropout; the identity outside training or when p == 0."""
    if not training or p <= 0.0:
        return x
    if p >= 1.0:
        raise DomainError(f"dropout: rate {p} must be < 1")
    mask = (rng.random(x.shape) >= p) / (1.0 - p)
    return _make(x.data * mask, "dropout", (x,), lambda g: (g * mask,))


def square(x: Tensor) -> Tensor:
    return mul(x, x)


def zeros_like(x: Tensor) -> Tensor:
    return Tensor(np.zeros(x.shape))


def stack_rows(tensors: Iterable[Tensor]) -> Tensor:
    """Stack equally shaped tensors along a new leading axis."""
    tensors = list(tensors)
    return concat([reshape(t, (1,) + t.shape) for t in tensors], axis=0)


PRIMITIVES: dict[str, Callable] = {
    "matmul": matmul, "add": add, "sub": sub, "mul": mul, "div": div, "concat": concat,
    "slice": slice_, "index_select": index_select, "scatter_add": scatter_add, "sum": sum_,
    "mean": mean, "sigmoid": sigmoid, "tanh": tanh, "relu": relu, "exp": exp, "log": log,
    "softmax": softmax, "broadcast_add_bias": broadcast_add_bias, "transpose": transpose,
    "sqrt": sqrt, "cos": cos, "softplus": softplus, "expand": expand, "reshape": reshape,
    "dropout": dropout, "add_scalar": add_scalar, "mul_scalar": mul_scalar,
}


def forward_primitive(op_name: str, inputs: Sequence[Tensor], **attrs) -> Tensor:
    """Apply a primitive by name; ``concat`` takes its inputs as one list."""
    try:
        fn = PRIMITIVES[op_name]
    except KeyError:
        raise ContractError(f"unknown primitive {op_name!r}") from None
    if op_name == "concat":
        return fn(list(inputs), **attrs)
    return fn(*inputs, **attrs)
