"""Dense float64 tensors with reverse-mode differentiation.

Every value in the network lives in a `Tensor`; learnable weights are
`Parameter`s. Operations build a dynamic graph of closures that
`backward()` replays in reverse topological order. Gradients accumulate
across uses of the same tensor within one graph and are cleared only by
the optimizer (or an explicit reset); a grad of ``None`` means zero.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

import numpy as np


class ShapeMismatch(ValueError):
    """Raised when operand shapes cannot be combined."""


def _as_array(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    return arr


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_array(data)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple = ()
        self._backward = None

    # -- graph plumbing ---------------------------------------------------

    @staticmethod
    def _result(data, parents, backward):
        out = Tensor(data)
        if any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = tuple(parents)
            out._backward = backward
        return out

    def _accumulate(self, g: np.ndarray):
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad = self.grad + g

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # -- elementwise arithmetic (broadcasting) ----------------------------

    def __add__(self, other):
        other = _to_tensor(other)
        _check_broadcast(self, other, "add")
        out = Tensor._result(self.data + other.data, (self, other), None)

        def backward():
            g = out.grad
            self._accumulate(_unbroadcast(g, self.data.shape))
            other._accumulate(_unbroadcast(g, other.data.shape))

        out._backward = backward if out.requires_grad else None
        return out

    __radd__ = __add__

    def __sub__(self, other):
        other = _to_tensor(other)
        _check_broadcast(self, other, "sub")
        out = Tensor._result(self.data - other.data, (self, other), None)

        def backward():
            g = out.grad
            self._accumulate(_unbroadcast(g, self.data.shape))
            other._accumulate(_unbroadcast(-g, other.data.shape))

        out._backward = backward if out.requires_grad else None
        return out

    def __rsub__(self, other):
        return _to_tensor(other) - self

    def __mul__(self, other):
        other = _to_tensor(other)
        _check_broadcast(self, other, "mul")
        out = Tensor._result(self.data * other.data, (self, other), None)

        def backward():
            g = out.grad
            self._accumulate(_unbroadcast(g * other.data, self.data.shape))
            other._accumulate(_unbroadcast(g * self.data, other.data.shape))

        out._backward = backward if out.requires_grad else None
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _to_tensor(other)
        _check_broadcast(self, other, "div")
        out = Tensor._result(self.data / other.data, (self, other), None)

        def backward():
            g = out.grad
            self._accumulate(_unbroadcast(g / other.data, self.data.shape))
            other._accumulate(
                _unbroadcast(-g * self.data / (other.data * other.data), other.data.shape)
            )

        out._backward = backward if out.requires_grad else None
        return out

    def __rtruediv__(self, other):
        return _to_tensor(other) / self

    def __neg__(self):
        out = Tensor._result(-self.data, (self,), None)

        def backward():
            self._accumulate(-out.grad)

        out._backward = backward if out.requires_grad else None
        return out

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, float)):
            raise TypeError("only scalar exponents are supported")
        out = Tensor._result(self.data ** exponent, (self,), None)

        def backward():
            self._accumulate(out.grad * exponent * self.data ** (exponent - 1))

        out._backward = backward if out.requires_grad else None
        return out

    def sqrt(self):
        return self ** 0.5

    # -- matrix ops --------------------------------------------------------

    def __matmul__(self, other):
        other = _to_tensor(other)
        if self.data.ndim != 2 or other.data.ndim != 2:
            raise ShapeMismatch(
                f"matmul expects 2-D operands, got {self.data.shape} and {other.data.shape}"
            )
        if self.data.shape[1] != other.data.shape[0]:
            raise ShapeMismatch(
                f"matmul inner dimensions differ: {self.data.shape} vs {other.data.shape}"
            )
        out = Tensor._result(self.data @ other.data, (self, other), None)

        def backward():
            g = out.grad
            self._accumulate(g @ other.data.T)
            other._accumulate(self.data.T @ g)

        out._backward = backward if out.requires_grad else None
        return out

    def transpose(self, axes: Optional[Sequence[int]] = None):
        out = Tensor._result(np.transpose(self.data, axes), (self,), None)
        if axes is None:
            inv = None
        else:
            inv = np.argsort(axes)

        def backward():
            self._accumulate(np.transpose(out.grad, inv))

        out._backward = backward if out.requires_grad else None
        return out

    @property
    def T(self):
        return self.transpose()

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old_shape = self.data.shape
        out = Tensor._result(self.data.reshape(shape), (self,), None)

        def backward():
            self._accumulate(out.grad.reshape(old_shape))

        out._backward = backward if out.requires_grad else None
        return out

    def __getitem__(self, key):
        out = Tensor._result(self.data[key], (self,), None)

        def backward():
            g = np.zeros_like(self.data)
            np.add.at(g, key, out.grad)
            self._accumulate(g)

        out._backward = backward if out.requires_grad else None
        return out

    # -- reductions ---------------------------------------------------------

    def sum(self, axis: Optional[int] = None, keepdims: bool = False):
        out = Tensor._result(self.data.sum(axis=axis, keepdims=keepdims), (self,), None)

        def backward():
            g = out.grad
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            self._accumulate(np.broadcast_to(g, self.data.shape))

        out._backward = backward if out.requires_grad else None
        return out

    def mean(self, axis: Optional[int] = None, keepdims: bool = False):
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    def max(self, axis: Optional[int] = None, keepdims: bool = False):
        out, _ = max_reduce(self, axis=axis, keepdims=keepdims)
        return out

    # -- pointwise nonlinearities -------------------------------------------

    def exp(self):
        out = Tensor._result(np.exp(self.data), (self,), None)

        def backward():
            self._accumulate(out.grad * out.data)

        out._backward = backward if out.requires_grad else None
        return out

    def log(self):
        if np.any(self.data <= 0):
            raise ValueError("log requires strictly positive inputs; clip first")
        out = Tensor._result(np.log(self.data), (self,), None)

        def backward():
            self._accumulate(out.grad / self.data)

        out._backward = backward if out.requires_grad else None
        return out

    def tanh(self):
        out = Tensor._result(np.tanh(self.data), (self,), None)

        def backward():
            self._accumulate(out.grad * (1.0 - out.data * out.data))

        out._backward = backward if out.requires_grad else None
        return out

    def sigmoid(self):
        out = Tensor._result(_sigmoid(self.data), (self,), None)

        def backward():
            self._accumulate(out.grad * out.data * (1.0 - out.data))

        out._backward = backward if out.requires_grad else None
        return out

    def relu(self):
        out = Tensor._result(np.maximum(self.data, 0.0), (self,), None)

        def backward():
            self._accumulate(out.grad * (self.data > 0.0))

        out._backward = backward if out.requires_grad else None
        return out

    def gelu(self):
        # tanh-form GELU composed from primitives, so its backward needs no
        # bespoke rule.
        c = math.sqrt(2.0 / math.pi)
        return self * 0.5 * (( (self + self ** 3 * 0.044715) * c ).tanh() + 1.0)


class Parameter(Tensor):
    """A named learnable tensor carrying Adam state."""

    __slots__ = ("name", "adam_m", "adam_v", "adam_step_count")

    def __init__(self, data, name: str = ""):
        super().__init__(data, requires_grad=True)
        self.name = name
        self.adam_m = np.zeros_like(self.data)
        self.adam_v = np.zeros_like(self.data)
        self.adam_step_count = 0

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.data.shape})"


# -- helpers ---------------------------------------------------------------


def _to_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _check_broadcast(a: Tensor, b: Tensor, op: str):
    try:
        np.broadcast_shapes(a.data.shape, b.data.shape)
    except ValueError:
        raise ShapeMismatch(
            f"{op}: shapes {a.data.shape} and {b.data.shape} are not broadcastable"
        ) from None


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a broadcast gradient back to the operand's shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


# -- free functions over tensors --------------------------------------------


def max_reduce(t: Tensor, axis: Optional[int] = None, keepdims: bool = False):
    """Max reduction returning (values, argmax indices).

    Ties break to the lowest index; the backward pass routes the incoming
    gradient only to the argmax positions.
    """
    data = t.data
    if axis is None:
        idx = int(np.argmax(data))
        out_data = data.reshape(-1)[idx]
        if keepdims:
            out_data = np.full((1,) * data.ndim, out_data)
        out = Tensor._result(out_data, (t,), None)

        def backward():
            g = np.zeros_like(data)
            g.reshape(-1)[idx] = np.asarray(out.grad).reshape(-1)[0]
            t._accumulate(g)

        out._backward = backward if out.requires_grad else None
        return out, idx

    idx = np.argmax(data, axis=axis)
    out_data = np.max(data, axis=axis, keepdims=keepdims)
    out = Tensor._result(out_data, (t,), None)

    def backward():
        g = np.zeros_like(data)
        grad = out.grad
        if keepdims:
            grad = np.squeeze(grad, axis=axis)
        np.put_along_axis(
            g, np.expand_dims(idx, axis), np.expand_dims(grad, axis), axis=axis
        )
        t._accumulate(g)

    out._backward = backward if out.requires_grad else None
    return out, idx


def softmax(t: Tensor, axis: int = -1) -> Tensor:
    """Numerically stable softmax along one axis."""
    shifted = t.data - np.max(t.data, axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)
    out = Tensor._result(y, (t,), None)

    def backward():
        g = out.grad
        dot = (g * y).sum(axis=axis, keepdims=True)
        t._accumulate(y * (g - dot))

    out._backward = backward if out.requires_grad else None
    return out


def log_softmax(t: Tensor, axis: int = -1) -> Tensor:
    shifted = t.data - np.max(t.data, axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    y = shifted - lse
    out = Tensor._result(y, (t,), None)

    def backward():
        g = out.grad
        t._accumulate(g - np.exp(y) * g.sum(axis=axis, keepdims=True))

    out._backward = backward if out.requires_grad else None
    return out


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [_to_tensor(t) for t in tensors]
    if not tensors:
        raise ValueError("concat requires at least one tensor")
    data = np.concatenate([t.data for t in tensors], axis=axis)
    out = Tensor._result(data, tuple(tensors), None)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward():
        g = out.grad
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(lo, hi)
            t._accumulate(g[tuple(sl)])

    out._backward = backward if out.requires_grad else None
    return out


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    expanded = []
    for t in tensors:
        t = _to_tensor(t)
        shape = list(t.data.shape)
        shape.insert(axis if axis >= 0 else len(shape) + 1 + axis, 1)
        expanded.append(t.reshape(shape))
    return concat(expanded, axis=axis)


def take_rows(t: Tensor, indices) -> Tensor:
    """Embedding-table lookup: gather rows of `t` along axis 0.

    The backward pass scatter-adds into the looked-up rows only, so
    untouched table rows receive no gradient.
    """
    idx = np.asarray(indices, dtype=np.int64)
    if np.any(idx < 0) or np.any(idx >= t.data.shape[0]):
        raise IndexError(
            f"row index out of range for table with {t.data.shape[0]} rows"
        )
    out = Tensor._result(t.data[idx], (t,), None)

    def backward():
        g = np.zeros_like(t.data)
        np.add.at(g, idx, out.grad)
        t._accumulate(g)

    out._backward = backward if out.requires_grad else None
    return out


def clip(t: Tensor, lo: float, hi: float) -> Tensor:
    """Clamp values to [lo, hi]; gradient passes only where unclamped."""
    data = np.clip(t.data, lo, hi)
    out = Tensor._result(data, (t,), None)
    mask = (t.data > lo) & (t.data < hi)

    def backward():
        t._accumulate(out.grad * mask)

    out._backward = backward if out.requires_grad else None
    return out


def layer_norm(t: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Layer normalization over the last axis with learnable gain and bias."""
    gain = _to_tensor(gain)
    bias = _to_tensor(bias)
    x = t.data
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv
    out = Tensor._result(xhat * gain.data + bias.data, (t, gain, bias), None)

    def backward():
        g = out.grad
        lead = tuple(range(g.ndim - 1))
        gain._accumulate((g * xhat).sum(axis=lead))
        bias._accumulate(g.sum(axis=lead))
        gx = g * gain.data
        t._accumulate(
            inv
            * (
                gx
                - gx.mean(axis=-1, keepdims=True)
                - xhat * (gx * xhat).mean(axis=-1, keepdims=True)
            )
        )

    out._backward = backward if out.requires_grad else None
    return out


def pairwise_sqdist(a: Tensor, b: Tensor) -> Tensor:
    """Squared Euclidean distances between row sets: out[i,j] = |a_i - b_j|^2."""
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[1]:
        raise ShapeMismatch(
            f"pairwise_sqdist expects (N,d) and (M,d), got {a.data.shape} and {b.data.shape}"
        )
    aa = (a.data * a.data).sum(axis=1, keepdims=True)
    bb = (b.data * b.data).sum(axis=1, keepdims=True).T
    d = aa + bb - 2.0 * (a.data @ b.data.T)
    np.maximum(d, 0.0, out=d)
    out = Tensor._result(d, (a, b), None)

    def backward():
        g = out.grad
        a._accumulate(2.0 * (g.sum(axis=1, keepdims=True) * a.data - g @ b.data))
        b._accumulate(2.0 * (g.sum(axis=0)[:, None] * b.data - g.T @ a.data))

    out._backward = backward if out.requires_grad else None
    return out


def cross_entropy(logits: Tensor, targets) -> Tensor:
    """Mean cross-entropy of integer targets against rows of logits."""
    tg = np.asarray(targets, dtype=np.int64)
    if logits.data.ndim == 1:
        logits = logits.reshape(1, -1)
    if tg.ndim == 0:
        tg = tg.reshape(1)
    n, c = logits.data.shape
    if tg.shape != (n,):
        raise ShapeMismatch(f"targets shape {tg.shape} does not match logits rows {n}")
    if np.any(tg < 0) or np.any(tg >= c):
        raise ValueError("target class out of range")
    onehot = np.zeros((n, c))
    onehot[np.arange(n), tg] = 1.0
    ls = log_softmax(logits, axis=1)
    return -(ls * Tensor(onehot)).sum() * (1.0 / n)


def balanced_binary_ce(p: Tensor, targets: np.ndarray) -> Tensor:
    """Balanced binary cross-entropy on probabilities in (0,1).

    Positive terms are weighted by the fraction of zeros in the target,
    negative terms by the fraction of ones; a degenerate all-positive or
    all-negative target falls back to weight 1 on the surviving term.
    """
    y = np.asarray(targets, dtype=np.float64)
    if y.shape != p.data.shape:
        raise ShapeMismatch(f"target shape {y.shape} does not match {p.data.shape}")
    total = y.size
    n_pos = float(y.sum())
    gamma_p = n_pos / total
    gamma_n = 1.0 - gamma_p
    w_pos = gamma_n if gamma_n > 0 else 1.0
    w_neg = gamma_p if gamma_p > 0 else 1.0
    pc = clip(p, 1e-12, 1.0 - 1e-12)
    pos = (Tensor(y) * pc.log()).sum()
    neg = (Tensor(1.0 - y) * (1.0 - pc).log()).sum()
    return -(pos * w_pos + neg * w_neg) * (1.0 / total)


# -- reverse-mode driver -----------------------------------------------------


def _toposort(root: Tensor):
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order


def backward(loss: Tensor):
    """Populate gradients of everything reachable from a scalar loss."""
    if loss.data.size != 1:
        raise ValueError(f"backward requires a scalar loss, got shape {loss.data.shape}")
    if not loss.requires_grad:
        return
    order = _toposort(loss)
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward is not None:
            node._backward()


def zero_grads(params: Iterable[Tensor]):
    for p in params:
        p.grad = None
