"""Reverse-mode automatic differentiation over numpy arrays.

Every operation builds a node holding its inputs and a closure that routes
the output gradient back to them; `backward` runs the closures in reverse
topological order.  Training runs in 32-bit floats; gradient checking flips
the default to 64-bit via `float64_mode`.
"""

from __future__ import annotations

import contextlib

import numpy as np

_DEFAULT_DTYPE = np.float32


def default_dtype():
    return _DEFAULT_DTYPE


@contextlib.contextmanager
def float64_mode():
    """Run the enclosed block with 64-bit default precision."""
    global _DEFAULT_DTYPE
    previous = _DEFAULT_DTYPE
    _DEFAULT_DTYPE = np.float64
    try:
        yield
    finally:
        _DEFAULT_DTYPE = previous


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast gradient back down to the original operand shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """A value on the tape.  Leaf tensors may receive gradients."""

    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, value, requires_grad: bool = False):
        self.value = np.asarray(value, dtype=_DEFAULT_DTYPE)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None

    # construction helpers ------------------------------------------------

    @classmethod
    def _node(cls, value, parents, backward):
        out = cls.__new__(cls)
        out.value = value
        out.grad = None
        out.requires_grad = any(p.requires_grad for p in parents)
        out._parents = tuple(parents) if out.requires_grad else ()
        out._backward = backward if out.requires_grad else None
        return out

    def _accumulate(self, grad):
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        self.grad += grad

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    def item(self) -> float:
        return float(self.value)

    def detach(self) -> "Tensor":
        return Tensor(self.value.copy())

    def __repr__(self):
        return f"Tensor(shape={self.value.shape}, grad={self.requires_grad})"

    # arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = as_tensor(other, like=self)
        out_value = self.value + other.value

        def backward(grad, a=self, b=other):
            if a.requires_grad:
                a._accumulate(_unbroadcast(grad, a.value.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(grad, b.value.shape))

        return Tensor._node(out_value, (self, other), backward)

    __radd__ = __add__

    def __neg__(self):
        def backward(grad, a=self):
            if a.requires_grad:
                a._accumulate(-grad)

        return Tensor._node(-self.value, (self,), backward)

    def __sub__(self, other):
        return self + (-as_tensor(other, like=self))

    def __rsub__(self, other):
        return as_tensor(other, like=self) + (-self)

    def __mul__(self, other):
        other = as_tensor(other, like=self)
        out_value = self.value * other.value

        def backward(grad, a=self, b=other):
            if a.requires_grad:
                a._accumulate(_unbroadcast(grad * b.value, a.value.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(grad * a.value, b.value.shape))

        return Tensor._node(out_value, (self, other), backward)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_tensor(other, like=self)
        out_value = self.value / other.value

        def backward(grad, a=self, b=other):
            if a.requires_grad:
                a._accumulate(_unbroadcast(grad / b.value, a.value.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(-grad * a.value / (b.value ** 2),
                                           b.value.shape))

        return Tensor._node(out_value, (self, other), backward)

    def __pow__(self, exponent: float):
        out_value = self.value ** exponent

        def backward(grad, a=self, e=exponent):
            if a.requires_grad:
                a._accumulate(grad * e * a.value ** (e - 1))

        return Tensor._node(out_value, (self,), backward)

    def __matmul__(self, other):
        other = as_tensor(other, like=self)
        a_value, b_value = self.value, other.value
        out_value = a_value @ b_value

        def backward(grad, a=self, b=other):
            if a.requires_grad:
                if a.value.ndim == 1:
                    a._accumulate(grad @ b.value.T if b.value.ndim == 2
                                  else grad * b.value)
                else:
                    a._accumulate(np.outer(grad, b.value) if b.value.ndim == 1
                                  else grad @ b.value.T)
            if b.requires_grad:
                if b.value.ndim == 1:
                    b._accumulate(a.value.T @ grad if a.value.ndim == 2
                                  else grad * a.value)
                else:
                    b._accumulate(np.outer(a.value, grad) if a.value.ndim == 1
                                  else a.value.T @ grad)

        return Tensor._node(out_value, (self, other), backward)

    def __getitem__(self, index):
        out_value = self.value[index]

        def backward(grad, a=self, idx=index):
            if a.requires_grad:
                full = np.zeros_like(a.value)
                np.add.at(full, idx, grad)
                a._accumulate(full)

        return Tensor._node(out_value, (self,), backward)

    # reductions ----------------------------------------------------------

    def sum(self, axis=None):
        out_value = self.value.sum(axis=axis)

        def backward(grad, a=self, ax=axis):
            if a.requires_grad:
                if ax is None:
                    a._accumulate(np.full_like(a.value, 1.0) * grad)
                else:
                    a._accumulate(np.broadcast_to(
                        np.expand_dims(grad, ax), a.value.shape).copy())

        return Tensor._node(out_value, (self,), backward)

    def mean(self, axis=None):
        count = self.value.size if axis is None else self.value.shape[axis]
        return self.sum(axis=axis) * (1.0 / count)

    # graph traversal ------------------------------------------------------

    def backward(self):
        """Accumulate gradients of this scalar into every leaf's .grad."""
        if self.value.size != 1:
            raise ValueError("backward needs a scalar loss")
        order = []
        seen = {id(self)}
        stack = [(self, iter(self._parents))]
        while stack:
            node, parents = stack[-1]
            advanced = False
            for parent in parents:
                if id(parent) not in seen and parent.requires_grad:
                    seen.add(id(parent))
                    stack.append((parent, iter(parent._parents)))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()
        self.grad = np.ones_like(self.value)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)


def as_tensor(value, like: Tensor | None = None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    out = Tensor.__new__(Tensor)
    dtype = like.value.dtype if like is not None else _DEFAULT_DTYPE
    out.value = np.asarray(value, dtype=dtype)
    out.grad = None
    out.requires_grad = False
    out._parents = ()
    out._backward = None
    return out


# elementwise nonlinearities ----------------------------------------------


def tanh(x: Tensor) -> Tensor:
    out_value = np.tanh(x.value)

    def backward(grad, a=x, v=out_value):
        if a.requires_grad:
            a._accumulate(grad * (1.0 - v * v))

    return Tensor._node(out_value, (x,), backward)


def sigmoid(x: Tensor) -> Tensor:
    out_value = 1.0 / (1.0 + np.exp(-x.value))

    def backward(grad, a=x, v=out_value):
        if a.requires_grad:
            a._accumulate(grad * v * (1.0 - v))

    return Tensor._node(out_value, (x,), backward)


def relu(x: Tensor) -> Tensor:
    out_value = np.maximum(x.value, 0.0)

    def backward(grad, a=x):
        if a.requires_grad:
            a._accumulate(grad * (a.value > 0))

    return Tensor._node(out_value, (x,), backward)


def exp(x: Tensor) -> Tensor:
    out_value = np.exp(x.value)

    def backward(grad, a=x, v=out_value):
        if a.requires_grad:
            a._accumulate(grad * v)

    return Tensor._node(out_value, (x,), backward)


def log(x: Tensor) -> Tensor:
    out_value = np.log(x.value)

    def backward(grad, a=x):
        if a.requires_grad:
            a._accumulate(grad / a.value)

    return Tensor._node(out_value, (x,), backward)


# shape manipulation ------------------------------------------------------


def concat(tensors) -> Tensor:
    """Join 1-D tensors end to end."""
    tensors = list(tensors)
    out_value = np.concatenate([t.value for t in tensors])
    sizes = [t.value.size for t in tensors]

    def backward(grad, parts=tensors, sz=sizes):
        offset = 0
        for t, size in zip(parts, sz):
            if t.requires_grad:
                t._accumulate(grad[offset:offset + size])
            offset += size

    return Tensor._node(out_value, tensors, backward)


def stack(tensors) -> Tensor:
    """Stack equal-shape tensors along a new leading axis."""
    tensors = list(tensors)
    out_value = np.stack([t.value for t in tensors])

    def backward(grad, parts=tensors):
        for i, t in enumerate(parts):
            if t.requires_grad:
                t._accumulate(grad[i])

    return Tensor._node(out_value, tensors, backward)


# softmax family ----------------------------------------------------------


def log_softmax(x: Tensor) -> Tensor:
    """Log-softmax over the last axis of a 1-D tensor."""
    shifted = x.value - x.value.max()
    log_z = np.log(np.exp(shifted).sum())
    out_value = shifted - log_z
    soft = np.exp(out_value)

    def backward(grad, a=x, s=soft):
        if a.requires_grad:
            a._accumulate(grad - s * grad.sum())

    return Tensor._node(out_value, (x,), backward)


def softmax(x: Tensor) -> Tensor:
    return exp(log_softmax(x))


def bce_with_logits(logit: Tensor, target: float) -> Tensor:
    """Numerically stable binary cross entropy on a scalar logit."""
    z = logit.value
    out_value = np.maximum(z, 0.0) - z * target + np.log1p(np.exp(-np.abs(z)))

    def backward(grad, a=logit, t=target):
        if a.requires_grad:
            p = 1.0 / (1.0 + np.exp(-a.value))
            a._accumulate(grad * (p - t))

    return Tensor._node(out_value, (logit,), backward)


def zeros(shape, requires_grad: bool = False) -> Tensor:
    return Tensor(np.zeros(shape, dtype=_DEFAULT_DTYPE), requires_grad=requires_grad)
