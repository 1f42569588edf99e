"""Reverse-mode autodiff over numpy arrays.

A Tensor wraps an ndarray and records the op that produced it; calling
``backward()`` on a scalar walks the graph in reverse topological order and
accumulates gradients into the leaves.  Float64 is the default dtype (used by
tests and gradient checks); training code passes float32 throughout.
"""

from __future__ import annotations

import contextlib

import numpy as np

_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    """Suppress graph recording inside the block (inference-only passes)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class ShapeError(ValueError):
    """Operands have incompatible shapes for the requested op."""


class GraphError(RuntimeError):
    """Misuse of the computation graph (non-scalar backward, detached input)."""


def _as_array(data, dtype=None):
    arr = np.asarray(data)
    if dtype is not None:
        arr = arr.astype(dtype, copy=False)
    elif arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(np.float64)
    return arr


def _unbroadcast(grad, shape):
    # Sum a broadcast gradient back down to the original operand shape.
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, dtype=None, name=None):
        self.data = _as_array(data, dtype)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self.name = name
        self._parents = ()
        self._backward = None

    # -- introspection ----------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self):
        return float(self.data)

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype.name}{tag})"

    # -- graph plumbing ----------------------------------------------------

    def zero_grad(self):
        self.grad = None

    def detach(self):
        return Tensor(self.data, requires_grad=False)

    @property
    def is_leaf(self):
        return not self._parents

    def backward(self):
        """Accumulate exact reverse-mode gradients into every reachable leaf.

        Repeated calls without ``zero_grad`` add up, matching the usual
        gradient-accumulation semantics.
        """
        if self.size != 1:
            raise GraphError(
                f"backward requires a scalar loss, got shape {self.shape}"
            )
        topo = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))

        grads = {id(self): np.ones_like(self.data)}
        for node in reversed(topo):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.is_leaf:
                if node.requires_grad:
                    node.grad = g if node.grad is None else node.grad + g
                continue
            node._backward(g, grads)
        return self


def _make(data, parents, backward_fn):
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad or not p.is_leaf for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
    return out


def _accumulate(grads, node, g):
    key = id(node)
    if key in grads:
        grads[key] = grads[key] + g
    else:
        grads[key] = g


def as_tensor(x, dtype=None):
    if isinstance(x, Tensor):
        return x
    return Tensor(x, dtype=dtype)


# -- arithmetic -------------------------------------------------------------


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def backward(g, grads):
        _accumulate(grads, a, _unbroadcast(g, a.shape))
        _accumulate(grads, b, _unbroadcast(g, b.shape))

    return _make(a.data + b.data, (a, b), backward)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def backward(g, grads):
        _accumulate(grads, a, _unbroadcast(g * b.data, a.shape))
        _accumulate(grads, b, _unbroadcast(g * a.data, b.shape))

    return _make(a.data * b.data, (a, b), backward)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def backward(g, grads):
        _accumulate(grads, a, _unbroadcast(g, a.shape))
        _accumulate(grads, b, _unbroadcast(-g, b.shape))

    return _make(a.data - b.data, (a, b), backward)


def neg(a):
    return mul(a, -1.0)


def div(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def backward(g, grads):
        _accumulate(grads, a, _unbroadcast(g / b.data, a.shape))
        _accumulate(grads, b, _unbroadcast(-g * a.data / (b.data * b.data), b.shape))

    return _make(a.data / b.data, (a, b), backward)


def pow_(a, exponent):
    a = as_tensor(a)
    e = float(exponent)

    def backward(g, grads):
        _accumulate(grads, a, g * e * np.power(a.data, e - 1.0))

    return _make(np.power(a.data, e), (a,), backward)


def exp(a):
    a = as_tensor(a)
    out_data = np.exp(a.data)

    def backward(g, grads):
        _accumulate(grads, a, g * out_data)

    return _make(out_data, (a,), backward)


def log(a):
    a = as_tensor(a)

    def backward(g, grads):
        _accumulate(grads, a, g / a.data)

    return _make(np.log(a.data), (a,), backward)


def absolute(a):
    a = as_tensor(a)

    def backward(g, grads):
        _accumulate(grads, a, g * np.sign(a.data))

    return _make(np.abs(a.data), (a,), backward)


def relu(a):
    a = as_tensor(a)
    mask = a.data > 0

    def backward(g, grads):
        _accumulate(grads, a, g * mask)

    return _make(a.data * mask, (a,), backward)


def leaky_relu(a, slope=0.2):
    a = as_tensor(a)
    factor = np.where(a.data > 0, 1.0, slope)

    def backward(g, grads):
        _accumulate(grads, a, g * factor)

    return _make(a.data * factor, (a,), backward)


# -- reductions & shaping ----------------------------------------------------


def sum_(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out_data = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g, grads):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            axes = axis if isinstance(axis, tuple) else (axis,)
            for ax in sorted(ax % a.ndim for ax in axes):
                g = np.expand_dims(g, ax)
        _accumulate(grads, a, np.broadcast_to(g, a.shape).astype(a.dtype, copy=False))

    return _make(out_data, (a,), backward)


def mean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    if axis is None:
        count = a.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([a.shape[ax] for ax in axes]))
    return mul(sum_(a, axis=axis, keepdims=keepdims), 1.0 / count)


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul expects 2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dims differ: {a.shape} @ {b.shape}")

    def backward(g, grads):
        _accumulate(grads, a, g @ b.data.T)
        _accumulate(grads, b, a.data.T @ g)

    return _make(a.data @ b.data, (a, b), backward)


def reshape(a, shape):
    a = as_tensor(a)

    def backward(g, grads):
        _accumulate(grads, a, g.reshape(a.shape))

    return _make(a.data.reshape(shape), (a,), backward)


def transpose(a, axes=None):
    a = as_tensor(a)
    fwd_axes = axes if axes is not None else tuple(reversed(range(a.ndim)))
    inv_axes = np.argsort(fwd_axes)

    def backward(g, grads):
        _accumulate(grads, a, g.transpose(inv_axes))

    return _make(a.data.transpose(fwd_axes), (a,), backward)


def getitem(a, key):
    a = as_tensor(a)

    def backward(g, grads):
        buf = np.zeros_like(a.data)
        buf[key] += g
        _accumulate(grads, a, buf)

    return _make(a.data[key], (a,), backward)


def concatenate(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g, grads):
        for t, start, stop in zip(tensors, offsets[:-1], offsets[1:]):
            key = [slice(None)] * g.ndim
            key[axis] = slice(start, stop)
            _accumulate(grads, t, g[tuple(key)])

    return _make(np.concatenate([t.data for t in tensors], axis=axis), tensors, backward)


def pad_zero(a, padding):
    """Zero-pad the last two (spatial) axes by ``padding`` on each side."""
    a = as_tensor(a)
    p = int(padding)
    if p == 0:
        return a
    spec = [(0, 0)] * (a.ndim - 2) + [(p, p), (p, p)]

    def backward(g, grads):
        key = (Ellipsis, slice(p, g.shape[-2] - p), slice(p, g.shape[-1] - p))
        _accumulate(grads, a, g[key])

    return _make(np.pad(a.data, spec), (a,), backward)


def _fold_reflect_last(g, p, n):
    # Adjoint of reflect-padding the last axis: pad region j<p reads index p-j,
    # region j>=p+n reads 2(n-1)-(j-p); fold those contributions back.
    core = g[..., p : p + n].copy()
    core[..., 1 : p + 1] += g[..., 0:p][..., ::-1]
    core[..., n - 1 - p : n - 1] += g[..., p + n :][..., ::-1]
    return core


def pad_reflect(a, padding):
    """Reflection-pad the last two axes; border samples are not repeated."""
    a = as_tensor(a)
    p = int(padding)
    if p == 0:
        return a
    if a.shape[-1] <= p or a.shape[-2] <= p:
        raise ShapeError(f"reflection pad {p} too large for spatial {a.shape[-2:]}")
    spec = [(0, 0)] * (a.ndim - 2) + [(p, p), (p, p)]

    def backward(g, grads):
        h, w = a.shape[-2], a.shape[-1]
        folded = _fold_reflect_last(g, p, w)
        folded = np.swapaxes(_fold_reflect_last(np.swapaxes(folded, -1, -2), p, h), -1, -2)
        _accumulate(grads, a, folded)

    return _make(np.pad(a.data, spec, mode="reflect"), (a,), backward)


# Operator sugar on the class itself.
Tensor.__add__ = lambda self, other: add(self, other)
Tensor.__radd__ = lambda self, other: add(other, self)
Tensor.__sub__ = lambda self, other: sub(self, other)
Tensor.__rsub__ = lambda self, other: sub(other, self)
Tensor.__mul__ = lambda self, other: mul(self, other)
Tensor.__rmul__ = lambda self, other: mul(other, self)
Tensor.__truediv__ = lambda self, other: div(self, other)
Tensor.__rtruediv__ = lambda self, other: div(other, self)
Tensor.__neg__ = lambda self: neg(self)
Tensor.__pow__ = lambda self, e: pow_(self, e)
Tensor.__matmul__ = lambda self, other: matmul(self, other)
Tensor.__getitem__ = lambda self, key: getitem(self, key)
Tensor.sum = lambda self, axis=None, keepdims=False: sum_(self, axis, keepdims)
Tensor.mean = lambda self, axis=None, keepdims=False: mean(self, axis, keepdims)
Tensor.reshape = lambda self, *shape: reshape(
    self, shape[0] if len(shape) == 1 and isinstance(shape[0], (tuple, list)) else shape
)
Tensor.transpose = lambda self, axes=None: transpose(self, axes)
