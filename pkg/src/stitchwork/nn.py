"""Layer operations on the autodiff tensor: convolutions, normalization,
activations.  All ops accept [c,h,w] single images or [n,c,h,w] batches and
participate in the differentiation graph.
"""

from __future__ import annotations

import numpy as np

from .tensor import ShapeError, Tensor, _accumulate, _make, as_tensor, mean, reshape


def _lift(x):
    x = as_tensor(x)
    if x.ndim == 3:
        return reshape(x, (1,) + x.shape), True
    if x.ndim == 4:
        return x, False
    raise ShapeError(f"expected [c,h,w] or [n,c,h,w], got {x.shape}")


def _conv_windows(arr, kh, kw, stride):
    # View of every kernel-sized window, laid out [n, c, kh, kw, oh, ow].
    n, c, hh, ww = arr.shape
    oh = (hh - kh) // stride + 1
    ow = (ww - kw) // stride + 1
    sn, sc, sh, sw = arr.strides
    shape = (n, c, kh, kw, oh, ow)
    strides = (sn, sc, sh, sw, sh * stride, sw * stride)
    return np.lib.stride_tricks.as_strided(arr, shape, strides, writeable=False), oh, ow


def _pad_spatial(arr, p):
    if p == 0:
        return arr
    return np.pad(arr, ((0, 0), (0, 0), (p, p), (p, p)))


def conv2d(x, kernel, stride=1, padding=0):
    """Cross-correlation of [c_in,h,w] (or batched) input with a
    [c_out,c_in,kh,kw] kernel; output h' = floor((h+2p-kh)/s)+1."""
    x, squeeze = _lift(x)
    kernel = as_tensor(kernel)
    if kernel.ndim != 4:
        raise ShapeError(f"kernel must be [c_out,c_in,kh,kw], got {kernel.shape}")
    co, ci, kh, kw = kernel.shape
    n, c, h, w = x.shape
    if ci != c:
        raise ShapeError(f"kernel expects {ci} input channels, input has {c}")
    stride, padding = int(stride), int(padding)
    if stride < 1:
        raise ShapeError("stride must be >= 1")
    if kh > h + 2 * padding or kw > w + 2 * padding:
        raise ShapeError(
            f"kernel {kh}x{kw} larger than padded input {h + 2 * padding}x{w + 2 * padding}"
        )

    xp = _pad_spatial(x.data, padding)
    win, oh, ow = _conv_windows(xp, kh, kw, stride)
    out_data = np.tensordot(kernel.data, win, axes=([1, 2, 3], [1, 2, 3]))
    out_data = np.ascontiguousarray(out_data.transpose(1, 0, 2, 3))

    def backward(g, grads):
        gk = np.tensordot(g, win, axes=([0, 2, 3], [0, 4, 5]))
        _accumulate(grads, kernel, gk.astype(kernel.dtype, copy=False))
        # Input gradient: route each output grad back through its window.
        cols = np.tensordot(kernel.data, g, axes=([0], [1]))  # [ci,kh,kw,n,oh,ow]
        buf = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                buf[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += (
                    cols[:, i, j].transpose(1, 0, 2, 3)
                )
        if padding:
            buf = buf[:, :, padding : padding + h, padding : padding + w]
        _accumulate(grads, x, buf)

    out = _make(out_data, (x, kernel), backward)
    return reshape(out, out.shape[1:]) if squeeze else out


def conv2d_transpose(x, kernel, stride=1, padding=0):
    """Adjoint of conv2d: scatter-accumulate upsampling with the same
    [c_out,c_in,kh,kw] kernel; input carries c_out channels, output c_in,
    h' = (h-1)*s + kh - 2p."""
    x, squeeze = _lift(x)
    kernel = as_tensor(kernel)
    if kernel.ndim != 4:
        raise ShapeError(f"kernel must be [c_out,c_in,kh,kw], got {kernel.shape}")
    co, ci, kh, kw = kernel.shape
    n, c, h, w = x.shape
    if co != c:
        raise ShapeError(f"transpose kernel expects {co} input channels, input has {c}")
    stride, padding = int(stride), int(padding)
    hf = (h - 1) * stride + kh
    wf = (w - 1) * stride + kw
    oh, ow = hf - 2 * padding, wf - 2 * padding
    if oh < 1 or ow < 1:
        raise ShapeError(f"transpose output {oh}x{ow} is empty for input {h}x{w}")

    cols = np.tensordot(kernel.data, x.data, axes=([0], [1]))  # [ci,kh,kw,n,h,w]
    buf = np.zeros((n, ci, hf, wf), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            buf[:, :, i : i + stride * h : stride, j : j + stride * w : stride] += (
                cols[:, i, j].transpose(1, 0, 2, 3)
            )
    out_data = buf[:, :, padding : padding + oh, padding : padding + ow]

    def backward(g, grads):
        gp = _pad_spatial(g, padding)
        win, gh, gw = _conv_windows(gp, kh, kw, stride)
        gx = np.tensordot(kernel.data, win, axes=([1, 2, 3], [1, 2, 3]))
        _accumulate(grads, x, np.ascontiguousarray(gx.transpose(1, 0, 2, 3)))
        gk = np.tensordot(x.data, win, axes=([0, 2, 3], [0, 4, 5]))
        _accumulate(grads, kernel, gk.astype(kernel.dtype, copy=False))

    out = _make(np.ascontiguousarray(out_data), (x, kernel), backward)
    return reshape(out, out.shape[1:]) if squeeze else out


def instance_norm(x, eps=1e-5):
    """Per-channel (and per-sample) standardization over the spatial axes."""
    x = as_tensor(x)
    if x.ndim == 3:
        axes = (1, 2)
    elif x.ndim == 4:
        axes = (2, 3)
    else:
        raise ShapeError(f"instance_norm expects [c,h,w] or [n,c,h,w], got {x.shape}")
    m = mean(x, axis=axes, keepdims=True)
    centered = x - m
    var = mean(centered * centered, axis=axes, keepdims=True)
    return centered * ((var + eps) ** -0.5)


def avg_pool2(x):
    """2x2 average pooling with stride 2; odd trailing rows/cols are dropped."""
    x = as_tensor(x)
    h, w = x.shape[-2], x.shape[-1]
    h2, w2 = h // 2, w // 2
    if h2 < 1 or w2 < 1:
        raise ShapeError(f"spatial dims too small to pool: {x.shape}")
    x = x[..., : 2 * h2, : 2 * w2]
    lead = x.shape[:-2]
    x = reshape(x, lead + (h2, 2, w2, 2))
    return mean(x, axis=(-3, -1))


def sigmoid(x):
    """Elementwise 1/(1+exp(-z)), overflow-safe via a branch on sign."""
    x = as_tensor(x)
    z = x.data
    out_data = np.empty_like(z)
    pos = z >= 0
    out_data[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out_data[~pos] = ez / (1.0 + ez)

    def backward(g, grads):
        _accumulate(grads, x, g * out_data * (1.0 - out_data))

    return _make(out_data, (x,), backward)


def tanh_act(x):
    """Elementwise (e^u - e^-u)/(e^u + e^-u), overflow-safe via a branch on sign."""
    x = as_tensor(x)
    u = x.data
    out_data = np.empty_like(u)
    pos = u >= 0
    en = np.exp(-2.0 * u[pos])
    out_data[pos] = (1.0 - en) / (1.0 + en)
    ep = np.exp(2.0 * u[~pos])
    out_data[~pos] = (ep - 1.0) / (ep + 1.0)

    def backward(g, grads):
        _accumulate(grads, x, g * (1.0 - out_data * out_data))

    return _make(out_data, (x,), backward)
