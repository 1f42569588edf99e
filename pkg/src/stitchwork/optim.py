"""Bias-corrected Adam over named parameter sets."""

from __future__ import annotations

import numpy as np

from .tensor import ShapeError, Tensor

GAN_LR = 2e-4
GAN_BETA1 = 0.5
PIXEL_LR = 2e-2


class AdamState:
    """Per-parameter first/second moment buffers plus the shared step count."""

    def __init__(self, params, lr=GAN_LR, beta1=GAN_BETA1, beta2=0.999, eps=1e-8):
        for val in (lr, beta1, beta2, eps):
            if val <= 0:
                raise ValueError("Adam hyperparameters must be positive")
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.step_count = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}


def adam_step(params, grads, state):
    """One deterministic Adam update; params are modified in place.

    ``grads`` maps the same names to gradient arrays (a param's own ``.grad``
    when omitted from the mapping).
    """
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for name, param in params.items():
        g = grads[name] if name in grads else param.grad
        if g is None:
            continue
        g = np.asarray(g)
        if g.shape != param.shape or state.m[name].shape != param.shape:
            raise ShapeError(
                f"gradient/moment shape mismatch for {name!r}: "
                f"param {param.shape}, grad {g.shape}"
            )
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        update = (state.lr / bc1) * m / (np.sqrt(v / bc2) + state.eps)
        param.data -= update.astype(param.dtype, copy=False)
    return params, state


def zero_grads(params):
    for p in params.values():
        p.zero_grad()


def collect_grads(params):
    return {k: p.grad for k, p in params.items() if p.grad is not None}
