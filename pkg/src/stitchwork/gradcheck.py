"""Central-difference verification of reverse-mode gradients."""

from __future__ import annotations

import numpy as np

from .tensor import GraphError, Tensor

DEFAULT_STEP = 1e-5
TOLERANCE = 1e-4


def grad_check(fn, input_tensor, step=DEFAULT_STEP):
    """Max relative error between analytic and central-difference gradients.

    ``fn`` must map a Tensor to a scalar Tensor deterministically.  The
    relative error at each coordinate is
    |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
    """
    base = np.asarray(input_tensor.data if isinstance(input_tensor, Tensor) else input_tensor)
    base = base.astype(np.float64)

    probe = Tensor(base.copy(), requires_grad=True)
    out = fn(probe)
    if not isinstance(out, Tensor) or out.size != 1:
        raise GraphError("grad_check requires fn to return a scalar Tensor")
    out.backward()
    if probe.grad is None:
        raise GraphError("fn output is detached from its input; no gradient flowed")
    analytic = probe.grad.reshape(-1)

    numeric = np.empty_like(analytic)
    flat = base.reshape(-1)
    for idx in range(flat.size):
        orig = flat[idx]
        flat[idx] = orig + step
        f_plus = float(fn(Tensor(base.copy())).data)
        flat[idx] = orig - step
        f_minus = float(fn(Tensor(base.copy())).data)
        flat[idx] = orig
        numeric[idx] = (f_plus - f_minus) / (2.0 * step)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))
