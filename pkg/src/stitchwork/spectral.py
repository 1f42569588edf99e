"""Spectral normalization: scale a weight by a power-iteration estimate of
its largest singular value.  One iteration per training step with a persisted
left-vector estimate; verification code bumps the count to 50.
"""

from __future__ import annotations

import warnings

import numpy as np

from .tensor import Tensor, div, matmul, reshape

DEGENERATE_SIGMA = 1e-12
VERIFY_POWER_ITERATIONS = 50


class DegenerateNormWarning(UserWarning):
    """Weight has (numerically) zero spectral norm; left unnormalized."""


class SpectralState:
    """Persisted power-iteration state for one weight matrix."""

    def __init__(self, out_features, seed=0, power_iterations=1):
        if power_iterations < 1:
            raise ValueError("power_iterations must be positive")
        rng = np.random.default_rng(seed)
        u = rng.standard_normal(out_features)
        self.u = u / np.linalg.norm(u)
        self.power_iterations = int(power_iterations)
        self.last_sigma = None


def spectral_normalize(weight, state):
    """Return weight / sigma-hat where sigma-hat estimates the largest
    singular value of the weight viewed as an (out_features x rest) matrix.

    Updates ``state.u`` in place; gradients flow through the weight only
    (u and v are treated as constants, the standard estimator).
    """
    if not isinstance(weight, Tensor):
        weight = Tensor(weight)
    rows = weight.shape[0]
    mat = weight.data.reshape(rows, -1)
    u = state.u.astype(mat.dtype, copy=False)
    v = None
    for _ in range(state.power_iterations):
        v = mat.T @ u
        v_norm = np.linalg.norm(v)
        v = v / (v_norm + DEGENERATE_SIGMA)
        u_new = mat @ v
        u_norm = np.linalg.norm(u_new)
        if u_norm < DEGENERATE_SIGMA:
            break
        u = u_new / u_norm
    state.u = u.astype(np.float64)
    sigma = float(u @ (mat @ v)) if v is not None else 0.0
    state.last_sigma = sigma
    if sigma < DEGENERATE_SIGMA:
        warnings.warn(
            "spectral norm estimate is ~0; returning weight unnormalized",
            DegenerateNormWarning,
        )
        return weight

    u_row = Tensor(u.reshape(1, -1).astype(weight.dtype))
    v_col = Tensor(v.reshape(-1, 1).astype(weight.dtype))
    sigma_node = matmul(matmul(u_row, reshape(weight, (rows, -1))), v_col)
    return div(weight, reshape(sigma_node, (1,) * weight.ndim))
