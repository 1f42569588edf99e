"""Adversarial, cycle, identity, and embedding losses plus their combination.

Sign conventions: discriminator objectives are maximized (mean log real +
mean log (1-fake)); everything the generators see is minimized.  Cycle,
identity, and embedding penalties are mean absolute differences.
"""

from __future__ import annotations

import numpy as np

from ..tensor import ShapeError, Tensor, absolute, as_tensor, concatenate, log, mean


def _validate_scores(scores, name):
    data = scores.data
    if np.any(data <= 0.0) or np.any(data >= 1.0):
        raise ValueError(f"{name} scores must lie strictly inside (0, 1)")


def adversarial_loss(real_scores, fake_scores, non_saturating=False):
    """Log-form GAN objectives from probability maps.

    Returns ``(d_objective, g_objective)``: the discriminator maximizes
    ``mean log(real) + mean log(1 - fake)``; the generator minimizes
    ``mean log(1 - fake)`` (or ``-mean log(fake)`` in the non-saturating
    variant).
    """
    real_scores = as_tensor(real_scores)
    fake_scores = as_tensor(fake_scores)
    _validate_scores(real_scores, "real")
    _validate_scores(fake_scores, "fake")
    d_objective = mean(log(real_scores)) + mean(log(1.0 - fake_scores))
    if non_saturating:
        g_objective = -mean(log(fake_scores))
    else:
        g_objective = mean(log(1.0 - fake_scores))
    return d_objective, g_objective


def lsgan_adversarial_loss(real_scores, fake_scores):
    """Least-squares variant (stability comparisons): same return convention."""
    real_scores = as_tensor(real_scores)
    fake_scores = as_tensor(fake_scores)
    d_objective = -(mean((real_scores - 1.0) ** 2) + mean(fake_scores**2))
    g_objective = mean((fake_scores - 1.0) ** 2)
    return d_objective, g_objective


def cycle_loss(original, reconstructed):
    """Mean absolute reconstruction error over batch and pixels."""
    original = as_tensor(original)
    reconstructed = as_tensor(reconstructed)
    if original.shape != reconstructed.shape:
        raise ShapeError(
            f"cycle shapes differ: {original.shape} vs {reconstructed.shape}"
        )
    return mean(absolute(reconstructed - original))


def with_zero_embedding(images, k):
    """Append k exactly-zero embedding planes to a [n,c,h,w] batch."""
    images = as_tensor(images)
    n, _c, h, w = images.shape
    zeros = Tensor(np.zeros((n, k, h, w), dtype=images.dtype))
    return concatenate([images, zeros], axis=1)


def identity_loss(gen_x2y, gen_y2x, x_batch, y_batch):
    """Mean L1 penalty for altering images already in the generator's target
    domain: the Y->X generator fed x should return x, and vice versa."""
    x_batch = as_tensor(x_batch)
    y_batch = as_tensor(y_batch)
    c = gen_x2y.config.image_channels
    k = gen_x2y.config.embedding_channels
    idt_x = gen_y2x.forward(with_zero_embedding(x_batch, k))[:, :c]
    idt_y = gen_x2y.forward(with_zero_embedding(y_batch, k))[:, :c]
    return mean(absolute(idt_x - x_batch)) + mean(absolute(idt_y - y_batch))


def embedding_loss(fake_y_embedding, fake_x_embedding):
    """L1 regularizer on the embedding planes each generator emits:
    per-generator mean absolute value, summed over the two generators."""
    return mean(absolute(as_tensor(fake_y_embedding))) + mean(
        absolute(as_tensor(fake_x_embedding))
    )


def total_objective(
    g_adv1,
    g_adv2,
    d_adv1,
    d_adv2,
    cyc1,
    cyc2,
    idt,
    emb,
    lambda_idt,
    lambda_emb,
    lambda_cyc=1.0,
):
    """Combine components: generators minimize
    sum_j [g_adv_j + lambda_cyc * cyc_j] + lambda_idt * idt + lambda_emb * emb;
    discriminators maximize sum_j d_adv_j."""
    for name, lam in (("lambda_idt", lambda_idt), ("lambda_emb", lambda_emb), ("lambda_cyc", lambda_cyc)):
        if lam < 0:
            raise ValueError(f"{name} must be non-negative, got {lam}")
    g_total = g_adv1 + g_adv2 + (cyc1 + cyc2) * lambda_cyc + idt * lambda_idt + emb * lambda_emb
    d_total = d_adv1 + d_adv2
    return g_total, d_total
