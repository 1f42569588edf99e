"""Style-transfer losses and the two pipelines built on them.

``run_style_transfer`` optimizes the pixels of one image against one style;
``run_split_style_transfer`` quantizes the palette, optimizes every color
region against its own stitch swatch, and recombines.  Regions never
interact until recombination, so per-region runs are order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .colorsplit import DEFAULT_MAX_COLORS, DEFAULT_TOLERANCE, quantize_palette, recombine, split
from .dataio import chw_to_hwc, hwc_to_chw
from .features import extract_features, gram
from .optim import PIXEL_LR, AdamState, adam_step
from .tensor import ShapeError, Tensor, no_grad

DEFAULT_ALPHA = 1.0
DEFAULT_BETA = 1e3


@dataclass
class StyleWeights:
    """Content weight, style weight, and per-layer style weights (sum to 1)."""

    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    layer_weights: tuple | None = None

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if self.alpha == 0 and self.beta == 0:
            raise ValueError("alpha and beta cannot both be zero")
        if self.layer_weights is not None:
            total = float(sum(self.layer_weights))
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"layer weights sum to {total}, expected 1")


@dataclass
class StyleAssignment:
    """One stitch swatch per color region plus the optimization settings."""

    styles: dict[int, np.ndarray] = field(default_factory=dict)
    iterations: int = 200
    learning_rate: float = PIXEL_LR
    seed: int = 0


def content_loss(gen_maps, content_maps):
    """Mean squared feature difference, 1/(d*p) normalized, summed over taps."""
    if len(gen_maps) != len(content_maps):
        raise ShapeError("tap counts differ between generated and content maps")
    total = None
    for gm, cm in zip(gen_maps, content_maps):
        if gm.values.shape != cm.values.shape:
            raise ShapeError(
                f"layer {gm.layer} maps disagree: {gm.values.shape} vs {cm.values.shape}"
            )
        diff = gm.values - cm.values
        term = (diff * diff).sum() * (1.0 / (gm.d * gm.p))
        total = term if total is None else total + term
    return total


def style_loss(gen_grams, style_grams, layer_weights=None):
    """Per-layer 1/(d*p)-normalized squared Gram difference, weight-combined."""
    if len(gen_grams) != len(style_grams):
        raise ShapeError("tap counts differ between generated and style Grams")
    if layer_weights is None:
        layer_weights = [1.0 / len(gen_grams)] * len(gen_grams)
    total = None
    for w, gg, sg in zip(layer_weights, gen_grams, style_grams):
        if gg.values.shape != sg.values.shape:
            raise ShapeError(
                f"layer {gg.layer} Grams disagree: {gg.values.shape} vs {sg.values.shape}"
            )
        diff = gg.values - sg.values
        term = (diff * diff).sum() * (w / (gg.d * gg.p))
        total = term if total is None else total + term
    return total


def total_loss(content, style, weights):
    """alpha * content + beta * style."""
    return content * weights.alpha + style * weights.beta


def run_style_transfer(
    content,
    style,
    network,
    weights=None,
    iterations=200,
    seed=0,
    learning_rate=PIXEL_LR,
    dtype=np.float32,
    callback=None,
):
    """Optimize the pixels of ``content`` toward the Gram statistics of
    ``style`` for ``iterations`` Adam steps; output clamped to [0,1].

    Starts from the content image, so zero iterations is the identity.
    Deterministic for fixed inputs and seed.
    """
    content = np.asarray(content, dtype=np.float64)
    style = np.asarray(style, dtype=np.float64)
    if content.shape != style.shape:
        raise ShapeError(f"content {content.shape} and style {style.shape} differ")
    if iterations == 0:
        return content.copy()
    weights = weights or StyleWeights()
    net = network.astype(dtype)
    style_taps = net.style_taps
    content_taps = net.content_taps
    all_taps = tuple(dict.fromkeys(style_taps + content_taps))

    with no_grad():
        content_targets = extract_features(hwc_to_chw(content).astype(dtype), net, content_taps)
        style_targets = [
            gram(m) for m in extract_features(hwc_to_chw(style).astype(dtype), net, style_taps)
        ]

    pixels = Tensor(hwc_to_chw(content).astype(dtype), requires_grad=True)
    params = {"pixels": pixels}
    state = AdamState(params, lr=learning_rate)

    for step in range(iterations):
        pixels.zero_grad()
        maps = {t: m for t, m in zip(all_taps, extract_features(pixels, net, all_taps))}
        c_term = content_loss([maps[t] for t in content_taps], content_targets)
        s_term = style_loss([gram(maps[t]) for t in style_taps], style_targets, weights.layer_weights)
        loss = total_loss(c_term, s_term, weights)
        loss.backward()
        adam_step(params, {}, state)
        np.clip(pixels.data, 0.0, 1.0, out=pixels.data)
        if callback is not None:
            callback(step, float(c_term.data), float(s_term.data), float(loss.data))

    return chw_to_hwc(pixels.data.astype(np.float64))


def run_split_style_transfer(
    content,
    assignment,
    network,
    weights=None,
    max_colors=DEFAULT_MAX_COLORS,
    tolerance=DEFAULT_TOLERANCE,
    dtype=np.float32,
    callback=None,
):
    """Fig-2 pipeline: quantize palette, split, style each region with its
    assigned swatch, recombine.  Output equals the recombination of the
    independent per-region runs exactly."""
    content = np.asarray(content, dtype=np.float64)
    palette = quantize_palette(content, max_colors=max_colors, tolerance=tolerance)
    regions = split(content, palette)
    missing = [r.index for r in regions if r.index not in assignment.styles]
    if missing:
        raise ValueError(f"no style assigned for region(s) {missing}")

    styled = []
    for region in regions:
        region_cb = None
        if callback is not None:
            region_cb = lambda step, c, s, t, _r=region.index: callback(_r, step, c, s, t)
        styled.append(
            run_style_transfer(
                region.sub_image,
                assignment.styles[region.index],
                network,
                weights,
                iterations=assignment.iterations,
                seed=assignment.seed,
                learning_rate=assignment.learning_rate,
                dtype=dtype,
                callback=region_cb,
            )
        )
    return recombine(styled, regions)
