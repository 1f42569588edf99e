"""Feature extraction for the style losses.

A small frozen convolutional stack produces per-layer feature maps (filter
activations flattened over positions, shape d x p) and their Gram matrices
(pairwise dot products over positions, shape d x d).  The default network
uses fixed He-initialized random filters; higher-fidelity weights can be
loaded from an STWT file.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import avg_pool2, conv2d
from .tensor import ShapeError, Tensor, as_tensor, matmul, relu, reshape, transpose
from .weights import WeightFormatError, load_weights

DEFAULT_FILTERS = (16, 16, 32, 32, 64, 64)
DEFAULT_POOL_AFTER = (2, 4)
DEFAULT_STYLE_TAPS = (1, 2, 3, 4)
DEFAULT_CONTENT_TAPS = (5,)


@dataclass
class LayerSpec:
    out_channels: int
    kernel: int = 3
    stride: int = 1
    padding: int = 1
    pool_after: bool = False


@dataclass
class FeatureMap:
    """Filter activations at one layer, flattened to a d x p matrix."""

    layer: int
    values: Tensor
    height: int
    width: int

    @property
    def d(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]


@dataclass
class GramMatrix:
    """Pairwise position dot products of a feature map: d x d, symmetric PSD."""

    layer: int
    values: Tensor
    p: int

    @property
    def d(self):
        return self.values.shape[0]


@dataclass
class FeatureNetwork:
    """Frozen conv stack with named tap points; immutable after construction."""

    layers: list[LayerSpec]
    kernels: list[Tensor]
    biases: list[Tensor]
    style_taps: tuple[int, ...] = DEFAULT_STYLE_TAPS
    content_taps: tuple[int, ...] = DEFAULT_CONTENT_TAPS
    in_channels: int = 3

    def astype(self, dtype):
        return FeatureNetwork(
            layers=self.layers,
            kernels=[Tensor(k.data.astype(dtype)) for k in self.kernels],
            biases=[Tensor(b.data.astype(dtype)) for b in self.biases],
            style_taps=self.style_taps,
            content_taps=self.content_taps,
            in_channels=self.in_channels,
        )

    @property
    def depth(self):
        return len(self.layers)


def extract_features(image, network, taps):
    """Run the network on a [c,h,w] image and collect one FeatureMap per tap.

    Taps are 1-based layer indices; the map at layer l is the activation
    after that layer's nonlinearity, before any pooling.  Differentiable
    with respect to the image.
    """
    x = as_tensor(image)
    if x.ndim != 3:
        raise ShapeError(f"expected a [c,h,w] image, got {x.shape}")
    if x.shape[0] != network.in_channels:
        raise ShapeError(
            f"network expects {network.in_channels} channels, image has {x.shape[0]}"
        )
    taps = tuple(taps)
    for t in taps:
        if not 1 <= t <= network.depth:
            raise ShapeError(f"tap {t} beyond network depth {network.depth}")

    maps = {}
    deepest = max(taps)
    for idx, spec in enumerate(network.layers[:deepest], start=1):
        x = conv2d(x, network.kernels[idx - 1], stride=spec.stride, padding=spec.padding)
        x = x + reshape(network.biases[idx - 1], (spec.out_channels, 1, 1))
        x = relu(x)
        if idx in taps:
            d, h, w = x.shape
            maps[idx] = FeatureMap(idx, reshape(x, (d, h * w)), h, w)
        if spec.pool_after and idx < deepest:
            x = avg_pool2(x)
    return [maps[t] for t in taps]


def gram(feature_map):
    """G_ij = sum_k H_ik * H_jk over positions."""
    h = feature_map.values
    return GramMatrix(
        layer=feature_map.layer,
        values=matmul(h, transpose(h)),
        p=feature_map.p,
    )


def build_default_network(seed=0, mode="random-features", weights_path=None, dtype=np.float64):
    """Six 3x3 conv layers (16/16/32/32/64/64 filters), 2x average pooling
    after layers 2 and 4; style taps 1-4, content tap 5.

    ``random-features`` draws fixed He-initialized filters from the seed;
    ``from-file`` reads kernels and biases from an STWT weight file.
    """
    layers = [
        LayerSpec(f, pool_after=(i + 1) in DEFAULT_POOL_AFTER)
        for i, f in enumerate(DEFAULT_FILTERS)
    ]
    in_channels = 3
    if mode == "random-features":
        rng = np.random.default_rng(seed)
        kernels, biases = [], []
        c_in = in_channels
        for spec in layers:
            fan_in = c_in * spec.kernel * spec.kernel
            std = np.sqrt(2.0 / fan_in)
            k = rng.standard_normal((spec.out_channels, c_in, spec.kernel, spec.kernel)) * std
            kernels.append(Tensor(k.astype(dtype)))
            biases.append(Tensor(np.zeros(spec.out_channels, dtype=dtype)))
            c_in = spec.out_channels
    elif mode == "from-file":
        if weights_path is None:
            raise ValueError("from-file mode requires weights_path")
        stored = load_weights(weights_path)
        expected = 2 * len(layers)
        if len(stored) != expected:
            raise WeightFormatError(
                f"expected {expected} tensors (weight+bias per layer), found {len(stored)}", 0
            )
        kernels, biases = [], []
        c_in = in_channels
        for idx, spec in enumerate(layers, start=1):
            try:
                k = stored[f"layer{idx}.weight"]
                b = stored[f"layer{idx}.bias"]
            except KeyError as exc:
                raise WeightFormatError(f"missing tensor {exc.args[0]!r}", 0) from exc
            want = (spec.out_channels, c_in, spec.kernel, spec.kernel)
            if k.shape != want or b.shape != (spec.out_channels,):
                raise WeightFormatError(
                    f"layer{idx} tensor shapes {k.shape}/{b.shape} do not match {want}", 0
                )
            kernels.append(Tensor(k.astype(dtype)))
            biases.append(Tensor(b.astype(dtype)))
            c_in = spec.out_channels
    else:
        raise ValueError(f"unknown mode {mode!r}")

    return FeatureNetwork(layers=layers, kernels=kernels, biases=biases, in_channels=in_channels)
