"""Generator and discriminator networks for the adversarial translator.

The generator carries k extra embedding channels alongside the image: they
enter as zeros and leave unbounded (the image channels go through tanh mapped
to [0,1]).  Discriminator weights pass through spectral normalization on
every forward pass; the power-iteration vectors persist across steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn import conv2d, conv2d_transpose, instance_norm, sigmoid, tanh_act
from ..spectral import SpectralState, spectral_normalize
from ..tensor import ShapeError, Tensor, as_tensor, concatenate, leaky_relu, pad_reflect, relu

WEIGHT_STD = 0.02


@dataclass
class GeneratorConfig:
    image_channels: int = 3
    embedding_channels: int = 1
    base_filters: int = 16
    downsamples: int = 2
    residual_blocks: int = 4

    @property
    def total_channels(self):
        return self.image_channels + self.embedding_channels

    @property
    def downsample_factor(self):
        return 2 ** self.downsamples


@dataclass
class DiscriminatorConfig:
    image_channels: int = 3
    base_filters: int = 16
    layers: int = 4
    power_iterations: int = 1


def _init_conv(rng, co, ci, kh, kw, dtype):
    return Tensor(
        (rng.standard_normal((co, ci, kh, kw)) * WEIGHT_STD).astype(dtype),
        requires_grad=True,
    )


class Generator:
    """Reflect-padded encoder / residual core / transposed-conv decoder."""

    def __init__(self, config, seed=0, dtype=np.float32, params=None):
        self.config = config
        self.dtype = dtype
        self.params = params if params is not None else self._init_params(seed, dtype)

    def _init_params(self, seed, dtype):
        cfg = self.config
        rng = np.random.default_rng(seed)
        params = {}
        f = cfg.base_filters
        params["init.w"] = _init_conv(rng, f, cfg.total_channels, 7, 7, dtype)
        ch = f
        for i in range(cfg.downsamples):
            params[f"down{i}.w"] = _init_conv(rng, ch * 2, ch, 4, 4, dtype)
            ch *= 2
        for i in range(cfg.residual_blocks):
            params[f"res{i}.c1.w"] = _init_conv(rng, ch, ch, 3, 3, dtype)
            params[f"res{i}.c2.w"] = _init_conv(rng, ch, ch, 3, 3, dtype)
        for i in range(cfg.downsamples):
            params[f"up{i}.w"] = _init_conv(rng, ch, ch // 2, 4, 4, dtype)
            ch //= 2
        params["final.w"] = _init_conv(rng, cfg.total_channels, f, 7, 7, dtype)
        params["final.b"] = Tensor(np.zeros(cfg.total_channels, dtype=dtype), requires_grad=True)
        return params

    def forward(self, x):
        cfg = self.config
        x = as_tensor(x)
        channel_axis = 0 if x.ndim == 3 else 1
        if x.shape[channel_axis] != cfg.total_channels:
            raise ShapeError(
                f"generator expects {cfg.total_channels} channels "
                f"(image {cfg.image_channels} + embedding {cfg.embedding_channels}), "
                f"got {x.shape[channel_axis]}"
            )
        p = self.params
        t = relu(instance_norm(conv2d(pad_reflect(x, 3), p["init.w"])))
        for i in range(cfg.downsamples):
            t = relu(instance_norm(conv2d(pad_reflect(t, 1), p[f"down{i}.w"], stride=2)))
        for i in range(cfg.residual_blocks):
            r = relu(instance_norm(conv2d(pad_reflect(t, 1), p[f"res{i}.c1.w"])))
            r = instance_norm(conv2d(pad_reflect(r, 1), p[f"res{i}.c2.w"]))
            t = t + r
        for i in range(cfg.downsamples):
            t = relu(instance_norm(conv2d_transpose(t, p[f"up{i}.w"], stride=2, padding=1)))
        z = conv2d(pad_reflect(t, 3), p["final.w"])
        bias_shape = (cfg.total_channels, 1, 1) if z.ndim == 3 else (1, cfg.total_channels, 1, 1)
        z = z + p["final.b"].reshape(bias_shape)

        c = cfg.image_channels
        if z.ndim == 3:
            image = (tanh_act(z[:c]) + 1.0) * 0.5
            embedding = z[c:]
        else:
            image = (tanh_act(z[:, :c]) + 1.0) * 0.5
            embedding = z[:, c:]
        return concatenate([image, embedding], axis=channel_axis)


class Discriminator:
    """Patch-style stack, spectral norm on every conv weight, sigmoid head."""

    def __init__(self, config, seed=0, dtype=np.float32, params=None, spectral_seeds=None):
        self.config = config
        self.dtype = dtype
        self.params = params if params is not None else self._init_params(seed, dtype)
        self.spectral = {}
        base_seed = spectral_seeds if spectral_seeds is not None else seed + 1
        for idx, name in enumerate(self.weight_names()):
            rows = self.params[name].shape[0]
            state = SpectralState(
                rows, seed=base_seed + idx, power_iterations=config.power_iterations
            )
            # keep u exactly representable in the working dtype so checkpoint
            # round trips stay bitwise
            state.u = state.u.astype(dtype).astype(np.float64)
            self.spectral[name] = state

    def _layer_plan(self):
        cfg = self.config
        plan = []
        ch = cfg.image_channels
        out = cfg.base_filters
        for i in range(cfg.layers - 1):
            stride = 2 if i < cfg.layers - 2 else 1
            plan.append((f"l{i}.w", ch, out, stride))
            ch = out
            out = min(out * 2, cfg.base_filters * 8)
        plan.append(("head.w", ch, 1, 1))
        return plan

    def weight_names(self):
        return [name for name, *_ in self._layer_plan()]

    def _init_params(self, seed, dtype):
        rng = np.random.default_rng(seed)
        params = {}
        for name, ci, co, _stride in self._layer_plan():
            params[name] = _init_conv(rng, co, ci, 4, 4, dtype)
            params[name.replace(".w", ".b")] = Tensor(np.zeros(co, dtype=dtype), requires_grad=True)
        return params

    def forward(self, x, update_u=False):
        cfg = self.config
        x = as_tensor(x)
        channel_axis = 0 if x.ndim == 3 else 1
        if x.shape[channel_axis] != cfg.image_channels:
            raise ShapeError(
                f"discriminator expects {cfg.image_channels} channels, got {x.shape[channel_axis]}"
            )
        t = x
        plan = self._layer_plan()
        for idx, (name, _ci, co, stride) in enumerate(plan):
            state = self.spectral[name]
            if not update_u:
                saved_u = state.u.copy()
            w = spectral_normalize(self.params[name], state)
            if not update_u:
                state.u = saved_u
            bias = self.params[name.replace(".w", ".b")]
            bias_shape = (co, 1, 1) if t.ndim == 3 else (1, co, 1, 1)
            t = conv2d(t, w, stride=stride, padding=1) + bias.reshape(bias_shape)
            if idx < len(plan) - 1:
                t = leaky_relu(t, 0.2)
        return sigmoid(t)
