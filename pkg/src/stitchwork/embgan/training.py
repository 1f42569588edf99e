"""Desk-scale adversarial training: alternating D/G updates, seeded epoch
shuffles, STWT checkpoints with a JSON sidecar, and deterministic resume.

All randomness derives from (seed, epoch) so an interrupted run resumed from
a checkpoint replays the exact metrics of an uninterrupted one.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..dataio import DatasetManifest, chw_to_hwc, hwc_to_chw, load_image, to_rgb
from ..optim import GAN_BETA1, GAN_LR, AdamState, adam_step, zero_grads
from ..tensor import Tensor, no_grad
from ..weights import load_weights, save_weights
from .losses import (
    adversarial_loss,
    cycle_loss,
    embedding_loss,
    identity_loss,
    lsgan_adversarial_loss,
    total_objective,
    with_zero_embedding,
)
from .networks import Discriminator, DiscriminatorConfig, Generator, GeneratorConfig


class GanTrainingError(RuntimeError):
    """A loss component became non-finite; carries the component name."""

    def __init__(self, component, value):
        super().__init__(f"non-finite loss component {component!r}: {value}")
        self.component = component


@dataclass
class GanConfig:
    image_channels: int = 3
    embedding_channels: int = 1
    gen_filters: int = 16
    disc_filters: int = 16
    disc_layers: int = 4
    residual_blocks: int = 4
    downsamples: int = 2
    lambda_cyc: float = 10.0
    lambda_idt: float = 5.0
    lambda_emb: float = 1.0
    lr: float = GAN_LR
    beta1: float = GAN_BETA1
    beta2: float = 0.999
    batch_size: int = 1
    epochs: int = 5
    seed: int = 0
    image_size: int = 32
    checkpoint_every: int = 5
    gan_mode: str = "log"  # "log" or "lsgan"
    non_saturating: bool = True

    def generator_config(self):
        return GeneratorConfig(
            image_channels=self.image_channels,
            embedding_channels=self.embedding_channels,
            base_filters=self.gen_filters,
            downsamples=self.downsamples,
            residual_blocks=self.residual_blocks,
        )

    def discriminator_config(self):
        return DiscriminatorConfig(
            image_channels=self.image_channels,
            base_filters=self.disc_filters,
            layers=self.disc_layers,
        )


@dataclass
class EmbBatch:
    """Unpaired image batches plus the zero embedding planes appended on
    generator input ("the zeros enter, the embedding leaves")."""

    x: np.ndarray  # [B, c, h, w]
    y: np.ndarray
    embedding_channels: int = 1

    def x_input(self):
        return with_zero_embedding(Tensor(self.x), self.embedding_channels)

    def y_input(self):
        return with_zero_embedding(Tensor(self.y), self.embedding_channels)


class GanState:
    """Both generator/discriminator parameter sets with their optimizers."""

    def __init__(self, config, dtype=np.float32):
        self.config = config
        self.dtype = dtype
        gc = config.generator_config()
        dc = config.discriminator_config()
        seeds = [int(s) for s in np.random.SeedSequence([config.seed]).generate_state(4)]
        self.g1 = Generator(gc, seed=seeds[0], dtype=dtype)
        self.g2 = Generator(gc, seed=seeds[1], dtype=dtype)
        self.d1 = Discriminator(dc, seed=seeds[2], dtype=dtype)
        self.d2 = Discriminator(dc, seed=seeds[3], dtype=dtype)
        adam = dict(lr=config.lr, beta1=config.beta1, beta2=config.beta2)
        self.opt = {
            "g1": AdamState(self.g1.params, **adam),
            "g2": AdamState(self.g2.params, **adam),
            "d1": AdamState(self.d1.params, **adam),
            "d2": AdamState(self.d2.params, **adam),
        }
        self.epoch = 0
        self.step = 0

    def networks(self):
        return {"g1": self.g1, "g2": self.g2, "d1": self.d1, "d2": self.d2}

    def translate_batch(self, images, direction):
        """Run [n,c,h,w] images through one generator; returns (image, embedding)."""
        gen = self.g1 if direction == "x2y" else self.g2
        k = self.config.embedding_channels
        c = self.config.image_channels
        with no_grad():
            out = gen.forward(with_zero_embedding(Tensor(images.astype(self.dtype)), k))
        return out.data[:, :c], out.data[:, c:]


def _check_finite(metrics):
    for name, value in metrics.items():
        if not np.isfinite(value):
            raise GanTrainingError(name, value)


def train_step(state, batch):
    """One discriminator update (both sides) then one generator update."""
    cfg = state.config
    c = cfg.image_channels

    def adv_pair(real, fake):
        if cfg.gan_mode == "log":
            return adversarial_loss(real, fake, non_saturating=cfg.non_saturating)
        return lsgan_adversarial_loss(real, fake)

    x_real = Tensor(batch.x)
    y_real = Tensor(batch.y)

    # -- discriminator phase (fakes detached) --
    with no_grad():
        fake_y_img = state.g1.forward(batch.x_input()).data[:, :c]
        fake_x_img = state.g2.forward(batch.y_input()).data[:, :c]
    d1_real = state.d1.forward(y_real, update_u=True)
    d1_fake = state.d1.forward(Tensor(fake_y_img), update_u=True)
    d2_real = state.d2.forward(x_real, update_u=True)
    d2_fake = state.d2.forward(Tensor(fake_x_img), update_u=True)
    d1_obj, _ = adv_pair(d1_real, d1_fake)
    d2_obj, _ = adv_pair(d2_real, d2_fake)
    d_loss = -(d1_obj + d2_obj)
    for net in ("d1", "d2"):
        zero_grads(state.networks()[net].params)
    d_loss.backward()
    adam_step(state.d1.params, {}, state.opt["d1"])
    adam_step(state.d2.params, {}, state.opt["d2"])

    # -- generator phase --
    fake_y = state.g1.forward(batch.x_input())
    fake_x = state.g2.forward(batch.y_input())
    fake_y_img_t = fake_y[:, :c]
    fake_x_img_t = fake_x[:, :c]
    emb_y = fake_y[:, c:]
    emb_x = fake_x[:, c:]

    with no_grad():
        post_real_y = state.d1.forward(y_real, update_u=False)
        post_real_x = state.d2.forward(x_real, update_u=False)
    scores_fy = state.d1.forward(fake_y_img_t, update_u=False)
    scores_fx = state.d2.forward(fake_x_img_t, update_u=False)
    d_adv1, g_adv1 = adv_pair(post_real_y, scores_fy)
    d_adv2, g_adv2 = adv_pair(post_real_x, scores_fx)

    k = cfg.embedding_channels
    recon_x = state.g2.forward(_append_zeros(fake_y_img_t, k))[:, :c]
    recon_y = state.g1.forward(_append_zeros(fake_x_img_t, k))[:, :c]
    cyc1 = cycle_loss(x_real, recon_x)
    cyc2 = cycle_loss(y_real, recon_y)
    idt = identity_loss(state.g1, state.g2, x_real, y_real)
    emb = embedding_loss(emb_y, emb_x)
    g_total, _ = total_objective(
        g_adv1, g_adv2, d_adv1, d_adv2, cyc1, cyc2, idt, emb,
        lambda_idt=cfg.lambda_idt, lambda_emb=cfg.lambda_emb, lambda_cyc=cfg.lambda_cyc,
    )
    for net in ("g1", "g2"):
        zero_grads(state.networks()[net].params)
    g_total.backward()
    adam_step(state.g1.params, {}, state.opt["g1"])
    adam_step(state.g2.params, {}, state.opt["g2"])

    state.step += 1
    metrics = {
        "step": state.step,
        "epoch": state.epoch,
        "d1": float(d1_obj.data),
        "d2": float(d2_obj.data),
        "g1": float(g_adv1.data),
        "g2": float(g_adv2.data),
        "cyc1": float(cyc1.data),
        "cyc2": float(cyc2.data),
        "idt": float(idt.data),
        "emb": float(emb.data),
    }
    _check_finite({k: v for k, v in metrics.items() if k not in ("step", "epoch")})
    return metrics


def _append_zeros(image_tensor, k):
    from ..tensor import concatenate

    n, _c, h, w = image_tensor.shape
    zeros = Tensor(np.zeros((n, k, h, w), dtype=image_tensor.dtype))
    return concatenate([image_tensor, zeros], axis=1)


def _load_domain(paths, size, channels):
    images, skipped = [], 0
    for path in paths:
        try:
            img = to_rgb(load_image(path)) if channels == 3 else load_image(path)
        except Exception as exc:  # unreadable file: skip with warning
            warnings.warn(f"skipping unreadable image {path}: {exc}")
            skipped += 1
            continue
        if img.shape[0] != size or img.shape[1] != size:
            warnings.warn(f"skipping {path}: size {img.shape[:2]} != {size}x{size}")
            skipped += 1
            continue
        images.append(hwc_to_chw(img).astype(np.float32))
    if skipped > 0.1 * max(len(paths), 1):
        raise ValueError(f"{skipped}/{len(paths)} images unreadable; aborting")
    if not images:
        raise ValueError("no usable images in domain")
    return np.stack(images)


def train(config, manifest, out_dir, resume=None, on_epoch=None):
    """Run the epoch loop over a manifest; returns (state, metrics list).

    Writes ``metrics.jsonl`` (one record per step), periodic checkpoints, and
    ``checkpoint.stwt`` at the end under ``out_dir``.
    """
    if isinstance(manifest, (str, Path)):
        manifest = DatasetManifest.load(manifest)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    xs = _load_domain(manifest.train_x(), config.image_size, config.image_channels)
    ys = _load_domain(manifest.train_y(), config.image_size, config.image_channels)

    if resume is not None:
        state = load_checkpoint(resume)
        config = state.config
    else:
        state = GanState(config)

    metrics_path = out_dir / "metrics.jsonl"
    log = open(metrics_path, "a" if resume is not None else "w")
    all_metrics = []
    try:
        for epoch in range(state.epoch, config.epochs):
            rng = np.random.default_rng([config.seed, epoch])
            order_x = rng.permutation(len(xs))
            order_y = rng.permutation(len(ys))
            n_batches = min(len(xs), len(ys)) // config.batch_size
            for b in range(n_batches):
                lo = b * config.batch_size
                hi = lo + config.batch_size
                batch = EmbBatch(
                    x=xs[order_x[lo:hi]],
                    y=ys[order_y[lo:hi]],
                    embedding_channels=config.embedding_channels,
                )
                record = train_step(state, batch)
                all_metrics.append(record)
                log.write(json.dumps(record) + "\n")
            state.epoch = epoch + 1
            if on_epoch is not None:
                on_epoch(state, all_metrics)
            if config.checkpoint_every and state.epoch % config.checkpoint_every == 0:
                save_checkpoint(state, out_dir / f"checkpoint_epoch{state.epoch}.stwt")
        final = out_dir / "checkpoint.stwt"
        save_checkpoint(state, final)
    finally:
        log.close()
    return state, all_metrics


# -- checkpointing ------------------------------------------------------------


def save_checkpoint(state, path):
    """STWT weights (params, Adam moments, spectral u vectors) + JSON sidecar."""
    path = Path(path)
    tensors = {}
    for net_name, net in state.networks().items():
        for pname, param in net.params.items():
            tensors[f"{net_name}.{pname}"] = param.data
        opt = state.opt[net_name]
        for pname in net.params:
            tensors[f"adam.{net_name}.m.{pname}"] = opt.m[pname]
            tensors[f"adam.{net_name}.v.{pname}"] = opt.v[pname]
        if hasattr(net, "spectral"):
            # u values are kept float32-representable, so the STWT round
            # trip is exact and resume stays bitwise
            for wname, sstate in net.spectral.items():
                tensors[f"sn.{net_name}.{wname}"] = sstate.u
    save_weights(path, tensors)

    sidecar = {
        "epoch": state.epoch,
        "step": state.step,
        "config": asdict(state.config),
        "lambdas": {
            "cyc": state.config.lambda_cyc,
            "idt": state.config.lambda_idt,
            "emb": state.config.lambda_emb,
        },
        "adam_steps": {k: v.step_count for k, v in state.opt.items()},
        "rng": {"seed": state.config.seed, "next_epoch": state.epoch},
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
    return path


def load_checkpoint(path):
    path = Path(path)
    sidecar = json.loads(path.with_suffix(".json").read_text())
    config = GanConfig(**sidecar["config"])
    state = GanState(config)
    tensors = load_weights(path)
    for net_name, net in state.networks().items():
        for pname, param in net.params.items():
            param.data = tensors[f"{net_name}.{pname}"].astype(state.dtype)
        opt = state.opt[net_name]
        for pname in net.params:
            opt.m[pname] = tensors[f"adam.{net_name}.m.{pname}"].astype(state.dtype)
            opt.v[pname] = tensors[f"adam.{net_name}.v.{pname}"].astype(state.dtype)
        opt.step_count = sidecar["adam_steps"][net_name]
        if hasattr(net, "spectral"):
            for wname, sstate in net.spectral.items():
                sstate.u = tensors[f"sn.{net_name}.{wname}"].astype(np.float64)
    state.epoch = sidecar["epoch"]
    state.step = sidecar["step"]
    return state


def translate(checkpoint, image, direction="x2y"):
    """Translate one [h,w,c] image through the selected generator.

    The checkpoint may be a path or a live GanState.  Dimensions must be
    divisible by the generator's downsample factor.
    """
    state = checkpoint if isinstance(checkpoint, GanState) else load_checkpoint(checkpoint)
    if direction not in ("x2y", "y2x"):
        raise ValueError(f"direction must be 'x2y' or 'y2x', got {direction!r}")
    image = np.asarray(image, dtype=np.float64)
    factor = state.config.generator_config().downsample_factor
    h, w = image.shape[:2]
    if h % factor or w % factor:
        nh = max(factor, int(round(h / factor)) * factor)
        nw = max(factor, int(round(w / factor)) * factor)
        raise ValueError(
            f"image {h}x{w} not divisible by the downsample factor {factor}; "
            f"nearest valid size is {nh}x{nw}"
        )
    if state.config.image_channels == 3:
        image = to_rgb(image)
    batch = hwc_to_chw(image)[None, ...]
    out_img, _emb = state.translate_batch(batch, direction)
    return chw_to_hwc(out_img[0].astype(np.float64))
