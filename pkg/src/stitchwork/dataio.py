"""Image IO, dataset manifests, and the synthetic unpaired corpus.

Images travel as [h,w,c] float arrays in [0,1] (c is 1 or 3).  The synthetic
corpus stands in for the proprietary embroidery data: domain X holds flat
multi-color glyph images, domain Y the same family overlaid with a procedural
stitch texture whose stripe orientation and phase derive from the region
color, so translation quality has a computable oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image as PILImage, UnidentifiedImageError

STITCH_DEPTH = 0.45
STITCH_PERIODS = (4, 5, 6)


class ImageFormatError(ValueError):
    """File is not a decodable PNG."""


class UnsupportedImageError(ImageFormatError):
    """Decodable but outside the 8-bit RGB/grayscale contract."""


def load_image(path):
    """Load an 8-bit PNG as [h,w,c] floats in [0,1]; grayscale gives c=1."""
    try:
        with PILImage.open(path) as img:
            img.load()
            mode = img.mode
            if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                raise UnsupportedImageError(f"unsupported bit depth/mode {mode!r} in {path}")
            if mode == "P":
                img = img.convert("RGBA" if "transparency" in img.info else "RGB")
                mode = img.mode
            if mode in ("RGBA", "LA"):
                # composite over white; uploaded logos are commonly RGBA
                background = PILImage.new("RGBA", img.size, (255, 255, 255, 255))
                img = PILImage.alpha_composite(background, img.convert("RGBA")).convert("RGB")
                mode = "RGB"
            if mode == "L":
                arr = np.asarray(img, dtype=np.float64)[:, :, None]
            elif mode == "RGB":
                arr = np.asarray(img, dtype=np.float64)
            else:
                raise UnsupportedImageError(f"unsupported image mode {mode!r} in {path}")
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"not a decodable image: {path}") from exc
    except OSError as exc:
        raise ImageFormatError(f"failed to decode {path}: {exc}") from exc
    return arr / 255.0


def save_image(image, path):
    """Write [h,w,c] floats in [0,1] as an 8-bit PNG (c = 1 or 3)."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] not in (1, 3):
        raise ValueError(f"expected [h,w,1] or [h,w,3], got {image.shape}")
    data = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    if data.shape[2] == 1:
        pil = PILImage.fromarray(data[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(data, mode="RGB")
    pil.save(path, format="PNG")


def to_rgb(image):
    image = np.asarray(image)
    if image.ndim == 3 and image.shape[2] == 3:
        return image
    if image.ndim == 3 and image.shape[2] == 1:
        return np.repeat(image, 3, axis=2)
    raise ValueError(f"cannot promote shape {image.shape} to RGB")


def hwc_to_chw(image):
    return np.ascontiguousarray(np.moveaxis(np.asarray(image), 2, 0))


def chw_to_hwc(arr):
    return np.ascontiguousarray(np.moveaxis(np.asarray(arr), 0, 2))


@dataclass
class DatasetManifest:
    """Unpaired domain file lists plus a train/test split over the combined
    index space (domain X occupies indices [0, |X|), Y the rest)."""

    domain_x: list[str]
    domain_y: list[str]
    train: list[int]
    test: list[int]
    seed: int
    tags: dict = field(default_factory=dict)

    def _paths(self, indices, want_x):
        nx = len(self.domain_x)
        out = []
        for i in indices:
            if want_x and i < nx:
                out.append(self.domain_x[i])
            elif not want_x and i >= nx:
                out.append(self.domain_y[i - nx])
        return out

    def train_x(self):
        return self._paths(self.train, True)

    def train_y(self):
        return self._paths(self.train, False)

    def test_x(self):
        return self._paths(self.test, True)

    def test_y(self):
        return self._paths(self.test, False)

    def to_json(self):
        return json.dumps(
            {
                "domain_x": self.domain_x,
                "domain_y": self.domain_y,
                "train": self.train,
                "test": self.test,
                "seed": self.seed,
                "tags": self.tags,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text):
        raw = json.loads(text)
        return cls(
            domain_x=list(raw["domain_x"]),
            domain_y=list(raw["domain_y"]),
            train=[int(i) for i in raw["train"]],
            test=[int(i) for i in raw["test"]],
            seed=int(raw["seed"]),
            tags=dict(raw.get("tags", {})),
        )

    def save(self, path):
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path):
        return cls.from_json(Path(path).read_text())


def build_manifest(dir_x, dir_y, train_fraction, seed, allow_empty_test=False):
    """Seeded shuffle of all files from both domains, split by fraction with
    fractional counts rounding toward train."""
    xs = sorted(str(p) for p in Path(dir_x).glob("*.png"))
    ys = sorted(str(p) for p in Path(dir_y).glob("*.png"))
    if not xs:
        raise ValueError(f"no PNG files in {dir_x}")
    if not ys:
        raise ValueError(f"no PNG files in {dir_y}")
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError("train_fraction must lie in (0, 1]")
    total = len(xs) + len(ys)
    order = np.random.default_rng(seed).permutation(total)
    n_train = int(math.ceil(round(total * train_fraction, 9)))
    train = sorted(int(i) for i in order[:n_train])
    test = sorted(int(i) for i in order[n_train:])
    if not test and not allow_empty_test:
        raise ValueError(
            "split leaves the test set empty; evaluation runs need test data "
            "(pass allow_empty_test to override)"
        )
    return DatasetManifest(domain_x=xs, domain_y=ys, train=train, test=test, seed=int(seed))


# -- synthetic corpus ---------------------------------------------------------

# Colors sit exactly on the 8-bit grid so PNG round trips preserve them and
# the stitch field stays recomputable from saved files.
_COLOR_POOL = (
    np.round(
        np.array(
            [
                [0.93, 0.20, 0.18],
                [0.16, 0.42, 0.86],
                [0.98, 0.83, 0.19],
                [0.15, 0.68, 0.38],
                [0.91, 0.49, 0.13],
                [0.55, 0.27, 0.75],
                [0.13, 0.75, 0.79],
                [0.89, 0.35, 0.62],
                [0.96, 0.93, 0.88],
                [0.28, 0.30, 0.33],
                [0.62, 0.78, 0.24],
                [0.47, 0.33, 0.20],
            ]
        )
        * 255.0
    )
    / 255.0
)


def stitch_field(color, height, width):
    """Multiplicative stitch-groove field for one region color.

    Oriented stripes with a per-color orientation, period, and phase; the
    modulation darkens (mean factor < 1) so stitching is learnable as a
    local map even before stripe phase is recovered.
    """
    r, g, b = (float(c) for c in np.asarray(color).reshape(3))
    mix = 7.0 * r + 13.0 * g + 19.0 * b
    angle = (mix * 2.39996) % math.pi
    period = STITCH_PERIODS[int(mix * 97.0) % len(STITCH_PERIODS)]
    phase = (mix * 43.0) % (2.0 * math.pi)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    coord = xx * math.cos(angle) + yy * math.sin(angle)
    stripe = 0.5 + 0.5 * np.sin(2.0 * math.pi * coord / period + phase)
    return 1.0 - STITCH_DEPTH * stripe


def apply_stitch_texture(image):
    """Render the procedural embroidered version of a flat-color image."""
    image = np.asarray(image, dtype=np.float64)
    h, w = image.shape[:2]
    out = np.empty_like(image)
    pixels = image.reshape(-1, 3)
    distinct = np.unique(pixels, axis=0)
    flat_out = out.reshape(-1, 3)
    for color in distinct:
        mask = np.all(pixels == color, axis=1)
        region_field = stitch_field(color, h, w).reshape(-1)[mask]
        flat_out[mask] = np.clip(pixels[mask] * region_field[:, None], 0.0, 1.0)
    return out


def _draw_glyph_image(rng, size):
    n_colors = int(rng.integers(2, 5))
    colors = _COLOR_POOL[rng.choice(len(_COLOR_POOL), size=n_colors, replace=False)]
    img = np.empty((size, size, 3))
    img[:] = colors[0]
    for color in colors[1:]:
        kind = int(rng.integers(0, 3))
        if kind == 0:  # rectangle
            y0, x0 = rng.integers(0, size - 3, size=2)
            y1 = int(rng.integers(y0 + 2, size))
            x1 = int(rng.integers(x0 + 2, size))
            img[y0:y1, x0:x1] = color
        elif kind == 1:  # disc
            cy, cx = rng.integers(size // 4, 3 * size // 4, size=2)
            rad = int(rng.integers(size // 8, size // 3))
            yy, xx = np.mgrid[0:size, 0:size]
            img[(yy - cy) ** 2 + (xx - cx) ** 2 <= rad * rad] = color
        else:  # bar glyph (text-like stroke)
            thickness = max(2, size // 10)
            pos = int(rng.integers(0, size - thickness))
            if rng.integers(0, 2):
                img[pos : pos + thickness, size // 6 : 5 * size // 6] = color
            else:
                img[size // 6 : 5 * size // 6, pos : pos + thickness] = color
    return img


def generate_synthetic_corpus(n, size, seed, out_dir, eval_pairs=16):
    """Write n domain-X and n domain-Y images (unpaired draws from one
    family) plus held-out aligned pairs for evaluation oracles.

    Layout: out_dir/x/*.png, out_dir/y/*.png, out_dir/eval_pairs/{x,y}/*.png.
    Pure function of (n, size, seed).
    """
    if n < 2:
        raise ValueError("need n >= 2 images per domain")
    if size % 4:
        raise ValueError("size must be divisible by 4")
    out_dir = Path(out_dir)
    dirs = {
        "x": out_dir / "x",
        "y": out_dir / "y",
        "ex": out_dir / "eval_pairs" / "x",
        "ey": out_dir / "eval_pairs" / "y",
    }
    for d in dirs.values():
        d.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    for i in range(n):
        save_image(_draw_glyph_image(rng, size), dirs["x"] / f"{i:04d}.png")
    for i in range(n):
        save_image(apply_stitch_texture(_draw_glyph_image(rng, size)), dirs["y"] / f"{i:04d}.png")
    for i in range(eval_pairs):
        base = _draw_glyph_image(rng, size)
        save_image(base, dirs["ex"] / f"{i:04d}.png")
        save_image(apply_stitch_texture(base), dirs["ey"] / f"{i:04d}.png")
    return dirs["x"].parent
