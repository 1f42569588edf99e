"""Split an image into per-color regions and recombine styled regions.

Images here are [h,w,3] float arrays with values in [0,1].  A palette is
extracted either exactly (few distinct colors) or by median-cut; every pixel
is then assigned to its nearest palette color, which makes region masks a
partition of the pixel grid by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_MAX_COLORS = 8
DEFAULT_TOLERANCE = 0.08


class PartitionError(ValueError):
    """Region masks fail to cover every pixel exactly once."""


@dataclass
class Palette:
    colors: np.ndarray  # [e, 3] floats in [0, 1], pairwise distinct
    image_size: tuple[int, int]

    def __len__(self):
        return len(self.colors)


@dataclass
class ColorRegion:
    index: int
    color: np.ndarray  # [3]
    mask: np.ndarray  # [h, w] bool
    sub_image: np.ndarray  # [h, w, 3]; region pixels from the source, rest mean-filled


def _check_image(image):
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected an [h,w,3] image, got shape {image.shape}")
    if image.size == 0:
        raise ValueError("image is empty")
    return image


def _median_cut(pixels, counts, n_colors):
    # Boxes of distinct colors (weighted by pixel count); repeatedly split the
    # box with the widest channel range at the weighted median of that channel.
    boxes = [np.arange(len(pixels))]
    while len(boxes) < n_colors:
        widths = []
        for idx in boxes:
            pts = pixels[idx]
            widths.append(float(np.max(pts.max(axis=0) - pts.min(axis=0))) if len(idx) > 1 else -1.0)
        target = int(np.argmax(widths))
        if widths[target] <= 0:
            break
        idx = boxes.pop(target)
        pts = pixels[idx]
        channel = int(np.argmax(pts.max(axis=0) - pts.min(axis=0)))
        order = np.argsort(pts[:, channel], kind="stable")
        cum = np.cumsum(counts[idx][order])
        half = int(np.searchsorted(cum, cum[-1] / 2.0)) + 1
        half = min(max(half, 1), len(idx) - 1)
        boxes.insert(target, idx[order[:half]])
        boxes.insert(target + 1, idx[order[half:]])
    centroids = []
    box_weights = []
    for idx in boxes:
        weight = counts[idx].astype(np.float64)
        centroids.append((pixels[idx] * weight[:, None]).sum(axis=0) / weight.sum())
        box_weights.append(weight.sum())
    return np.array(centroids), np.array(box_weights)


def _merge_close(colors, weights, tolerance):
    kept_colors: list[np.ndarray] = []
    kept_weights: list[float] = []
    for color, weight in zip(colors, weights):
        for i, existing in enumerate(kept_colors):
            if np.linalg.norm(existing - color) <= tolerance:
                total = kept_weights[i] + weight
                kept_colors[i] = (existing * kept_weights[i] + color * weight) / total
                kept_weights[i] = total
                break
        else:
            kept_colors.append(np.asarray(color, dtype=np.float64))
            kept_weights.append(float(weight))
    return np.array(kept_colors)


def quantize_palette(image, max_colors=DEFAULT_MAX_COLORS, tolerance=DEFAULT_TOLERANCE):
    """Extract the palette of distinct colors, median-cutting above max_colors.

    Colors closer than ``tolerance`` (Euclidean RGB) are merged by weighted
    mean, which absorbs anti-aliased edges.  Deterministic for fixed inputs.
    """
    image = _check_image(image)
    if max_colors < 1:
        raise ValueError("max_colors must be positive")
    if not 0.0 <= tolerance <= 1.0:
        raise ValueError("tolerance must lie in [0, 1]")
    pixels = image.reshape(-1, 3)
    distinct, counts = np.unique(pixels, axis=0, return_counts=True)
    if len(distinct) <= max_colors:
        colors, weights = distinct, counts
    else:
        colors, weights = _median_cut(distinct, counts, max_colors)
    colors = _merge_close(colors, weights, tolerance)
    colors = np.unique(colors, axis=0)
    return Palette(colors=colors, image_size=image.shape[:2])


def split(image, palette):
    """Assign each pixel to its nearest palette color (ties to the lowest
    index) and build one mean-filled sub-image per region."""
    image = _check_image(image)
    if len(palette) == 0:
        raise ValueError("palette is empty")
    pixels = image.reshape(-1, 3)
    dists = np.linalg.norm(pixels[:, None, :] - palette.colors[None, :, :], axis=2)
    assignment = np.argmin(dists, axis=1).reshape(image.shape[:2])

    regions = []
    for r, color in enumerate(palette.colors):
        mask = assignment == r
        if mask.any():
            fill = image[mask].mean(axis=0)
        else:
            fill = np.asarray(color, dtype=np.float64)
        sub = np.where(mask[:, :, None], image, fill[None, None, :])
        regions.append(ColorRegion(index=r, color=np.asarray(color), mask=mask, sub_image=sub))
    return regions


def recombine(styled, regions):
    """Stitch styled sub-images back together along the region masks."""
    if len(styled) != len(regions):
        raise ValueError(f"{len(styled)} styled images for {len(regions)} regions")
    shape = regions[0].mask.shape
    coverage = np.zeros(shape, dtype=np.int64)
    for region in regions:
        if region.mask.shape != shape:
            raise ValueError("region masks disagree on image size")
        coverage += region.mask
    bad = int(np.count_nonzero(coverage != 1))
    if bad:
        raise PartitionError(f"masks do not partition the grid: {bad} pixels off")

    out = np.zeros(styled[0].shape, dtype=np.float64)
    for img, region in zip(styled, regions):
        img = np.asarray(img, dtype=np.float64)
        if img.shape[:2] != shape:
            raise ValueError(f"styled image shape {img.shape} does not match {shape}")
        out[region.mask] = img[region.mask]
    return out


def encode_mask_rle(mask):
    """Per-row run lengths, alternating zero-runs and one-runs (zeros first)."""
    mask = np.asarray(mask, dtype=bool)
    rows = []
    for row in mask:
        boundaries = np.flatnonzero(np.diff(row)) + 1
        edges = np.concatenate(([0], boundaries, [len(row)]))
        runs = np.diff(edges).tolist()
        if row[0]:
            runs = [0] + runs  # encoding always starts with a zero-run
        rows.append(runs)
    return {"height": mask.shape[0], "width": mask.shape[1], "rows": rows}


def decode_mask_rle(payload):
    out = np.zeros((payload["height"], payload["width"]), dtype=bool)
    for y, runs in enumerate(payload["rows"]):
        x = 0
        value = False
        for length in runs:
            if value:
                out[y, x : x + length] = True
            x += length
            value = not value
    return out
