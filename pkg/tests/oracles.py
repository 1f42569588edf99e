"""Independent reference implementations used as test oracles.

Everything here is deliberately naive (explicit loops, direct formulas) and
never shares code with the library paths it checks.
"""

import numpy as np


def conv2d_loops(x, k, stride=1, padding=0):
    """Direct sliding-window cross-correlation, quadruple loop."""
    co, ci, kh, kw = k.shape
    c, h, w = x.shape
    assert c == ci
    xp = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    oh = (h + 2 * padding - kh) // stride + 1
    ow = (w + 2 * padding - kw) // stride + 1
    out = np.zeros((co, oh, ow), dtype=np.float64)
    for o in range(co):
        for i in range(oh):
            for j in range(ow):
                acc = 0.0
                for cc in range(ci):
                    for a in range(kh):
                        for b in range(kw):
                            acc += xp[cc, i * stride + a, j * stride + b] * k[o, cc, a, b]
                out[o, i, j] = acc
    return out


def conv2d_transpose_scatter(x, k, stride=1, padding=0):
    """Scatter-accumulate transposed convolution, direct loops."""
    co, ci, kh, kw = k.shape
    c, h, w = x.shape
    assert c == co
    hf = (h - 1) * stride + kh
    wf = (w - 1) * stride + kw
    out = np.zeros((ci, hf, wf), dtype=np.float64)
    for o in range(co):
        for i in range(h):
            for j in range(w):
                for cc in range(ci):
                    for a in range(kh):
                        for b in range(kw):
                            out[cc, i * stride + a, j * stride + b] += x[o, i, j] * k[o, cc, a, b]
    if padding:
        out = out[:, padding:-padding or None, padding:-padding or None]
    return out


def gram_loops(h):
    """Gram matrix via an explicit double loop over filter pairs."""
    d, p = h.shape
    g = np.zeros((d, d), dtype=np.float64)
    for i in range(d):
        for j in range(d):
            for kk in range(p):
                g[i, j] += h[i, kk] * h[j, kk]
    return g


def largest_singular_value(mat):
    """Full SVD oracle for the spectral-normalization estimate."""
    return float(np.linalg.svd(np.asarray(mat, dtype=np.float64), compute_uv=False)[0])


def median_cut_cells(pixels, n_cells):
    """Reference median-cut bucketing: returns a cell index per pixel.

    Splits the box with the widest channel range at the median of that
    channel until ``n_cells`` boxes exist.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    cells = [np.arange(len(pixels))]
    while len(cells) < n_cells:
        widths = []
        for idx in cells:
            pts = pixels[idx]
            widths.append(float(np.max(pts.max(axis=0) - pts.min(axis=0))) if len(idx) > 1 else -1.0)
        target = int(np.argmax(widths))
        if widths[target] <= 0:
            break
        idx = cells.pop(target)
        pts = pixels[idx]
        channel = int(np.argmax(pts.max(axis=0) - pts.min(axis=0)))
        order = np.argsort(pts[:, channel], kind="stable")
        half = len(idx) // 2
        cells.insert(target, idx[order[:half]])
        cells.insert(target + 1, idx[order[half:]])
    labels = np.empty(len(pixels), dtype=int)
    for cell_id, idx in enumerate(cells):
        labels[idx] = cell_id
    return labels
