"""Separable Catmull-Rom bicubic resampling.

Half-pixel coordinate mapping with linear-extrapolated borders, so linear
ramps are reproduced exactly at every output sample (the property the unit
tests pin down).  The scalar `bicubic_reference` below is the independent
oracle used by the tests; it shares only the kernel definition.
"""

from __future__ import annotations

import numpy as np


def catmull_rom(t: np.ndarray) -> np.ndarray:
    """Catmull-Rom kernel (bicubic with a = -0.5) evaluated at |t|."""
    t = np.abs(t)
    out = np.zeros_like(t)
    m1 = t < 1.0
    m2 = (t >= 1.0) & (t < 2.0)
    out[m1] = 1.5 * t[m1] ** 3 - 2.5 * t[m1] ** 2 + 1.0
    out[m2] = -0.5 * t[m2] ** 3 + 2.5 * t[m2] ** 2 - 4.0 * t[m2] + 2.0
    return out


def _extend(x: np.ndarray, axis: int) -> np.ndarray:
    """Prepend/append two linearly extrapolated samples along ``axis``."""
    x = np.moveaxis(x, axis, 0)
    first, second = x[0], x[1] if x.shape[0] > 1 else x[0]
    last, prev = x[-1], x[-2] if x.shape[0] > 1 else x[-1]
    left = np.stack([3.0 * first - 2.0 * second, 2.0 * first - second])
    right = np.stack([2.0 * last - prev, 3.0 * last - 2.0 * prev])
    out = np.concatenate([left, x, right], axis=0)
    return np.moveaxis(out, 0, axis)


def _resize_weights(n_in: int, n_out: int, dtype) -> np.ndarray:
    """(n_out, n_in + 4) tap-weight matrix over the extended axis."""
    dst = np.arange(n_out, dtype=np.float64)
    src = (dst + 0.5) * (n_in / n_out) - 0.5
    i0 = np.floor(src).astype(np.int64)
    frac = src - i0
    weights = np.zeros((n_out, n_in + 4), dtype=np.float64)
    for k in range(-1, 3):
        w = catmull_rom(frac - k)
        cols = i0 + k + 2  # +2 for the extension offset
        weights[np.arange(n_out), cols] += w
    return weights.astype(dtype)


def resize_axis(x: np.ndarray, n_out: int, axis: int) -> np.ndarray:
    n_in = x.shape[axis]
    if n_in == n_out:
        return x.copy()
    ext = _extend(x, axis)
    w = _resize_weights(n_in, n_out, np.float64)
    moved = np.moveaxis(ext, axis, -1)
    out = moved @ w.T
    return np.moveaxis(out, -1, axis).astype(x.dtype, copy=False)


def resize_bicubic(img: np.ndarray, target: int) -> np.ndarray:
    """Resize trailing H x W dims of a (...,H,W) image to target x target."""
    if target < 1:
        raise ValueError("target resolution must be >= 1")
    out = resize_axis(img, target, axis=-1)
    out = resize_axis(out, target, axis=-2)
    return out


def bicubic_reference(img: np.ndarray, target: int) -> np.ndarray:
    """Slow per-pixel oracle: direct 2-D kernel evaluation, scalar loops."""
    img = np.asarray(img, dtype=np.float64)
    lead = img.shape[:-2]
    h, w = img.shape[-2:]
    flat = img.reshape(-1, h, w)
    out = np.zeros((flat.shape[0], target, target))

    def sample(plane, iy, ix):
        # linear extrapolation outside [0, n-1]
        def axis_fetch(n, i):
            if 0 <= i < n:
                return i, None
            if i < 0:
                return 0, -i  # extrapolate using x0 + k*(x0 - x1)
            return n - 1, i - (n - 1)

        yi, yk = axis_fetch(plane.shape[0], iy)
        xi, xk = axis_fetch(plane.shape[1], ix)

        def fetch_row(y):
            row = plane[y]
            if xk is None:
                return row[xi]
            step = row[xi] - (row[xi - 1] if ix > 0 else row[xi + 1])
            return row[xi] + xk * step

        if yk is None:
            return fetch_row(yi)
        step_y = fetch_row(yi) - fetch_row(yi - 1 if iy > 0 else yi + 1)
        return fetch_row(yi) + yk * step_y

    for p in range(flat.shape[0]):
        for oy in range(target):
            sy = (oy + 0.5) * (h / target) - 0.5
            y0 = int(np.floor(sy))
            ty = sy - y0
            for ox in range(target):
                sx = (ox + 0.5) * (w / target) - 0.5
                x0 = int(np.floor(sx))
                tx = sx - x0
                acc = 0.0
                for dy in range(-1, 3):
                    wy = float(catmull_rom(np.array([ty - dy]))[0])
                    for dx in range(-1, 3):
                        wx = float(catmull_rom(np.array([tx - dx]))[0])
                        acc += wy * wx * sample(flat[p], y0 + dy, x0 + dx)
                out[p, oy, ox] = acc
    return out.reshape(*lead, target, target)
