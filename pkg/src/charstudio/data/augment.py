"""Discriminator-input augmentation pipeline (blit/geometric/color/filter/cutout).

Runs outside the autodiff tape on plain arrays.  Stage order is fixed; each
enabled stage fires independently per image with probability p, so p=0 is the
identity bit-for-bit.  Geometry samples with reflection at the borders so
content never leaves the canvas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STAGE_ORDER = ("blit", "geometric", "color", "filter", "cutout")


@dataclass
class AugPipelineConfig:
    enabled: tuple[str, ...] = STAGE_ORDER
    p: float = 0.0
    max_rotate_deg: float = 15.0
    scale_range: tuple[float, float] = (0.8, 1.25)
    brightness: float = 0.2
    contrast_range: tuple[float, float] = (0.75, 1.33)
    blur_sigma: tuple[float, float] = (0.4, 1.4)
    cutout_frac: float = 0.5
    translate_frac: float = 0.125

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("augmentation probability must lie in [0,1]")
        unknown = set(self.enabled) - set(STAGE_ORDER)
        if unknown:
            raise ValueError(f"unknown augmentation stages: {sorted(unknown)}")
        # normalize to canonical order regardless of how the caller listed them
        self.enabled = tuple(s for s in STAGE_ORDER if s in self.enabled)

    @staticmethod
    def from_flags(flags: str, p: float = 0.0) -> "AugPipelineConfig":
        """Parse a compact stage string, e.g. "bgcfc" = all five stages."""
        mapping = {"b": "blit", "g": "geometric", "c": "color", "f": "filter"}
        stages = []
        seen_color = False
        for ch in flags:
            if ch == "c":
                stages.append("cutout" if seen_color else "color")
                seen_color = True
            elif ch in mapping:
                stages.append(mapping[ch])
            else:
                raise ValueError(f"unknown augmentation flag {ch!r}")
        return AugPipelineConfig(enabled=tuple(stages), p=p)


def hflip(img: np.ndarray) -> np.ndarray:
    return img[..., ::-1].copy()


def rot90(img: np.ndarray, k: int) -> np.ndarray:
    return np.rot90(img, k=k, axes=(-2, -1)).copy()


def translate_int(img: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Integer shift with reflect padding."""
    c, h, w = img.shape
    pad_y, pad_x = abs(dy), abs(dx)
    if pad_y == 0 and pad_x == 0:
        return img.copy()
    padded = np.pad(img, ((0, 0), (pad_y, pad_y), (pad_x, pad_x)), mode="reflect")
    y0 = pad_y - dy
    x0 = pad_x - dx
    return padded[:, y0 : y0 + h, x0 : x0 + w].copy()


def _reflect_index(idx: np.ndarray, n: int) -> np.ndarray:
    period = 2 * n - 2 if n > 1 else 1
    idx = np.mod(idx, period)
    return np.where(idx >= n, period - idx, idx)


def affine_warp(img: np.ndarray, angle_rad: float, scale: float) -> np.ndarray:
    """Rotate+scale about the center, bilinear sampling, reflect borders."""
    c, h, w = img.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ys, xs = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    # inverse map: output pixel -> source location
    cos_a, sin_a = np.cos(angle_rad), np.sin(angle_rad)
    dy, dx = ys - cy, xs - cx
    sy = (cos_a * dy - sin_a * dx) / scale + cy
    sx = (sin_a * dy + cos_a * dx) / scale + cx
    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    ty = (sy - y0).astype(img.dtype)
    tx = (sx - x0).astype(img.dtype)
    out = np.zeros_like(img)
    for dyy in (0, 1):
        wy = (1 - ty) if dyy == 0 else ty
        yy = _reflect_index(y0 + dyy, h)
        for dxx in (0, 1):
            wx = (1 - tx) if dxx == 0 else tx
            xx = _reflect_index(x0 + dxx, w)
            out += img[:, yy, xx] * (wy * wx)[None, :, :]
    return out


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    radius = max(1, int(np.ceil(2.0 * sigma)))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (xs / sigma) ** 2)
    kernel /= kernel.sum()
    kernel = kernel.astype(img.dtype)
    padded = np.pad(img, ((0, 0), (radius, radius), (0, 0)), mode="reflect")
    out = np.zeros_like(img)
    for i, kv in enumerate(kernel):
        out += kv * padded[:, i : i + img.shape[1], :]
    padded = np.pad(out, ((0, 0), (0, 0), (radius, radius)), mode="reflect")
    out = np.zeros_like(img)
    for i, kv in enumerate(kernel):
        out += kv * padded[:, :, i : i + img.shape[2]]
    return out


def cutout(img: np.ndarray, cy: int, cx: int, frac: float) -> np.ndarray:
    c, h, w = img.shape
    hh, hw = int(h * frac / 2), int(w * frac / 2)
    out = img.copy()
    y0, y1 = max(0, cy - hh), min(h, cy + hh)
    x0, x1 = max(0, cx - hw), min(w, cx + hw)
    out[:, y0:y1, x0:x1] = 0.0
    return out


def _apply_blit(img, cfg, rng):
    if rng.random() < 0.5:
        img = hflip(img)
    k = int(rng.integers(0, 4))
    if k:
        img = rot90(img, k)
    limit = max(1, int(img.shape[-1] * cfg.translate_frac))
    dy, dx = int(rng.integers(-limit, limit + 1)), int(rng.integers(-limit, limit + 1))
    return translate_int(img, dy, dx)


def _apply_geometric(img, cfg, rng):
    angle = np.deg2rad(rng.uniform(-cfg.max_rotate_deg, cfg.max_rotate_deg))
    lo, hi = cfg.scale_range
    scale = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    return affine_warp(img, angle, scale)


def _apply_color(img, cfg, rng):
    b = rng.uniform(-cfg.brightness, cfg.brightness)
    lo, hi = cfg.contrast_range
    contrast = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    out = img * contrast + b
    if img.shape[0] == 3:
        sat = float(np.exp(rng.uniform(np.log(0.5), np.log(2.0))))
        lum = out.mean(axis=0, keepdims=True)
        out = lum + (out - lum) * sat
    return np.clip(out, -1.0, 1.0).astype(img.dtype)


def _apply_filter(img, cfg, rng):
    sigma = rng.uniform(*cfg.blur_sigma)
    return gaussian_blur(img, sigma)


def _apply_cutout(img, cfg, rng):
    h, w = img.shape[-2:]
    cy = int(rng.integers(0, h))
    cx = int(rng.integers(0, w))
    return cutout(img, cy, cx, cfg.cutout_frac)


_STAGE_FNS = {
    "blit": _apply_blit,
    "geometric": _apply_geometric,
    "color": _apply_color,
    "filter": _apply_filter,
    "cutout": _apply_cutout,
}


def apply_augmentation(
    batch: np.ndarray, cfg: AugPipelineConfig, rng: np.random.Generator
) -> np.ndarray:
    """Augment an N x C x H x W batch; pure given the rng, identity at p=0."""
    if cfg.p == 0.0 or not cfg.enabled:
        return batch
    out = np.empty_like(batch)
    for i in range(batch.shape[0]):
        img = batch[i]
        for stage in cfg.enabled:
            if rng.random() < cfg.p:
                img = _STAGE_FNS[stage](img, cfg, rng)
        out[i] = img
    return out
