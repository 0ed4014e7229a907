"""Procedural character-like shape sets for desk-scale runs and tests.

Three shape families with distinct outlines, so class is inferable from the
silhouette alone, plus a deterministic per-class fill for paired coloring
exercises.  Everything derives from (seed, index) — regenerable anywhere.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from ..grad.rng import split_rng
from . import imageio
from .manifest import DatasetManifest, SampleRecord

CLASSES = ("Round", "Spiky", "Slim")

# fill RGB per class, in [0,255]
CLASS_COLORS = {
    0: (205, 92, 60),   # warm rust
    1: (70, 130, 96),   # green
    2: (80, 96, 185),   # blue
}


def _draw_round(d: ImageDraw.ImageDraw, res: int, rng: np.random.Generator):
    cx = res / 2 + rng.uniform(-res * 0.05, res * 0.05)
    cy = res * 0.58 + rng.uniform(-res * 0.04, res * 0.04)
    rx = res * rng.uniform(0.18, 0.26)
    ry = res * rng.uniform(0.22, 0.3)
    d.ellipse([cx - rx, cy - ry, cx + rx, cy + ry], fill=255)
    hr = rx * rng.uniform(0.45, 0.65)
    hy = cy - ry - hr * 0.6
    d.ellipse([cx - hr, hy - hr, cx + hr, hy + hr], fill=255)


def _draw_spiky(d: ImageDraw.ImageDraw, res: int, rng: np.random.Generator):
    cx, cy = res / 2, res * 0.55
    n_spikes = int(rng.integers(5, 9))
    r_outer = res * rng.uniform(0.3, 0.42)
    r_inner = r_outer * rng.uniform(0.4, 0.55)
    phase = rng.uniform(0, np.pi)
    pts = []
    for k in range(2 * n_spikes):
        r = r_outer if k % 2 == 0 else r_inner
        a = phase + np.pi * k / n_spikes
        pts.append((cx + r * np.cos(a), cy + r * np.sin(a)))
    d.polygon(pts, fill=255)


def _draw_slim(d: ImageDraw.ImageDraw, res: int, rng: np.random.Generator):
    cx = res / 2 + rng.uniform(-res * 0.06, res * 0.06)
    w = res * rng.uniform(0.08, 0.14)
    top = res * rng.uniform(0.12, 0.2)
    bottom = res * rng.uniform(0.82, 0.92)
    d.rectangle([cx - w, top, cx + w, bottom], fill=255)
    aw = w * rng.uniform(2.2, 3.2)
    ay = top + (bottom - top) * rng.uniform(0.2, 0.35)
    d.rectangle([cx - aw, ay - w * 0.6, cx + aw, ay + w * 0.6], fill=255)
    hr = w * rng.uniform(1.1, 1.5)
    d.ellipse([cx - hr, top - 2 * hr, cx + hr, top], fill=255)


_DRAWERS = (_draw_round, _draw_spiky, _draw_slim)


def shape_mask(class_index: int, res: int, seed: int, index: int) -> np.ndarray:
    """H x W boolean foreground mask for one sample."""
    rng = split_rng(seed, class_index * 1_000_003 + index)
    im = Image.new("L", (res, res), 0)
    d = ImageDraw.Draw(im)
    _DRAWERS[class_index](d, res, rng)
    return np.asarray(im) >= 128


def silhouette_image(class_index: int, res: int, seed: int, index: int) -> np.ndarray:
    """1 x H x W in {-1,+1}: dark figure (-1) on light ground (+1)."""
    mask = shape_mask(class_index, res, seed, index)
    return np.where(mask, -1.0, 1.0).astype(np.float32)[None]


def colored_image(class_index: int, res: int, seed: int, index: int) -> np.ndarray:
    """3 x H x W in [-1,1]: class-colored fill on white ground."""
    mask = shape_mask(class_index, res, seed, index)
    rgb = np.array(CLASS_COLORS[class_index], dtype=np.float32) / 255.0
    out = np.ones((3, res, res), dtype=np.float32)
    for c in range(3):
        out[c][mask] = rgb[c]
    return imageio.from_unit(out)


def write_dataset(
    root: str | Path,
    per_class: int,
    res: int = 64,
    seed: int = 0,
    colored: bool = False,
) -> DatasetManifest:
    """Materialize PNGs under root/<ClassName>/ and return the manifest."""
    root = Path(root)
    records = []
    for ci, cname in enumerate(CLASSES):
        cdir = root / cname
        cdir.mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            img = (
                colored_image(ci, res, seed, i)
                if colored
                else silhouette_image(ci, res, seed, i)
            )
            path = cdir / f"{cname.lower()}_{i:05d}.png"
            digest = imageio.save_png(img, path)
            records.append(SampleRecord(str(path), ci, digest))
    kind = "colored" if colored else "silhouette"
    return DatasetManifest(list(CLASSES), res, kind, records)


def paired_batch(
    n: int, res: int, seed: int, epoch: int = 0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """In-memory paired (silhouette, colored, label) batch without files."""
    rng = split_rng(seed, 900_000 + epoch)
    classes = rng.integers(0, len(CLASSES), size=n)
    idx = rng.integers(0, 1_000_000, size=n)
    sils = np.stack([silhouette_image(int(c), res, seed, int(i)) for c, i in zip(classes, idx)])
    cols = np.stack([colored_image(int(c), res, seed, int(i)) for c, i in zip(classes, idx)])
    return sils, cols, classes.astype(np.int64)
