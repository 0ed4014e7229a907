"""Silhouette extraction from colored images."""

from __future__ import annotations

import numpy as np

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float32)


def luminance(img: np.ndarray) -> np.ndarray:
    """Luminance in [0,1] from a C x H x W image in [-1,1]."""
    unit = (np.asarray(img) + 1.0) * 0.5
    if unit.shape[0] == 1:
        return unit[0]
    return np.tensordot(LUMA_WEIGHTS, unit, axes=(0, 0))


def binarize_silhouette(img: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Threshold luminance into a 1-channel {-1,+1} map.

    Luminance >= threshold maps to +1 (ties included); below maps to -1.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0,1)")
    lum = luminance(img)
    out = np.where(lum >= threshold, 1.0, -1.0).astype(np.float32)
    return out[None, :, :]
