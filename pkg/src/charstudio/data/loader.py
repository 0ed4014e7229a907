"""Batch loading from manifests with deterministic per-epoch shuffling."""

from __future__ import annotations

from typing import Iterator, Optional

import numpy as np

from ..grad.rng import split_rng
from . import imageio
from .manifest import DatasetManifest
from .resize import resize_bicubic
from .silhouette import binarize_silhouette


def _channels_for(kind: str) -> int:
    return 1 if kind == "silhouette" else 3


def load_sample(manifest: DatasetManifest, index: int) -> np.ndarray:
    rec = manifest.records[index]
    img = imageio.load_image(rec.path, channels=_channels_for(manifest.kind))
    if img.shape[-1] != manifest.resolution:
        img = resize_bicubic(img, manifest.resolution).astype(np.float32)
    return img


def load_pair(manifest: DatasetManifest, index: int) -> tuple[np.ndarray, np.ndarray]:
    """(silhouette 1ch, colored 3ch) for a paired manifest record."""
    rec = manifest.records[index]
    colored = imageio.load_image(rec.path, channels=3)
    sil = imageio.load_image(rec.pair_path, channels=1)
    if colored.shape[-1] != manifest.resolution:
        colored = resize_bicubic(colored, manifest.resolution).astype(np.float32)
    if sil.shape[-1] != manifest.resolution:
        sil = resize_bicubic(sil, manifest.resolution).astype(np.float32)
        sil = binarize_silhouette(np.repeat(sil, 3, axis=0))
    return sil, colored


class BatchSource:
    """Decoded-image cache plus deterministic epoch iteration."""

    def __init__(self, manifest: DatasetManifest, cache: bool = True):
        self.manifest = manifest
        self.paired = manifest.kind == "paired"
        self._cache: Optional[list] = [None] * len(manifest) if cache else None

    def _get(self, i: int):
        if self._cache is not None and self._cache[i] is not None:
            return self._cache[i]
        item = load_pair(self.manifest, i) if self.paired else load_sample(self.manifest, i)
        if self._cache is not None:
            self._cache[i] = item
        return item

    def gather(self, indices) -> tuple[np.ndarray, ...]:
        labels = np.array(
            [self.manifest.records[i].class_index for i in indices], dtype=np.int64
        )
        if self.paired:
            sils, cols = zip(*(self._get(i) for i in indices))
            return np.stack(sils), np.stack(cols), labels
        imgs = np.stack([self._get(i) for i in indices])
        return imgs, labels

    def batches(
        self, batch_size: int, seed: int, epoch: int, drop_last: bool = True
    ) -> Iterator[tuple[np.ndarray, ...]]:
        """Fixed shuffle derived from (seed, epoch); order is reproducible."""
        n = len(self.manifest)
        perm = split_rng(seed, epoch).permutation(n)
        end = (n // batch_size) * batch_size if drop_last else n
        for start in range(0, end, batch_size):
            yield self.gather(perm[start : start + batch_size])

    def epoch_steps(self, batch_size: int) -> int:
        return max(1, len(self.manifest) // batch_size)
