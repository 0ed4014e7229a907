"""Feature extractors for FID: a trained desk classifier and an exact-test pool."""

from __future__ import annotations

import hashlib
from typing import Protocol

import numpy as np

from ..data.loader import BatchSource
from ..data.manifest import DatasetManifest
from ..data.resize import resize_bicubic
from ..grad import Module, Tensor, adam_state, backward_map, no_grad, ops, optimizer_step
from ..grad.rng import split_rng
from ..models.layers import Conv2d


class FeatureExtractor(Protocol):
    id: str
    dim: int
    resolution: int
    channels: int

    def features(self, images: np.ndarray) -> np.ndarray: ...


def _preprocess(images: np.ndarray, resolution: int, channels: int) -> np.ndarray:
    x = np.asarray(images, dtype=np.float32)
    if x.shape[1] != channels:
        if x.shape[1] == 1 and channels == 3:
            x = np.repeat(x, 3, axis=1)
        elif x.shape[1] == 3 and channels == 1:
            x = x.mean(axis=1, keepdims=True)
        else:
            raise ValueError(f"cannot adapt {x.shape[1]} channels to {channels}")
    if x.shape[-1] != resolution:
        x = resize_bicubic(x, resolution).astype(np.float32)
    return np.clip(x, -1.0, 1.0)


class IdentityPoolExtractor:
    """Average-pool to 8x8 and flatten; exact values for numeric tests."""

    def __init__(self, resolution: int = 64, channels: int = 1):
        self.resolution = resolution
        self.channels = channels
        self.dim = 64 * channels
        self.id = f"identity-pool-8x8-c{channels}-r{resolution}"

    def features(self, images: np.ndarray) -> np.ndarray:
        x = _preprocess(images, self.resolution, self.channels)
        n, c, h, w = x.shape
        f = x.reshape(n, c, 8, h // 8, 8, w // 8).mean(axis=(3, 5))
        return f.reshape(n, -1).astype(np.float64)


class DeskExtractorNet(Module):
    """Three stride-2 convs to a pooled 64-d embedding plus a class head."""

    FEATURE_DIM = 64

    def __init__(self, rng, channels: int, num_classes: int):
        super().__init__()
        self.c1 = self.add_child("c1", Conv2d(rng, channels, 16, 4, stride=2, pad=1))
        self.c2 = self.add_child("c2", Conv2d(rng, 16, 32, 4, stride=2, pad=1))
        self.c3 = self.add_child("c3", Conv2d(rng, 32, self.FEATURE_DIM, 4, stride=2, pad=1))
        self.head = self.add_child("head", Conv2d(rng, self.FEATURE_DIM, num_classes, 1))

    def embed(self, x: Tensor) -> Tensor:
        h = ops.leaky_relu(self.c1(x), 0.2)
        h = ops.leaky_relu(self.c2(h), 0.2)
        h = ops.leaky_relu(self.c3(h), 0.2)
        return ops.mean(h, axis=(2, 3))  # N x 64

    def logits(self, x: Tensor) -> Tensor:
        f = self.embed(x)
        n, d = f.shape
        return ops.reshape(self.head(ops.reshape(f, (n, d, 1, 1))), (n, -1))


def _cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    shift = Tensor(logits.data.max(axis=1, keepdims=True))  # constant, stabilizes exp
    z = ops.sub(logits, shift)
    log_norm = ops.log(ops.sum(ops.exp(z), axis=1))
    picked = z[np.arange(labels.shape[0]), labels]
    return ops.mean(ops.sub(log_norm, picked))


class DeskExtractor:
    """Frozen conv classifier embedding, id-stamped by its weight digest.

    FID reports are only comparable within a single extractor id.
    """

    def __init__(self, net: DeskExtractorNet, resolution: int, channels: int):
        self.net = net
        self.net.eval()
        for _, p in net.named_parameters():
            p.trainable = False
            p.tensor.requires_grad = False
        self.resolution = resolution
        self.channels = channels
        self.dim = DeskExtractorNet.FEATURE_DIM
        digest = hashlib.sha256()
        for name, p in sorted(net.named_parameters()):
            digest.update(name.encode())
            digest.update(np.ascontiguousarray(p.data).tobytes())
        self.id = f"desk-cnn-{digest.hexdigest()[:8]}"

    def features(self, images: np.ndarray) -> np.ndarray:
        x = _preprocess(images, self.resolution, self.channels)
        out = []
        with no_grad():
            for start in range(0, x.shape[0], 64):
                out.append(self.net.embed(Tensor(x[start : start + 64])).data)
        return np.concatenate(out, axis=0).astype(np.float64)

    def embed_tensor(self, images: Tensor) -> Tensor:
        """Differentiable embedding (used as the projection feature space)."""
        return self.net.embed(images)


def train_desk_extractor(
    manifest: DatasetManifest,
    epochs: int = 2,
    batch_size: int = 32,
    lr: float = 2e-3,
    seed: int = 0,
) -> DeskExtractor:
    """Fit the classifier once on the real set, then freeze and stamp it."""
    channels = 1 if manifest.kind == "silhouette" else 3
    num_classes = max(2, len(manifest.classes))
    net = DeskExtractorNet(split_rng(seed, 31), channels, num_classes)
    params = net.param_dict()
    state = adam_state(lr=lr, beta1=0.9)
    source = BatchSource(manifest)
    for epoch in range(epochs):
        for imgs, labels in source.batches(batch_size, seed, epoch):
            logits = net.logits(Tensor(imgs))
            loss = _cross_entropy(logits, labels)
            grads = backward_map(loss, params)
            optimizer_step(params, {k: g.data for k, g in grads.items()}, state)
    return DeskExtractor(net, manifest.resolution, channels)


def extract_features(images: np.ndarray, extractor: FeatureExtractor) -> np.ndarray:
    """N x d feature matrix; deterministic row per image."""
    images = np.asarray(images)
    if images.ndim != 4 or images.shape[0] == 0:
        raise ValueError("extract_features needs a non-empty N x C x H x W batch")
    return extractor.features(images)
