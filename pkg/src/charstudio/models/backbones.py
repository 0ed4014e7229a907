"""DC-style generator and discriminator backbones (dcgan/wgan/gan_qp/biggan_lite)."""

from __future__ import annotations

import numpy as np

from ..grad import Module, ops
from ..grad.tensor import Tensor
from .layers import BatchNorm2d, ConditionalBatchNorm2d, Conv2d, Embedding, InstanceNorm2d, Linear
from .spec import ModelSpec


def _channel_plan(spec: ModelSpec) -> list[int]:
    """Channels per 4x4..res block, widest at 4x4, capped at 8x base."""
    steps = int(np.log2(spec.resolution)) - 2
    return [min(spec.base_channels * 2 ** (steps - i), spec.base_channels * 8) for i in range(steps + 1)]


class DCGenerator(Module):
    """Project z to 4x4 then upsample-conv blocks to the target resolution."""

    def __init__(self, rng, spec: ModelSpec):
        super().__init__()
        self.spec = spec
        chans = _channel_plan(spec)
        self.chans = chans
        in_dim = spec.z_dim
        if spec.conditioning == "embed_concat":
            self.embed = self.add_child("embed", Embedding(rng, spec.num_classes, spec.embed_dim))
            in_dim += spec.embed_dim
        self.project = self.add_child("project", Linear(rng, in_dim, chans[0] * 16))
        self.blocks: list[dict] = []
        for i in range(len(chans) - 1):
            conv = self.add_child(f"block{i}/conv", Conv2d(rng, chans[i], chans[i + 1], 3, pad=1))
            if spec.conditioning == "cond_batchnorm":
                norm = self.add_child(
                    f"block{i}/cbn", ConditionalBatchNorm2d(rng, chans[i + 1], spec.num_classes)
                )
            else:
                norm = self.add_child(f"block{i}/bn", BatchNorm2d(chans[i + 1]))
            self.blocks.append({"conv": conv, "norm": norm})
        self.to_img = self.add_child("to_img", Conv2d(rng, chans[-1], spec.channels, 3, pad=1))

    def forward(self, z: Tensor, class_idx=None, return_pre: bool = False):
        spec = self.spec
        if spec.conditional and class_idx is None:
            raise ValueError("conditional generator requires class indices")
        if not spec.conditional and class_idx is not None:
            raise ValueError("unconditional generator got class indices")
        h = z
        if spec.conditioning == "embed_concat":
            h = ops.concat([z, self.embed(class_idx)], axis=1)
        h = self.project(h)
        h = ops.reshape(h, (z.shape[0], self.chans[0], 4, 4))
        h = ops.relu(h)
        for blk in self.blocks:
            h = ops.upsample_nearest2x(h)
            h = blk["conv"](h)
            if isinstance(blk["norm"], ConditionalBatchNorm2d):
                h = blk["norm"](h, class_idx)
            else:
                h = blk["norm"](h)
            h = ops.relu(h)
        pre = self.to_img(h)
        out = ops.tanh(pre)
        return (out, pre) if return_pre else out


class DCDiscriminator(Module):
    """Stride-2 conv stack to a scalar score (critic form: no squash)."""

    def __init__(self, rng, spec: ModelSpec, norm: str = "batch", spectral: bool = False):
        super().__init__()
        self.spec = spec
        chans = list(reversed(_channel_plan(spec)))
        in_ch = spec.channels
        if spec.conditioning == "embed_concat":
            self.embed = self.add_child("embed", Embedding(rng, spec.num_classes, spec.embed_dim))
            in_ch += spec.embed_dim
        self.convs: list[dict] = []
        prev = in_ch
        for i, ch in enumerate(chans[1:]):
            conv = self.add_child(
                f"block{i}/conv", Conv2d(rng, prev, ch, 4, stride=2, pad=1, spectral_norm=spectral)
            )
            use_norm = norm != "none" and i > 0
            norm_layer = None
            if use_norm:
                norm_layer = self.add_child(
                    f"block{i}/norm",
                    BatchNorm2d(ch) if norm == "batch" else InstanceNorm2d(ch),
                )
            self.convs.append({"conv": conv, "norm": norm_layer})
            prev = ch
        self.head = self.add_child("head", Conv2d(rng, prev, 1, 4, spectral_norm=spectral))
        if spec.conditioning == "cond_batchnorm":
            # projection conditioning: score += <class embedding, pooled features>
            self.proj_embed = self.add_child("proj_embed", Embedding(rng, spec.num_classes, prev))

    def forward(self, x: Tensor, class_idx=None) -> Tensor:
        spec = self.spec
        if spec.conditional and class_idx is None:
            raise ValueError("conditional discriminator requires class indices")
        if not spec.conditional and class_idx is not None:
            raise ValueError("unconditional discriminator got class indices")
        h = x
        if spec.conditioning == "embed_concat":
            n, _, hh, ww = x.shape
            e = ops.reshape(self.embed(class_idx), (n, -1, 1, 1))
            h = ops.concat([x, ops.broadcast_to(e, (n, e.shape[1], hh, ww))], axis=1)
        for blk in self.convs:
            h = blk["conv"](h)
            if blk["norm"] is not None:
                h = blk["norm"](h)
            h = ops.leaky_relu(h, 0.2)
        score = ops.reshape(self.head(h), (x.shape[0],))
        if spec.conditioning == "cond_batchnorm":
            pooled = ops.mean(h, axis=(2, 3))  # N x C features at 4x4
            proj = ops.sum(ops.mul(pooled, self.proj_embed(class_idx)), axis=1)
            score = ops.add(score, proj)
        return score


class MLPGenerator(Module):
    """Tiny fully-connected generator for low-dimensional benchmarks."""

    def __init__(self, rng, z_dim: int, out_dim: int, hidden: int = 64, depth: int = 3):
        super().__init__()
        self.layers = []
        prev = z_dim
        for i in range(depth):
            self.layers.append(self.add_child(f"fc{i}", Linear(rng, prev, hidden, init="he")))
            prev = hidden
        self.out = self.add_child("out", Linear(rng, prev, out_dim, init="he"))

    def forward(self, z: Tensor) -> Tensor:
        h = z
        for layer in self.layers:
            h = ops.leaky_relu(layer(h), 0.2)
        return self.out(h)


class MLPCritic(Module):
    def __init__(self, rng, in_dim: int, hidden: int = 64, depth: int = 3):
        super().__init__()
        self.layers = []
        prev = in_dim
        for i in range(depth):
            self.layers.append(self.add_child(f"fc{i}", Linear(rng, prev, hidden, init="he")))
            prev = hidden
        self.out = self.add_child("out", Linear(rng, prev, 1, init="he"))

    def forward(self, x: Tensor) -> Tensor:
        h = x
        for layer in self.layers:
            h = ops.leaky_relu(layer(h), 0.2)
        return ops.reshape(self.out(h), (x.shape[0],))
