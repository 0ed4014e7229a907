"""Image-to-image translators: U-Net generator and patch discriminator."""

from __future__ import annotations

import numpy as np

from ..grad import Module, ops
from ..grad.tensor import Tensor
from .layers import Conv2d, InstanceNorm2d
from .spec import ModelSpec


class UNetTranslator(Module):
    """Encoder-decoder with skip connections; output spatial dims equal input."""

    def __init__(self, rng, spec: ModelSpec, in_ch: int | None = None, out_ch: int | None = None):
        super().__init__()
        self.spec = spec
        in_ch = spec.source_channels if in_ch is None else in_ch
        out_ch = spec.channels if out_ch is None else out_ch
        depth = int(np.log2(spec.resolution)) - 2  # down to 4x4
        cap = spec.base_channels * 8
        enc_ch = [min(spec.base_channels * 2**i, cap) for i in range(depth)]
        self.enc = []
        prev = in_ch
        for i, ch in enumerate(enc_ch):
            conv = self.add_child(f"enc{i}/conv", Conv2d(rng, prev, ch, 4, stride=2, pad=1))
            norm = self.add_child(f"enc{i}/norm", InstanceNorm2d(ch)) if i > 0 else None
            self.enc.append({"conv": conv, "norm": norm})
            prev = ch
        self.dec = []
        for i in range(depth - 1, 0, -1):
            skip_ch = enc_ch[i - 1]
            conv = self.add_child(
                f"dec{i}/conv", Conv2d(rng, prev, skip_ch, 3, stride=1, pad=1)
            )
            norm = self.add_child(f"dec{i}/norm", InstanceNorm2d(skip_ch))
            self.dec.append({"conv": conv, "norm": norm, "skip": i - 1})
            prev = skip_ch * 2  # after concat with the skip
        self.head = self.add_child("head", Conv2d(rng, prev, out_ch, 3, stride=1, pad=1))

    def forward(self, x: Tensor) -> Tensor:
        skips = []
        h = x
        for blk in self.enc:
            h = blk["conv"](h)
            if blk["norm"] is not None:
                h = blk["norm"](h)
            h = ops.leaky_relu(h, 0.2)
            skips.append(h)
        for blk in self.dec:
            h = ops.upsample_nearest2x(h)
            h = blk["conv"](h)
            h = blk["norm"](h)
            h = ops.relu(h)
            h = ops.concat([h, skips[blk["skip"]]], axis=1)
        h = ops.upsample_nearest2x(h)
        return ops.tanh(self.head(h))


class PatchDiscriminator(Module):
    """70-pixel receptive field score map: three stride-2 then two stride-1 4x4 convs."""

    def __init__(self, rng, spec: ModelSpec, in_ch: int):
        super().__init__()
        b = spec.base_channels
        plan = [
            (b, 2, False),
            (2 * b, 2, True),
            (4 * b, 2, True),
            (8 * b, 1, True),
        ]
        self.blocks = []
        prev = in_ch
        for i, (ch, stride, use_norm) in enumerate(plan):
            conv = self.add_child(f"block{i}/conv", Conv2d(rng, prev, ch, 4, stride=stride, pad=1))
            norm = self.add_child(f"block{i}/norm", InstanceNorm2d(ch)) if use_norm else None
            self.blocks.append({"conv": conv, "norm": norm})
            prev = ch
        self.head = self.add_child("head", Conv2d(rng, prev, 1, 4, stride=1, pad=1))

    def forward(self, x: Tensor) -> Tensor:
        h = x
        for blk in self.blocks:
            h = blk["conv"](h)
            if blk["norm"] is not None:
                h = blk["norm"](h)
            h = ops.leaky_relu(h, 0.2)
        return self.head(h)  # N x 1 x h' x w' score map

    @staticmethod
    def receptive_field() -> int:
        """Bottom-up recurrence rf <- rf*stride + (k - stride) over the stack."""
        rf = 1
        for k, s in reversed([(4, 2), (4, 2), (4, 2), (4, 1), (4, 1)]):
            rf = rf * s + (k - s)
        return rf
