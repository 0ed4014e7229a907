"""Style-based generator: mapping network, truncation, modulated synthesis."""

from __future__ import annotations

import numpy as np

from ..grad import Module, ops
from ..grad.rng import split_rng
from ..grad.tensor import Tensor, no_grad
from .layers import Linear, modulated_conv, normal_init, pixel_norm
from .spec import ModelSpec


class TruncationError(RuntimeError):
    pass


class MappingNetwork(Module):
    """z -> w MLP with a running estimate of the mean latent."""

    def __init__(self, rng, z_dim: int, w_dim: int, depth: int = 4):
        super().__init__()
        self.z_dim = z_dim
        self.w_dim = w_dim
        self.layers = []
        prev = z_dim
        for i in range(depth):
            self.layers.append(self.add_child(f"fc{i}", Linear(rng, prev, w_dim, init="he")))
            prev = w_dim
        self.w_mean = self.add_param("w_mean", np.zeros(w_dim, dtype=np.float32), trainable=False)
        self.w_mean_count = self.add_param(
            "w_mean_count", np.zeros(1, dtype=np.float32), trainable=False
        )

    def forward(self, z: Tensor) -> Tensor:
        h = pixel_norm(z)
        for layer in self.layers:
            h = ops.leaky_relu(layer(h), 0.2)
        return h

    @property
    def w_mean_estimated(self) -> bool:
        return float(self.w_mean_count.data[0]) > 0

    def estimate_w_mean(self, seed: int, n_samples: int = 4096) -> np.ndarray:
        """Mean mapping output over fresh z draws; stored for truncation."""
        rng = split_rng(seed, 4096)
        total = np.zeros(self.w_dim, dtype=np.float64)
        batch = 256
        done = 0
        with no_grad():
            while done < n_samples:
                k = min(batch, n_samples - done)
                z = Tensor(rng.standard_normal((k, self.z_dim)).astype(np.float32))
                total += self.forward(z).data.sum(axis=0)
                done += k
        mean = (total / n_samples).astype(np.float32)
        self.w_mean.set_data(mean)
        self.w_mean_count.set_data(np.array([n_samples], dtype=np.float32))
        return mean


def map_latent(net: MappingNetwork, z: Tensor, psi: float = 1.0) -> Tensor:
    """Truncation: w = w_mean + psi * (mlp(z) - w_mean)."""
    w = net(z)
    if psi == 1.0:
        return w
    if not net.w_mean_estimated:
        raise TruncationError("truncation requires an estimated mean latent")
    w_bar = Tensor(net.w_mean.data[None, :])
    return ops.add(w_bar, ops.mul(ops.sub(w, w_bar), float(psi)))


class StyleBlock(Module):
    """Affine style + modulated 3x3 conv with demodulation."""

    def __init__(self, rng, w_dim: int, in_ch: int, out_ch: int):
        super().__init__()
        self.affine = self.add_child("affine", Linear(rng, w_dim, in_ch, bias_value=1.0))
        self.weight = self.add_param("weight", normal_init(rng, (out_ch, in_ch, 3, 3)))
        self.bias = self.add_param("bias", np.zeros(out_ch, dtype=np.float32))

    def forward(self, x: Tensor, w: Tensor) -> Tensor:
        style = self.affine(w)
        h = modulated_conv(x, self.weight.tensor, style, demodulate=True, pad=1)
        return ops.add(h, ops.reshape(self.bias.tensor, (1, -1, 1, 1)))


class StyleGenerator(Module):
    """Learned 4x4 constant refined by upsample + modulated conv blocks."""

    def __init__(self, rng, spec: ModelSpec):
        super().__init__()
        self.spec = spec
        steps = int(np.log2(spec.resolution)) - 2
        cap = spec.base_channels * 8
        chans = [min(spec.base_channels * 2 ** (steps - i), cap) for i in range(steps + 1)]
        self.mapping = self.add_child(
            "mapping", MappingNetwork(rng, spec.z_dim, spec.w_dim, spec.mapping_depth)
        )
        self.const = self.add_param(
            "const", rng.standard_normal((1, chans[0], 4, 4)).astype(np.float32)
        )
        self.blocks = []
        for i in range(steps):
            self.blocks.append(
                self.add_child(f"block{i}", StyleBlock(rng, spec.w_dim, chans[i], chans[i + 1]))
            )
        self.to_img = self.add_child("to_img", StyleBlock(rng, spec.w_dim, chans[-1], spec.channels))

    def synthesize(self, w: Tensor, return_pre: bool = False):
        n = w.shape[0]
        h = ops.broadcast_to(self.const.tensor, (n,) + self.const.shape[1:])
        for blk in self.blocks:
            h = ops.upsample_nearest2x(h)
            h = ops.leaky_relu(blk(h, w), 0.2)
        pre = self.to_img(h, w)
        out = ops.tanh(pre)
        return (out, pre) if return_pre else out

    def forward(self, z: Tensor, psi: float = 1.0, return_pre: bool = False):
        w = map_latent(self.mapping, z, psi)
        return self.synthesize(w, return_pre=return_pre)
