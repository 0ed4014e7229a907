"""Building-block layers shared by the model families."""

from __future__ import annotations

import numpy as np

from ..grad import Module, ops
from ..grad.tensor import Tensor, no_grad


def normal_init(rng: np.random.Generator, shape, std: float = 0.02, dtype=np.float32):
    return (rng.standard_normal(shape) * std).astype(dtype)


def he_init(rng: np.random.Generator, shape, fan_in: int, dtype=np.float32):
    return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)


class Linear(Module):
    def __init__(self, rng, in_dim: int, out_dim: int, init: str = "normal", bias_value: float = 0.0):
        super().__init__()
        if init == "he":
            w = he_init(rng, (in_dim, out_dim), fan_in=in_dim)
        else:
            w = normal_init(rng, (in_dim, out_dim))
        self.weight = self.add_param("weight", w)
        self.bias = self.add_param("bias", np.full(out_dim, bias_value, dtype=np.float32))

    def forward(self, x: Tensor) -> Tensor:
        return ops.add(ops.matmul(x, self.weight.tensor), self.bias.tensor)


class Conv2d(Module):
    """3x3/4x4/1x1 convolution with optional spectral normalization."""

    def __init__(
        self,
        rng,
        in_ch: int,
        out_ch: int,
        kernel: int,
        stride: int = 1,
        pad: int = 0,
        spectral_norm: bool = False,
    ):
        super().__init__()
        self.stride = stride
        self.pad = pad
        self.sn = spectral_norm
        self.weight = self.add_param(
            "weight", normal_init(rng, (out_ch, in_ch, kernel, kernel))
        )
        self.bias = self.add_param("bias", np.zeros(out_ch, dtype=np.float32))
        if spectral_norm:
            u0 = rng.standard_normal(out_ch).astype(np.float32)
            u0 /= np.linalg.norm(u0) + 1e-12
            self.u = self.add_param("sn_u", u0, trainable=False)

    def _weight_tensor(self) -> Tensor:
        w = self.weight.tensor
        if not self.sn:
            return w
        out_ch = w.shape[0]
        with no_grad():
            mat = w.data.reshape(out_ch, -1)
            u = self.u.data
            v = mat.T @ u
            v /= np.linalg.norm(v) + 1e-12
            u_new = mat @ v
            u_new /= np.linalg.norm(u_new) + 1e-12
            if self.training:
                self.u.set_data(u_new.astype(w.data.dtype))
        # sigma differentiable in w, u/v held constant (power-iteration estimate)
        w2 = ops.reshape(w, (out_ch, -1))
        sigma = ops.sum(ops.mul(Tensor(u_new[:, None]), ops.matmul(w2, Tensor(v[:, None]))))
        return ops.div(w, ops.add(sigma, 1e-12))

    def forward(self, x: Tensor) -> Tensor:
        return ops.conv2d(
            x, self._weight_tensor(), bias=self.bias.tensor, stride=self.stride, pad=self.pad
        )


class Embedding(Module):
    def __init__(self, rng, num: int, dim: int, std: float = 0.02):
        super().__init__()
        self.table = self.add_param("table", normal_init(rng, (num, dim), std=std))

    def forward(self, indices) -> Tensor:
        return ops.embedding(self.table.tensor, indices)


class BatchNorm2d(Module):
    def __init__(self, channels: int, momentum: float = 0.1, eps: float = 1e-5):
        super().__init__()
        self.eps = eps
        self.momentum = momentum
        self.gamma = self.add_param("gamma", np.ones(channels, dtype=np.float32))
        self.beta = self.add_param("beta", np.zeros(channels, dtype=np.float32))
        self.running_mean = self.add_param(
            "running_mean", np.zeros(channels, dtype=np.float32), trainable=False
        )
        self.running_var = self.add_param(
            "running_var", np.ones(channels, dtype=np.float32), trainable=False
        )

    def _stats(self, x: Tensor) -> tuple[Tensor, Tensor]:
        if self.training:
            mu = ops.mean(x, axis=(0, 2, 3), keepdims=True)
            centered = ops.sub(x, mu)
            var = ops.mean(ops.mul(centered, centered), axis=(0, 2, 3), keepdims=True)
            m = self.momentum
            self.running_mean.set_data((1 - m) * self.running_mean.data + m * mu.data.reshape(-1))
            self.running_var.set_data((1 - m) * self.running_var.data + m * var.data.reshape(-1))
            return mu, var
        shape = (1, -1, 1, 1)
        return (
            Tensor(self.running_mean.data.reshape(shape)),
            Tensor(self.running_var.data.reshape(shape)),
        )

    def forward(self, x: Tensor, gamma: Tensor | None = None, beta: Tensor | None = None) -> Tensor:
        mu, var = self._stats(x)
        xn = ops.div(ops.sub(x, mu), ops.sqrt(ops.add(var, self.eps)))
        g = gamma if gamma is not None else ops.reshape(self.gamma.tensor, (1, -1, 1, 1))
        b = beta if beta is not None else ops.reshape(self.beta.tensor, (1, -1, 1, 1))
        return ops.add(ops.mul(xn, g), b)


class ConditionalBatchNorm2d(Module):
    """Batch norm whose affine terms come from a class embedding."""

    def __init__(self, rng, channels: int, num_classes: int):
        super().__init__()
        self.bn = self.add_child("bn", BatchNorm2d(channels))
        # the shared gamma/beta stay at identity; class embeddings modulate them
        self.bn.gamma.trainable = False
        self.bn.beta.trainable = False
        self.bn.gamma.tensor.requires_grad = False
        self.bn.beta.tensor.requires_grad = False
        self.gamma_embed = self.add_child("gamma_embed", Embedding(rng, num_classes, channels))
        self.beta_embed = self.add_child("beta_embed", Embedding(rng, num_classes, channels))

    def forward(self, x: Tensor, class_idx) -> Tensor:
        n = x.shape[0]
        g = ops.reshape(ops.add(self.gamma_embed(class_idx), 1.0), (n, -1, 1, 1))
        b = ops.reshape(self.beta_embed(class_idx), (n, -1, 1, 1))
        return self.bn.forward(x, gamma=g, beta=b)


class InstanceNorm2d(Module):
    def __init__(self, channels: int, eps: float = 1e-5, affine: bool = True):
        super().__init__()
        self.eps = eps
        self.affine = affine
        if affine:
            self.gamma = self.add_param("gamma", np.ones(channels, dtype=np.float32))
            self.beta = self.add_param("beta", np.zeros(channels, dtype=np.float32))

    def forward(self, x: Tensor) -> Tensor:
        mu = ops.mean(x, axis=(2, 3), keepdims=True)
        centered = ops.sub(x, mu)
        var = ops.mean(ops.mul(centered, centered), axis=(2, 3), keepdims=True)
        xn = ops.div(centered, ops.sqrt(ops.add(var, self.eps)))
        if not self.affine:
            return xn
        g = ops.reshape(self.gamma.tensor, (1, -1, 1, 1))
        b = ops.reshape(self.beta.tensor, (1, -1, 1, 1))
        return ops.add(ops.mul(xn, g), b)


def pixel_norm(x: Tensor, eps: float = 1e-8) -> Tensor:
    """Normalize each latent/pixel vector across the channel axis."""
    axis = 1 if x.ndim > 1 else 0
    ms = ops.mean(ops.mul(x, x), axis=axis, keepdims=True)
    return ops.div(x, ops.sqrt(ops.add(ms, eps)))


def modulated_conv(
    x: Tensor,
    weight: Tensor,
    style: Tensor,
    demodulate: bool = True,
    pad: int = 1,
    eps: float = 1e-8,
) -> Tensor:
    """Per-sample style-modulated convolution (stride 1).

    The kernel is scaled per input channel by the style vector; with
    demodulation every effective output filter is rescaled to unit L2 norm.
    """
    n, cin, h, w = x.shape
    cout, cin_k, kh, kw = weight.shape
    if style.shape != (n, cin):
        raise ValueError(f"style shape {style.shape} != ({n}, {cin})")
    if cin != cin_k:
        raise ValueError(f"modulated_conv channel mismatch: {cin} vs {cin_k}")
    w_exp = ops.reshape(weight, (1, cout, cin, kh, kw))
    s_exp = ops.reshape(style, (n, 1, cin, 1, 1))
    w_mod = ops.mul(w_exp, s_exp)  # N x Cout x Cin x kh x kw
    if demodulate:
        denom = ops.sqrt(ops.add(ops.sum(ops.mul(w_mod, w_mod), axis=(2, 3, 4), keepdims=True), eps))
        w_mod = ops.div(w_mod, denom)
    cols = ops.im2col(ops.pad2d(x, pad), kh, kw, stride=1)  # N x (Cin*kh*kw) x L
    w_flat = ops.reshape(w_mod, (n, cout, cin * kh * kw))
    out = ops.matmul(w_flat, cols)  # N x Cout x L
    oh = h + 2 * pad - kh + 1
    return ops.reshape(out, (n, cout, oh, oh))
