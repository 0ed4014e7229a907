"""Eight-Gaussian ring mode-coverage benchmark (2-D, MLP nets)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import objectives as obj
from ..grad import Tensor, adam_state, backward_map, no_grad, ops, optimizer_step
from ..grad.rng import split_rng
from ..models.backbones import MLPCritic, MLPGenerator

RING_RADIUS = 2.0
RING_SIGMA = 0.05
N_MODES = 8


def mode_centers() -> np.ndarray:
    angles = 2 * np.pi * np.arange(N_MODES) / N_MODES
    return RING_RADIUS * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def sample_ring(n: int, rng: np.random.Generator) -> np.ndarray:
    centers = mode_centers()
    idx = rng.integers(0, N_MODES, size=n)
    return (centers[idx] + RING_SIGMA * rng.standard_normal((n, 2))).astype(np.float32)


def coverage(samples: np.ndarray, min_frac: float = 0.02, radius_sigmas: float = 3.0) -> int:
    """Number of modes holding at least min_frac of the samples within 3 sigma."""
    centers = mode_centers()
    d = np.linalg.norm(samples[:, None, :] - centers[None, :, :], axis=2)
    hits = d <= radius_sigmas * RING_SIGMA
    per_mode = hits.sum(axis=0)
    return int((per_mode >= min_frac * len(samples)).sum())


@dataclass
class RingResult:
    modes_covered: int
    samples: np.ndarray
    g_steps: int


def run_ring_benchmark(
    seed: int,
    g_steps: int = 2000,
    batch: int = 128,
    z_dim: int = 8,
    hidden: int = 128,
    lambda_gp: float = 0.1,
    lr: float = 2e-3,
    lr_decay: bool = True,
) -> RingResult:
    """WGAN-GP on the ring; returns coverage over 10k generated samples."""
    init_rng = split_rng(seed, 1)
    data_rng = split_rng(seed, 2)
    trn_rng = split_rng(seed, 3)
    gen = MLPGenerator(init_rng, z_dim, 2, hidden=hidden, depth=3)
    critic = MLPCritic(init_rng, 2, hidden=hidden, depth=3)
    g_params = dict(gen.named_parameters(prefix="g/"))
    d_params = dict(critic.named_parameters(prefix="d/"))
    opt_g = adam_state(lr=lr, beta1=0.5, beta2=0.9)
    opt_d = adam_state(lr=lr, beta1=0.5, beta2=0.9)

    for step in range(g_steps):
        if lr_decay:
            decayed = lr * max(0.05, 1.0 - step / g_steps)
            opt_g.lr = decayed
            opt_d.lr = decayed
        for _ in range(5):
            real = sample_ring(batch, data_rng)
            z = Tensor(trn_rng.standard_normal((batch, z_dim)).astype(np.float32))
            with no_grad():
                fake = gen(z).data
            s_real = critic(Tensor(real))
            s_fake = critic(Tensor(fake))
            d_loss, _ = obj.wgan(s_real, s_fake)
            pen = obj.gradient_penalty(critic, real, fake, lambda_gp, trn_rng)
            d_loss = ops.add(d_loss, pen)
            grads = backward_map(d_loss, d_params)
            optimizer_step(d_params, {k: g.data for k, g in grads.items()}, opt_d)
        z = Tensor(trn_rng.standard_normal((batch, z_dim)).astype(np.float32))
        fake = gen(z)
        g_loss = ops.neg(ops.mean(critic(fake)))
        grads = backward_map(g_loss, g_params)
        optimizer_step(g_params, {k: g.data for k, g in grads.items()}, opt_g)

    eval_rng = split_rng(seed, 4)
    z = Tensor(eval_rng.standard_normal((10_000, z_dim)).astype(np.float32))
    with no_grad():
        samples = gen(z).data
    return RingResult(coverage(samples), samples, g_steps)


def median_coverage(seeds=(0, 1, 2), **kw) -> int:
    results = sorted(run_ring_benchmark(s, **kw).modes_covered for s in seeds)
    return results[len(results) // 2]
