"""Adversarial and translation objectives as pure functions of scores/batches.

Every function returns losses as graph tensors, so the trainer can
backpropagate through them; diagnostics come out as plain floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grad import Tensor, input_gradient, ops

OBJECTIVE_KINDS = ("ns_gan", "wgan", "wgan_gp", "gan_qp", "hinge", "pix2pix", "cycle")
WASSERSTEIN_KINDS = ("wgan", "wgan_gp")


class ObjectiveError(ValueError):
    pass


@dataclass
class ObjectiveConfig:
    kind: str = "ns_gan"
    lambda_gp: float = 10.0
    clip_c: float = 0.01
    lambda_qp: float = 10.0
    lambda_l1: float = 100.0
    lambda_cyc: float = 10.0
    n_critic: int = 1
    adv_term: str = "ns_gan"  # adversarial term used inside pix2pix/cycle

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise ObjectiveError(f"unknown objective {self.kind!r}")
        for name in ("lambda_gp", "lambda_qp", "lambda_l1", "lambda_cyc"):
            if getattr(self, name) < 0:
                raise ObjectiveError(f"{name} must be >= 0")
        if self.n_critic < 1:
            raise ObjectiveError("n_critic must be >= 1")
        if self.kind == "wgan" and self.clip_c <= 0:
            raise ObjectiveError("wgan requires a positive clip bound")

    @staticmethod
    def for_kind(kind: str) -> "ObjectiveConfig":
        n_critic = 5 if kind in ("wgan", "wgan_gp", "gan_qp") else 1
        return ObjectiveConfig(kind=kind, n_critic=n_critic)


@dataclass
class LossReport:
    d_loss: float
    g_loss: float
    penalty: float = 0.0
    aux: dict = field(default_factory=dict)
    mean_real: float = 0.0
    mean_fake: float = 0.0
    rt: float = 0.0

    def validate(self) -> "LossReport":
        values = [self.d_loss, self.g_loss, self.penalty, *self.aux.values()]
        if not all(np.isfinite(v) for v in values):
            raise FloatingPointError(f"non-finite loss report: {self}")
        if not -1.0 <= self.rt <= 1.0:
            raise ObjectiveError("rt diagnostic out of [-1,1]")
        return self


def overfit_signal(scores_real: Tensor) -> float:
    """rt = mean(sign(D(real))): +1 when the critic is certain about reals."""
    return float(np.mean(np.sign(scores_real.data)))


def _check_batch(*scores: Tensor) -> None:
    for s in scores:
        if s.size == 0:
            raise ObjectiveError("empty score batch")


def ns_gan(scores_real: Tensor, scores_fake: Tensor) -> tuple[Tensor, Tensor]:
    """Non-saturating cross-entropy objective."""
    _check_batch(scores_real, scores_fake)
    d_loss = ops.add(
        ops.mean(ops.softplus(ops.neg(scores_real))),
        ops.mean(ops.softplus(scores_fake)),
    )
    g_loss = ops.mean(ops.softplus(ops.neg(scores_fake)))
    return d_loss, g_loss


def wgan(scores_real: Tensor, scores_fake: Tensor) -> tuple[Tensor, Tensor]:
    """Wasserstein critic estimate (use with weight clipping or a penalty)."""
    _check_batch(scores_real, scores_fake)
    d_loss = ops.sub(ops.mean(scores_fake), ops.mean(scores_real))
    g_loss = ops.neg(ops.mean(scores_fake))
    return d_loss, g_loss


def hinge(scores_real: Tensor, scores_fake: Tensor) -> tuple[Tensor, Tensor]:
    _check_batch(scores_real, scores_fake)
    d_loss = ops.add(
        ops.mean(ops.relu(ops.sub(1.0, scores_real))),
        ops.mean(ops.relu(ops.add(1.0, scores_fake))),
    )
    g_loss = ops.neg(ops.mean(scores_fake))
    return d_loss, g_loss


def gradient_penalty(
    disc: Callable[[Tensor], Tensor],
    real_batch: np.ndarray,
    fake_batch: np.ndarray,
    lambda_gp: float,
    rng: np.random.Generator,
) -> Tensor:
    """lambda * mean((||grad_x D(x_hat)|| - 1)^2) on per-sample interpolates.

    The result is a graph tensor whose backward pass reaches the critic
    parameters through the input gradient (double backprop).
    """
    if lambda_gp == 0.0:
        return Tensor(np.zeros((), dtype=np.float32))
    real = np.asarray(real_batch)
    fake = np.asarray(fake_batch)
    if real.shape != fake.shape:
        n = min(real.shape[0], fake.shape[0])
        if n == 0 or real.shape[1:] != fake.shape[1:]:
            raise ObjectiveError(f"unpairable batches {real.shape} vs {fake.shape}")
        real, fake = real[:n], fake[:n]
    n = real.shape[0]
    eps = rng.uniform(0.0, 1.0, size=(n,) + (1,) * (real.ndim - 1)).astype(real.dtype)
    x_hat = Tensor(eps * real + (1.0 - eps) * fake)
    grads = input_gradient(lambda t: ops.sum(disc(t)), x_hat)
    flat = ops.reshape(grads, (n, -1))
    norms = ops.l2_norm(flat, axis=1, eps=1e-12)
    return ops.mul(ops.mean(ops.pow(ops.sub(norms, 1.0), 2.0)), float(lambda_gp))


def gan_qp(
    scores_real: Tensor,
    scores_fake: Tensor,
    pair_distance: Tensor,
    lambda_qp: float,
) -> tuple[Tensor, Tensor]:
    """Quadratic-potential objective over index-paired real/fake samples."""
    _check_batch(scores_real, scores_fake)
    if scores_real.shape != scores_fake.shape or scores_real.shape != pair_distance.shape:
        raise ObjectiveError("gan_qp requires index-aligned score/distance vectors")
    d_floor = Tensor(np.maximum(pair_distance.data, 1e-8))
    delta = ops.sub(scores_real, scores_fake)
    quad = ops.div(ops.mul(delta, delta), ops.mul(d_floor, 2.0 * float(lambda_qp)))
    d_loss = ops.mean(ops.add(ops.neg(delta), quad))
    g_loss = ops.mean(delta)
    return d_loss, g_loss


def pair_l1_distance(real_batch: np.ndarray, fake_batch: np.ndarray) -> Tensor:
    """Mean absolute pixel difference per index-matched pair (constant)."""
    real = np.asarray(real_batch)
    fake = np.asarray(fake_batch)
    n = min(real.shape[0], fake.shape[0])
    d = np.abs(real[:n] - fake[:n]).reshape(n, -1).mean(axis=1)
    return Tensor(d.astype(real.dtype))


def pix2pix_loss(
    gen_out: Tensor,
    target: Tensor,
    disc_scores_fake: Tensor,
    lambda_l1: float,
    adv_term: str = "ns_gan",
) -> tuple[Tensor, Tensor]:
    """Adversarial generator term plus weighted L1 reconstruction."""
    if gen_out.shape != target.shape:
        raise ObjectiveError(f"shape mismatch {gen_out.shape} vs {target.shape}")
    if adv_term == "hinge":
        adv = ops.neg(ops.mean(disc_scores_fake))
    else:
        adv = ops.mean(ops.softplus(ops.neg(disc_scores_fake)))
    l1 = ops.mean(ops.abs(ops.sub(gen_out, target)))
    g_loss = ops.add(adv, ops.mul(l1, float(lambda_l1)))
    return g_loss, ops.mul(l1, float(lambda_l1))


def cycle_consistency(x: Tensor, reconstructed: Tensor, lambda_cyc: float) -> Tensor:
    if x.shape != reconstructed.shape:
        raise ObjectiveError(f"shape mismatch {x.shape} vs {reconstructed.shape}")
    return ops.mul(ops.mean(ops.abs(ops.sub(x, reconstructed))), float(lambda_cyc))
