"""Latent projection: fit a style latent w so the generator reproduces a target."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..grad import Tensor, adam_state, grad, no_grad, ops, optimizer_step
from ..grad.module import Parameter
from ..grad.rng import split_rng
from ..models import ModelBundle, ModelSpecError
from .concepts import ColoredConcept, Concept, LatentRecord, PipelineError


@dataclass
class ProjectionResult:
    w: np.ndarray
    loss_trace: list[float]  # best-so-far, non-increasing
    reconstruction: np.ndarray
    steps_used: int
    final_loss: float
    pixel_l2_rel: float

    def low_confidence(self, threshold: float = 0.25) -> bool:
        """Flag projections whose target stayed far from the model manifold."""
        return self.pixel_l2_rel > threshold


def project_latent(
    target: np.ndarray,
    bundle: ModelBundle,
    steps: int = 200,
    lr: float = 0.05,
    pixel_weight: float = 0.1,
    extractor=None,
    seed: int = 0,
) -> ProjectionResult:
    """Adam descent on feature + pixel distance, starting at the mean latent.

    The loss is feature-space L2 (desk extractor when given, otherwise an
    8x8 average-pool embedding) plus ``pixel_weight`` times pixel L2, both
    normalized per element.  Returns the best w seen, never the last.
    """
    if steps < 1:
        raise PipelineError("projection needs at least one step")
    if not bundle.spec.is_style:
        raise ModelSpecError("projection requires a style-family bundle")
    gen = bundle.nets["generator"]
    if not gen.mapping.w_mean_estimated:
        gen.mapping.estimate_w_mean(seed=seed)

    target = np.asarray(target, dtype=np.float32)
    if target.ndim == 3:
        target = target[None]
    res = bundle.spec.resolution
    if target.shape[-1] != res:
        from ..data.resize import resize_bicubic

        target = resize_bicubic(target, res).astype(np.float32)
    ch = bundle.spec.channels
    if target.shape[1] != ch:
        if target.shape[1] == 1 and ch == 3:
            target = np.repeat(target, 3, axis=1)
        elif target.shape[1] == 3 and ch == 1:
            target = target.mean(axis=1, keepdims=True)
        else:
            raise PipelineError(f"cannot project {target.shape[1]}-channel target into {ch}-channel model")
    target_t = Tensor(target)

    def feats(x: Tensor) -> Tensor:
        if extractor is not None:
            return extractor.embed_tensor(x)
        pooled = ops.avg_pool2d(x, res // 8)
        return ops.reshape(pooled, (x.shape[0], -1))

    target_feats = Tensor(feats(target_t).data)

    w_param = Parameter(gen.mapping.w_mean.data[None, :].copy(), name="w")
    opt = adam_state(lr=lr, beta1=0.9, beta2=0.999)

    def loss_at(w_tensor: Tensor) -> tuple[Tensor, Tensor]:
        img = bundle.synthesize_w(w_tensor, use_ema=True)
        f = feats(img)
        floss = ops.mean(ops.pow(ops.sub(f, target_feats), 2.0))
        ploss = ops.mean(ops.pow(ops.sub(img, target_t), 2.0))
        return ops.add(floss, ops.mul(ploss, pixel_weight)), img

    best_w = w_param.data.copy()
    with no_grad():
        loss0, img0 = loss_at(Tensor(w_param.data))
    best_loss = float(loss0.data)
    best_img = img0.data.copy()
    trace = [best_loss]

    used = 0
    for _ in range(steps):
        loss, img = loss_at(w_param.tensor)
        used += 1
        value = float(loss.data)
        if value < best_loss:
            best_loss = value
            best_w = w_param.data.copy()
            best_img = img.data.copy()
        trace.append(best_loss)
        (gw,) = grad(loss, [w_param.tensor])
        optimizer_step({"w": w_param}, {"w": gw.data}, opt)
        if best_loss == 0.0:
            break

    t_norm = float(np.linalg.norm(target))
    rel = float(np.linalg.norm(best_img - target) / max(t_norm, 1e-12))
    return ProjectionResult(
        w=best_w[0],
        loss_trace=trace,
        reconstruction=best_img[0],
        steps_used=used,
        final_loss=best_loss,
        pixel_l2_rel=rel,
    )


def stylize_variants(
    colored: Concept | np.ndarray,
    bundle: ModelBundle,
    k: int = 4,
    sigma: float = 0.1,
    rng: Optional[np.random.Generator] = None,
    steps: int = 200,
    extractor=None,
) -> list[ColoredConcept]:
    """Project the concept, then render k latents around the projection.

    The first variant is the reconstruction itself; the remaining k-1 come
    from w* + sigma * eta draws.  Each carries its perturbed latent.
    """
    if k < 1:
        raise PipelineError("k must be >= 1")
    if bundle.spec.channels != 3:
        raise PipelineError("stylize_variants needs a colored (3-channel) style model")
    rng = rng if rng is not None else split_rng(0, 777)
    image = colored.image if isinstance(colored, Concept) else np.asarray(colored)
    parent = colored.content_hash if isinstance(colored, Concept) else None
    proj = project_latent(image, bundle, steps=steps, extractor=extractor)
    variants = []
    from ..grad.tensor import Tensor as T

    for i in range(k):
        if i == 0:
            w = proj.w
            img = proj.reconstruction
        else:
            w = proj.w + sigma * rng.standard_normal(proj.w.shape).astype(np.float32)
            with no_grad():
                img = bundle.synthesize_w(T(w[None]), use_ema=True).data[0]
        latent = LatentRecord(seed=-1, z=np.zeros(bundle.spec.z_dim, dtype=np.float32), psi=1.0)
        latent.w = np.asarray(w, dtype=np.float32)
        variants.append(
            ColoredConcept(
                image=img,
                provenance="derived",
                latent=latent,
                parent_hash=parent,
                meta={"projection_loss": proj.final_loss, "sigma": sigma, "variant": i},
            )
        )
    return variants
