"""Training orchestration: alternating updates, ADA, EMA, snapshots."""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .. import objectives as obj
from ..data.augment import AugPipelineConfig, apply_augmentation
from ..data.loader import BatchSource
from ..data.manifest import DatasetManifest
from ..grad import Tensor, adam_state, backward_map, clip_parameters, ops, optimizer_step
from ..grad.optim import OptimizerState
from ..grad.tensor import no_grad
from ..models import ModelBundle, ModelSpec, build_model
from .ada import AdaState, ada_update
from .checkpoint import (
    TrainState,
    load_checkpoint,
    read_checkpoint,
    resume_transfer,
    save_checkpoint,
)


class TrainAbort(RuntimeError):
    """Raised when a non-finite loss surfaces; a diagnostic snapshot is dumped."""


@dataclass
class TrainConfig:
    spec: ModelSpec
    objective: obj.ObjectiveConfig
    batch_size: int = 16
    total_steps: int = 100
    snap: int = 10
    seed: int = 0
    lr_g: float = 2e-4
    lr_d: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    ema_beta: float = 0.999
    ema_rampup: bool = True  # ramp beta in from ~0.1 so short runs track the live weights
    augment: AugPipelineConfig = field(default_factory=AugPipelineConfig)
    ada_target: float = 0.6
    ada_step: float = 0.01
    ada_enabled: bool = False
    resume: Optional[str] = None
    out_dir: Optional[str] = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.snap < 1:
            raise ValueError("snapshot interval must be >= 1")
        if not 0.0 < self.ada_target < 1.0:
            raise ValueError("ada target must lie in (0,1)")


def ema_update(ema_weights: dict[str, np.ndarray], weights: dict[str, np.ndarray], beta: float):
    """ema <- beta * ema + (1 - beta) * w, elementwise, in place."""
    for name, shadow in ema_weights.items():
        shadow *= beta
        shadow += (1.0 - beta) * weights[name]
    return ema_weights


def _fresh_optimizers(cfg: TrainConfig, bundle: ModelBundle) -> dict[str, OptimizerState]:
    roles = sorted(bundle.nets)
    out = {}
    for role in roles:
        lr = cfg.lr_g if role.startswith("gen") else cfg.lr_d
        out[role] = adam_state(lr=lr, beta1=cfg.beta1, beta2=cfg.beta2)
    return out


def _score_stats(scores: Tensor) -> tuple[float, float]:
    return float(scores.data.mean()), float(np.mean(np.sign(scores.data)))


def _ema_beta(cfg: TrainConfig, g_steps: int) -> float:
    if not cfg.ema_rampup:
        return cfg.ema_beta
    return min(cfg.ema_beta, (1.0 + g_steps) / (10.0 + g_steps))


def _sample_fakes(bundle: ModelBundle, n: int, labels, rng, grad_graph: bool):
    """Generator forward in train mode; detached unless grad_graph."""
    spec = bundle.spec
    z = Tensor(rng.standard_normal((n, spec.z_dim)).astype(np.float32))
    gen = bundle.nets["generator"]
    idx = labels if spec.conditional else None

    def fwd():
        if spec.is_style:
            return gen.synthesize(gen.mapping(z))
        return gen.forward(z, idx)

    if not grad_graph:
        with no_grad():
            return fwd(), idx
    return fwd(), idx


def _disc_scores(bundle: ModelBundle, images: Tensor, labels) -> Tensor:
    disc = bundle.nets["discriminator"]
    idx = labels if bundle.spec.conditional else None
    return disc(images, idx)


def train_step(
    bundle: ModelBundle,
    batch: tuple[np.ndarray, ...],
    objective: obj.ObjectiveConfig,
    ada: AdaState,
    rng: np.random.Generator,
    optim: dict[str, OptimizerState],
    cfg: TrainConfig,
) -> obj.LossReport:
    """n_critic discriminator updates then one generator update."""
    if bundle.spec.family == "pix2pix":
        return _pix2pix_step(bundle, batch, objective, rng, optim, cfg)
    if bundle.spec.family == "cyclegan":
        return _cyclegan_step(bundle, batch, objective, rng, optim, cfg)

    real, labels = batch
    if real.shape[-1] != bundle.spec.resolution:
        raise ValueError(
            f"batch resolution {real.shape[-1]} != model resolution {bundle.spec.resolution}"
        )
    bundle.train(True)
    n = real.shape[0]
    d_params = bundle.param_dict("discriminator")
    g_params = bundle.param_dict("generator")
    p_eff = ada.p if cfg.ada_enabled else cfg.augment.p
    aug = dataclasses.replace(cfg.augment, p=p_eff) if p_eff > 0 else None

    d_loss_val = penalty_val = 0.0
    mean_real = mean_fake = rt = 0.0
    for _ in range(objective.n_critic):
        fake, fake_idx = _sample_fakes(bundle, n, labels, rng, grad_graph=False)
        real_in = apply_augmentation(real, aug, rng) if aug else real
        fake_in = apply_augmentation(fake.data, aug, rng) if aug else fake.data
        s_real = _disc_scores(bundle, Tensor(real_in.astype(np.float32)), labels)
        s_fake = _disc_scores(bundle, Tensor(fake_in.astype(np.float32)), fake_idx)
        kind = objective.kind
        if kind == "ns_gan":
            d_loss, _ = obj.ns_gan(s_real, s_fake)
        elif kind in ("wgan", "wgan_gp"):
            d_loss, _ = obj.wgan(s_real, s_fake)
        elif kind == "gan_qp":
            dist = obj.pair_l1_distance(real_in, fake_in)
            d_loss, _ = obj.gan_qp(s_real, s_fake, dist, objective.lambda_qp)
        elif kind == "hinge":
            d_loss, _ = obj.hinge(s_real, s_fake)
        else:
            raise obj.ObjectiveError(f"objective {kind!r} needs paired training data")
        penalty = None
        if kind == "wgan_gp":
            idx_const = fake_idx
            disc_fn = lambda t: _disc_scores(bundle, t, idx_const)  # noqa: E731
            penalty = obj.gradient_penalty(
                disc_fn, real_in, fake_in, objective.lambda_gp, rng
            )
            d_loss = ops.add(d_loss, penalty)
        grads = backward_map(d_loss, d_params)
        optimizer_step(d_params, {k: g.data for k, g in grads.items()}, optim["discriminator"])
        if kind == "wgan":
            clip_parameters(d_params.values(), objective.clip_c)
        d_loss_val = float(d_loss.data)
        penalty_val = float(penalty.data) if penalty is not None else 0.0
        mean_real, rt = _score_stats(s_real)
        mean_fake, _ = _score_stats(s_fake)

    # generator update (no augmentation on this path: the pipeline is not
    # differentiable, so augmented fakes would cut the gradient to G)
    fake, fake_idx = _sample_fakes(bundle, n, labels, rng, grad_graph=True)
    s_fake = _disc_scores(bundle, fake, fake_idx)
    kind = objective.kind
    if kind == "ns_gan":
        g_loss = ops.mean(ops.softplus(ops.neg(s_fake)))
    elif kind in ("wgan", "wgan_gp", "hinge"):
        g_loss = ops.neg(ops.mean(s_fake))
    elif kind == "gan_qp":
        s_real_const = Tensor(np.zeros_like(s_fake.data))
        g_loss = ops.mean(ops.sub(s_real_const, s_fake))
    else:  # pragma: no cover
        raise obj.ObjectiveError(kind)
    grads = backward_map(g_loss, g_params)
    optimizer_step(g_params, {k: g.data for k, g in grads.items()}, optim["generator"])
    bundle.ema_update(_ema_beta(cfg, optim["generator"].step_count))

    report = obj.LossReport(
        d_loss=d_loss_val,
        g_loss=float(g_loss.data),
        penalty=penalty_val,
        mean_real=mean_real,
        mean_fake=mean_fake,
        rt=rt,
    )
    return report.validate()


def _pix2pix_step(bundle, batch, objective, rng, optim, cfg) -> obj.LossReport:
    sil, col, _labels = batch
    bundle.train(True)
    gen = bundle.nets["generator"]
    disc = bundle.nets["discriminator"]
    g_params = bundle.param_dict("generator")
    d_params = bundle.param_dict("discriminator")
    sil_t, col_t = Tensor(sil), Tensor(col)

    fake = Tensor(gen(sil_t).data)
    s_real = disc(ops.concat([sil_t, col_t], axis=1))
    s_fake = disc(ops.concat([sil_t, fake], axis=1))
    d_loss, _ = obj.ns_gan(ops.reshape(s_real, (-1,)), ops.reshape(s_fake, (-1,)))
    grads = backward_map(d_loss, d_params)
    optimizer_step(d_params, {k: g.data for k, g in grads.items()}, optim["discriminator"])

    fake = gen(sil_t)
    s_fake = disc(ops.concat([sil_t, fake], axis=1))
    g_loss, l1_term = obj.pix2pix_loss(
        fake, col_t, ops.reshape(s_fake, (-1,)), objective.lambda_l1, objective.adv_term
    )
    grads = backward_map(g_loss, g_params)
    optimizer_step(g_params, {k: g.data for k, g in grads.items()}, optim["generator"])
    bundle.ema_update(_ema_beta(cfg, optim["generator"].step_count))

    mean_real, rt = _score_stats(s_real)
    report = obj.LossReport(
        d_loss=float(d_loss.data),
        g_loss=float(g_loss.data),
        aux={"l1": float(l1_term.data)},
        mean_real=mean_real,
        mean_fake=float(s_fake.data.mean()),
        rt=rt,
    )
    return report.validate()


def _cyclegan_step(bundle, batch, objective, rng, optim, cfg) -> obj.LossReport:
    a, b, _labels = batch
    # unpaired training: break the index pairing of the loaded batch
    b = b[rng.permutation(b.shape[0])]
    bundle.train(True)
    gen_ab, gen_ba = bundle.nets["gen_AB"], bundle.nets["gen_BA"]
    disc_a, disc_b = bundle.nets["disc_A"], bundle.nets["disc_B"]
    a_t, b_t = Tensor(a), Tensor(b)

    fake_b = Tensor(gen_ab(a_t).data)
    fake_a = Tensor(gen_ba(b_t).data)
    d_losses = {}
    for role, disc, real_t, fake_t in (
        ("disc_B", disc_b, b_t, fake_b),
        ("disc_A", disc_a, a_t, fake_a),
    ):
        s_real = ops.reshape(disc(real_t), (-1,))
        s_fake = ops.reshape(disc(fake_t), (-1,))
        d_loss, _ = obj.ns_gan(s_real, s_fake)
        params = bundle.param_dict(role)
        grads = backward_map(d_loss, params)
        optimizer_step(params, {k: g.data for k, g in grads.items()}, optim[role])
        d_losses[role] = float(d_loss.data)

    fake_b = gen_ab(a_t)
    fake_a = gen_ba(b_t)
    adv_b = ops.mean(ops.softplus(ops.neg(ops.reshape(disc_b(fake_b), (-1,)))))
    adv_a = ops.mean(ops.softplus(ops.neg(ops.reshape(disc_a(fake_a), (-1,)))))
    cyc_a = obj.cycle_consistency(a_t, gen_ba(fake_b), objective.lambda_cyc)
    cyc_b = obj.cycle_consistency(b_t, gen_ab(fake_a), objective.lambda_cyc)
    g_loss = ops.add(ops.add(adv_a, adv_b), ops.add(cyc_a, cyc_b))
    gen_params = {**bundle.param_dict("gen_AB"), **bundle.param_dict("gen_BA")}
    grads = backward_map(g_loss, gen_params)
    for role in ("gen_AB", "gen_BA"):
        params = bundle.param_dict(role)
        optimizer_step(params, {k: grads[k].data for k in params}, optim[role])
    bundle.ema_update(_ema_beta(cfg, optim["gen_AB"].step_count))

    report = obj.LossReport(
        d_loss=d_losses["disc_B"],
        g_loss=float(g_loss.data),
        aux={"d_loss_A": d_losses["disc_A"], "cycle": float(cyc_a.data + cyc_b.data)},
    )
    return report.validate()


def run_training(
    cfg: TrainConfig,
    manifest: DatasetManifest,
    hooks: Optional[Callable[[int, obj.LossReport], None]] = None,
) -> tuple[Path, list[dict]]:
    """Full run: returns (final checkpoint path, metrics records)."""
    if manifest.resolution != cfg.spec.resolution:
        raise ValueError(
            f"manifest resolution {manifest.resolution} != spec resolution {cfg.spec.resolution}"
        )
    out_dir = Path(cfg.out_dir or "run")
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = out_dir / "metrics.jsonl"

    if cfg.resume:
        state = _restore_for_resume(cfg)
    else:
        bundle = build_model(cfg.spec, seed=cfg.seed)
        state = TrainState.fresh(bundle, _fresh_optimizers(cfg, bundle), cfg.seed)
        if cfg.ada_enabled:
            state.ada.p = cfg.augment.p
    bundle = state.bundle

    source = BatchSource(manifest)
    batch_iter = _cycle_batches(source, cfg.batch_size, cfg.seed)
    metrics: list[dict] = []
    t0 = time.time()
    with metrics_path.open("a") as log:
        for local_step in range(cfg.total_steps):
            batch = next(batch_iter)
            try:
                report = train_step(
                    bundle, batch, cfg.objective, state.ada, state.rng, state.optim, cfg
                )
            except FloatingPointError as exc:
                crash = out_dir / f"diagnostic_{state.step:06d}.ckpt"
                save_checkpoint(state, crash)
                raise TrainAbort(f"non-finite loss at step {state.step}: {exc}") from exc
            state.step += 1
            if cfg.ada_enabled:
                smoothed = state.ada.observe(report.rt)
                ada_update(state.ada, smoothed, cfg.ada_target, cfg.ada_step)
            record = {
                "step": state.step,
                "d_loss": report.d_loss,
                "g_loss": report.g_loss,
                "rt": report.rt,
                "p": state.ada.p,
                "elapsed": round(time.time() - t0, 3),
                **report.aux,
            }
            metrics.append(record)
            log.write(json.dumps(record) + "\n")
            if hooks:
                hooks(state.step, report)
            if local_step + 1 < cfg.total_steps and state.step % cfg.snap == 0:
                save_checkpoint(state, out_dir / f"snap_{state.step:06d}.ckpt")
    final = out_dir / "final.ckpt"
    save_checkpoint(state, final)
    return final, metrics


def _restore_for_resume(cfg: TrainConfig) -> TrainState:
    header, _ = read_checkpoint(cfg.resume)  # digest verified here; corrupt files abort
    if ModelSpec.from_json_dict(header["model_spec"]) == cfg.spec:
        return load_checkpoint(cfg.resume)
    bundle, report = resume_transfer(cfg.resume, cfg.spec, seed=cfg.seed)
    optim = _fresh_optimizers(cfg, bundle)
    for role, carry in report.get("optim", {}).items():
        if role in optim:
            optim[role].moments1.update(carry["m1"])
            optim[role].moments2.update(carry["m2"])
    return TrainState.fresh(bundle, optim, cfg.seed)


def _cycle_batches(source: BatchSource, batch_size: int, seed: int):
    epoch = 0
    while True:
        yielded = False
        for batch in source.batches(batch_size, seed, epoch):
            yielded = True
            yield batch
        if not yielded:
            idx = list(range(len(source.manifest)))
            while len(idx) < batch_size:
                idx = idx + idx
            yield source.gather(idx[:batch_size])
        epoch += 1
