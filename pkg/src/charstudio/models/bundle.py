"""Model construction and the bundle facade used by trainer/pipeline/service."""

from __future__ import annotations

from contextlib import contextmanager
from typing import Optional

import numpy as np

from ..grad import Module, ops
from ..grad.rng import split_rng
from ..grad.tensor import Tensor, no_grad
from .backbones import DCDiscriminator, DCGenerator
from .spec import ModelSpec, ModelSpecError
from .style import StyleGenerator, map_latent
from .translate import PatchDiscriminator, UNetTranslator

GENERATOR_ROLES = ("generator", "gen_AB", "gen_BA")


class ModelBundle:
    """Spec plus role-keyed networks, with EMA shadows of the generator weights."""

    def __init__(self, spec: ModelSpec, nets: dict[str, Module], seed: int):
        self.spec = spec
        self.nets = nets
        self.seed = seed
        self.ema: dict[str, np.ndarray] = {
            name: p.data.copy()
            for name, p in self.named_parameters()
            if name.split("/")[0] in GENERATOR_ROLES and p.trainable
        }

    # -- parameters ------------------------------------------------------------

    def named_parameters(self):
        for role in sorted(self.nets):
            for name, p in self.nets[role].named_parameters(prefix=f"{role}/"):
                yield name, p

    def param_dict(self, role: Optional[str] = None):
        out = {}
        for name, p in self.named_parameters():
            if role is None or name.startswith(f"{role}/"):
                out[name] = p
        return out

    def param_counts(self) -> dict[str, int]:
        return {role: net.num_params() for role, net in sorted(self.nets.items())}

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def train(self, mode: bool = True) -> "ModelBundle":
        for net in self.nets.values():
            net.train(mode)
        return self

    # -- EMA -------------------------------------------------------------------

    def ema_update(self, beta: float) -> None:
        params = dict(self.named_parameters())
        for name, shadow in self.ema.items():
            shadow *= beta
            shadow += (1.0 - beta) * params[name].data

    def apply_ema(self) -> None:
        """Overwrite live generator weights with their EMA shadows (inference)."""
        params = dict(self.named_parameters())
        for name, shadow in self.ema.items():
            params[name].set_data(shadow.copy())

    @contextmanager
    def ema_weights(self):
        """Temporarily swap EMA weights in (training-time sampling)."""
        params = dict(self.named_parameters())
        saved = {name: params[name].data for name in self.ema}
        for name, shadow in self.ema.items():
            params[name].set_data(shadow.copy())
        try:
            yield
        finally:
            for name, data in saved.items():
                params[name].set_data(data)

    # -- inference --------------------------------------------------------------

    def latent_from_seed(self, seed: int, n: int = 1) -> np.ndarray:
        rng = split_rng(seed, 1)
        return rng.standard_normal((n, self.spec.z_dim)).astype(np.float32)

    def generate(
        self,
        z: np.ndarray,
        class_idx=None,
        psi: float = 1.0,
        use_ema: bool = True,
        return_pre: bool = False,
    ):
        """Deterministic image batch from latents; values in [-1, 1].

        Style family truncates in w-space toward the estimated mean latent;
        the other families truncate in z-space toward the prior mean 0.
        """
        spec = self.spec
        if spec.is_translator:
            raise ModelSpecError(f"{spec.family} has no latent generator")
        if spec.conditional and class_idx is None:
            raise ModelSpecError("conditional model requires a class index")
        if not spec.conditional and class_idx is not None:
            raise ModelSpecError("class index given for unconditional model")
        gen = self.nets["generator"]
        was_training = gen.training
        gen.eval()
        try:
            zt = Tensor(np.asarray(z, dtype=np.float32))
            idx = None
            if class_idx is not None:
                idx = np.full(zt.shape[0], int(class_idx), dtype=np.int64)
            ctx = self.ema_weights() if use_ema else _null_ctx()
            with ctx, no_grad():
                if spec.is_style:
                    w = map_latent(gen.mapping, zt, psi)
                    result = gen.synthesize(w, return_pre=return_pre)
                    if return_pre:
                        out, pre = result
                        return out.data, pre.data, w.data
                    return result.data
                if psi != 1.0:
                    zt = ops.mul(zt, float(psi))
                result = gen.forward(zt, idx, return_pre=return_pre)
                if return_pre:
                    out, pre = result
                    return out.data, pre.data, None
                return result.data
        finally:
            gen.train(was_training)

    def synthesize_w(self, w: Tensor, use_ema: bool = False) -> Tensor:
        """Differentiable style synthesis from w (projection path)."""
        if not self.spec.is_style:
            raise ModelSpecError("w-space synthesis requires the style family")
        gen = self.nets["generator"]
        was_training = gen.training
        gen.eval()
        try:
            ctx = self.ema_weights() if use_ema else _null_ctx()
            with ctx:
                return gen.synthesize(w)
        finally:
            gen.train(was_training)

    def discriminate(self, images: np.ndarray, class_idx=None, condition: np.ndarray | None = None):
        """Score a batch: scalar per sample, or a score map for patch critics."""
        spec = self.spec
        if images.shape[-1] != spec.resolution:
            raise ModelSpecError(
                f"discriminator expects resolution {spec.resolution}, got {images.shape[-1]}"
            )
        role = "discriminator" if "discriminator" in self.nets else "disc_B"
        disc = self.nets[role]
        was_training = disc.training
        disc.eval()
        try:
            with no_grad():
                x = Tensor(np.asarray(images, dtype=np.float32))
                if isinstance(disc, PatchDiscriminator):
                    if spec.family == "pix2pix":
                        if condition is None:
                            raise ModelSpecError("pix2pix discriminator needs the source image")
                        x = ops.concat([Tensor(np.asarray(condition, dtype=np.float32)), x], axis=1)
                    return disc(x).data
                idx = None
                if class_idx is not None:
                    idx = np.full(x.shape[0], int(class_idx), dtype=np.int64)
                return disc(x, idx).data
        finally:
            disc.train(was_training)

    def translate(self, images: np.ndarray, direction: str = "AB") -> np.ndarray:
        """Run the translator generator (pix2pix: AB only)."""
        spec = self.spec
        if not spec.is_translator:
            raise ModelSpecError(f"{spec.family} is not a translator")
        role = "generator" if spec.family == "pix2pix" else f"gen_{direction}"
        net = self.nets[role]
        was_training = net.training
        net.eval()
        try:
            ctx = self.ema_weights() if self.ema else _null_ctx()
            with ctx, no_grad():
                return net(Tensor(np.asarray(images, dtype=np.float32))).data
        finally:
            net.train(was_training)


@contextmanager
def _null_ctx():
    yield


def build_model(spec: ModelSpec, seed: int = 0) -> ModelBundle:
    """Construct all nets for a family with deterministic seeded init."""
    rng = split_rng(seed, 17)
    nets: dict[str, Module] = {}
    fam = spec.family
    if fam in ("dcgan", "wgan", "wgan_gp", "gan_qp", "biggan_lite"):
        nets["generator"] = DCGenerator(rng, spec)
        norm = "batch" if fam == "dcgan" else "none"
        spectral = fam == "biggan_lite"
        nets["discriminator"] = DCDiscriminator(rng, spec, norm=norm, spectral=spectral)
    elif fam == "stylegan_lite":
        nets["generator"] = StyleGenerator(rng, spec)
        nets["discriminator"] = DCDiscriminator(rng, spec, norm="none")
    elif fam == "pix2pix":
        nets["generator"] = UNetTranslator(rng, spec)
        nets["discriminator"] = PatchDiscriminator(
            rng, spec, in_ch=spec.source_channels + spec.channels
        )
    elif fam == "cyclegan":
        nets["gen_AB"] = UNetTranslator(rng, spec, in_ch=spec.source_channels, out_ch=spec.channels)
        nets["gen_BA"] = UNetTranslator(rng, spec, in_ch=spec.channels, out_ch=spec.source_channels)
        nets["disc_A"] = PatchDiscriminator(rng, spec, in_ch=spec.source_channels)
        nets["disc_B"] = PatchDiscriminator(rng, spec, in_ch=spec.channels)
    else:  # pragma: no cover - spec validation rejects unknown families
        raise ModelSpecError(f"unknown family {fam!r}")
    return ModelBundle(spec, nets, seed)
