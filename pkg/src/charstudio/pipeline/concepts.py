"""Concept records for the two-stage pipeline, with full provenance."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..data import imageio
from ..grad.rng import split_rng
from ..models import ModelBundle, ModelSpecError

PSI_MAX = 1.5


class PipelineError(RuntimeError):
    pass


@dataclass
class LatentRecord:
    seed: int
    z: np.ndarray
    psi: float = 0.75
    w: Optional[np.ndarray] = None
    class_index: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.psi <= PSI_MAX:
            raise PipelineError(f"psi must lie in [0, {PSI_MAX}], got {self.psi}")
        self.z = np.asarray(self.z, dtype=np.float32)

    @staticmethod
    def from_seed(bundle: ModelBundle, seed: int, psi: float = 0.75, class_index=None) -> "LatentRecord":
        z = bundle.latent_from_seed(seed, n=1)[0]
        return LatentRecord(seed=int(seed), z=z, psi=psi, class_index=class_index)

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "z": self.z.tolist(),
            "psi": self.psi,
            "w": self.w.tolist() if self.w is not None else None,
            "class_index": self.class_index,
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "LatentRecord":
        rec = LatentRecord(
            seed=doc["seed"],
            z=np.asarray(doc["z"], dtype=np.float32),
            psi=doc["psi"],
            class_index=doc.get("class_index"),
        )
        if doc.get("w") is not None:
            rec.w = np.asarray(doc["w"], dtype=np.float32)
        return rec


@dataclass
class Concept:
    image: np.ndarray  # C x H x W in [-1, 1]
    provenance: str  # random | uploaded | derived
    latent: Optional[LatentRecord] = None
    parent_hash: Optional[str] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.image = np.asarray(self.image, dtype=np.float32)
        if self.provenance not in ("random", "uploaded", "derived"):
            raise PipelineError(f"unknown provenance {self.provenance!r}")
        self.png = imageio.encode_png(self.image)
        self.content_hash = imageio.content_hash(self.png)

    def save(self, path: str | Path) -> str:
        """Write PNG plus a sidecar provenance JSON; returns the content hash."""
        path = Path(path)
        path.write_bytes(self.png)
        sidecar = {
            "provenance": self.provenance,
            "hash": self.content_hash,
            "parent_hash": self.parent_hash,
            "latent": self.latent.to_json_dict() if self.latent else None,
            **self.meta,
        }
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=1, sort_keys=True))
        return self.content_hash


class SilhouetteConcept(Concept):
    def __post_init__(self):
        super().__post_init__()
        if self.image.shape[0] != 1:
            raise PipelineError("silhouette concepts are single-channel")
        near_pole = np.mean(np.abs(np.abs(self.image) - 1.0) <= 0.2)
        self.meta.setdefault("binary_fraction", float(near_pole))


class ColoredConcept(Concept):
    def __post_init__(self):
        super().__post_init__()
        if self.image.shape[0] != 3:
            raise PipelineError("colored concepts are three-channel")


def sharpen_silhouette(image: np.ndarray, temperature: float = 50.0) -> np.ndarray:
    """Push generator output toward the {-1,+1} poles (inference only).

    Soft-sign on the inverse-tanh pre-activation, RMS-normalized per image so
    the temperature means the same thing across models.  Pixels the soft-sign
    leaves in the middle band (possible with degenerate weights, e.g. exact
    zeros out of an untrained net) snap to the nearest pole, ties going
    foreground, so the near-binary invariant holds for any weights.
    """
    y = np.clip(np.asarray(image, dtype=np.float32), -0.999999, 0.999999)
    u = np.arctanh(y)
    rms = np.sqrt(np.mean(np.square(u), axis=(-2, -1), keepdims=True))
    u = u / np.maximum(rms, 1e-12)
    s = np.tanh(temperature * u)
    snapped = np.where(s >= 0.0, 1.0, -1.0)
    return np.where(np.abs(s) >= 0.8, s, snapped).astype(np.float32)


def generate_silhouette(
    bundle: ModelBundle,
    seed: int,
    class_index: Optional[int] = None,
    psi: float = 0.75,
    temperature: float = 50.0,
) -> SilhouetteConcept:
    """Stage 1: silhouette from a seeded latent, EMA weights, sharpened output."""
    if bundle.spec.channels != 1:
        raise PipelineError("silhouette generation requires a 1-channel model")
    latent = LatentRecord.from_seed(bundle, seed, psi=psi, class_index=class_index)
    if bundle.spec.is_style:
        img, _, w = bundle.generate(
            latent.z[None], class_idx=class_index, psi=psi, return_pre=True
        )
        latent.w = w[0]
    else:
        img = bundle.generate(latent.z[None], class_idx=class_index, psi=psi)
    sharp = sharpen_silhouette(img[0], temperature)
    return SilhouetteConcept(
        image=sharp,
        provenance="random",
        latent=latent,
        meta={"temperature": temperature},
    )


def colorize(silhouette: Concept | np.ndarray, translator: ModelBundle, strict: bool = False) -> ColoredConcept:
    """Stage 2: paired translator turns a silhouette into a colored concept."""
    if not translator.spec.is_translator:
        raise ModelSpecError("colorize requires a translator bundle")
    img = silhouette.image if isinstance(silhouette, Concept) else np.asarray(silhouette)
    if img.ndim == 3:
        img = img[None]
    res = translator.spec.resolution
    if img.shape[-1] != res:
        if strict:
            raise PipelineError(f"silhouette resolution {img.shape[-1]} != translator {res}")
        from ..data.resize import resize_bicubic

        img = resize_bicubic(img, res).astype(np.float32)
    out = translator.translate(img.astype(np.float32))
    parent = silhouette.content_hash if isinstance(silhouette, Concept) else None
    latent = silhouette.latent if isinstance(silhouette, Concept) else None
    return ColoredConcept(image=out[0], provenance="derived", latent=latent, parent_hash=parent)


def interpolate(bundle: ModelBundle, w1: np.ndarray, w2: np.ndarray, steps: int) -> list[np.ndarray]:
    """Linear w-space path rendered to images; endpoints exact."""
    if steps < 2:
        raise PipelineError("interpolation needs at least 2 steps")
    w1 = np.asarray(w1, dtype=np.float32)
    w2 = np.asarray(w2, dtype=np.float32)
    if w1.shape != w2.shape:
        raise PipelineError(f"latent shapes differ: {w1.shape} vs {w2.shape}")
    from ..grad.tensor import Tensor, no_grad

    frames = []
    for t in np.linspace(0.0, 1.0, steps):
        w = ((1.0 - t) * w1 + t * w2).astype(np.float32)
        with no_grad():
            img = bundle.synthesize_w(Tensor(w[None]), use_ema=True)
        frames.append(img.data[0])
    return frames
