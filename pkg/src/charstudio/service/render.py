"""Latent records -> images: the single rendering path handlers and replay share."""

from __future__ import annotations

import hashlib
import json
from typing import Optional

import numpy as np

from ..data import imageio
from ..grad.rng import split_rng
from ..grad.tensor import Tensor, no_grad
from ..models import ModelBundle
from ..pipeline.concepts import sharpen_silhouette
from ..pipeline.project import project_latent
from .registry import ModelRegistryEntry

DEFAULT_TEMPERATURE = 50.0


def latent_id_for(model_id: str, latent: dict) -> str:
    blob = json.dumps({"model": model_id, "latent": latent}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _round_floats(values) -> list:
    return [float(np.float32(v)) for v in values]


def make_latent(
    entry: ModelRegistryEntry,
    seed: int,
    psi: float,
    class_index: Optional[int],
    anchor_w: Optional[np.ndarray] = None,
) -> dict:
    """Resolve a seed into a fully-specified, replayable latent dict."""
    bundle = entry.bundle
    z = bundle.latent_from_seed(seed, n=1)[0]
    doc: dict = {
        "seed": int(seed),
        "psi": float(psi),
        "class_index": class_index,
        "z": _round_floats(z),
    }
    if bundle.spec.channels == 1:
        doc["temperature"] = DEFAULT_TEMPERATURE
    if bundle.spec.is_style:
        mapping = bundle.nets["generator"].mapping
        with no_grad():
            w_raw = mapping(Tensor(z[None])).data[0]
        w_bar = mapping.w_mean.data
        w = w_bar + psi * (w_raw - w_bar)
        doc["w_raw"] = _round_floats(w_raw)
        if anchor_w is not None:
            rho = entry.anchor.rho
            w = (1.0 - rho) * w + rho * anchor_w
            doc["w_proj"] = _round_floats(anchor_w)
            doc["rho"] = rho
        doc["w"] = _round_floats(w)
    return doc


def anchor_projection(entry: ModelRegistryEntry, seed: int) -> np.ndarray:
    """Project a seeded random dataset image into the model's latent space."""
    from ..data.loader import load_sample

    rng = split_rng(seed, 555)
    idx = int(rng.integers(0, len(entry.manifest)))
    target = load_sample(entry.manifest, idx)
    result = project_latent(target, entry.bundle, steps=entry.anchor.steps)
    return result.w


def render_latent(bundle: ModelBundle, latent: dict) -> np.ndarray:
    """Deterministic image for a latent dict (the replay contract)."""
    if bundle.spec.is_style and "w" in latent:
        w = np.asarray(latent["w"], dtype=np.float32)
        with no_grad():
            img = bundle.synthesize_w(Tensor(w[None]), use_ema=False).data[0]
    else:
        z = np.asarray(latent["z"], dtype=np.float32)
        img = bundle.generate(
            z[None],
            class_idx=latent.get("class_index"),
            psi=float(latent.get("psi", 1.0)),
            use_ema=False,
        )[0]
    if bundle.spec.channels == 1 and latent.get("temperature"):
        img = sharpen_silhouette(img, float(latent["temperature"]))
    return img


def render_png(bundle: ModelBundle, latent: dict) -> bytes:
    return imageio.encode_png(render_latent(bundle, latent))
