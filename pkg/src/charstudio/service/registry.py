"""Model registry: checkpoint loading, pipeline role wiring."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..data.manifest import DatasetManifest
from ..models import ModelBundle
from ..train.checkpoint import load_checkpoint


class RegistryError(RuntimeError):
    pass


@dataclass
class AnchorConfig:
    """Blend random latents toward the projection of a real dataset image."""

    enabled: bool = False
    rho: float = 0.3
    steps: int = 40

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise RegistryError("anchor rho must lie in [0,1]")


@dataclass
class ModelRegistryEntry:
    model_id: str
    checkpoint: str
    anchor: AnchorConfig = field(default_factory=AnchorConfig)
    manifest_path: Optional[str] = None
    fid_extractor_id: Optional[str] = None
    bundle: Optional[ModelBundle] = None
    manifest: Optional[DatasetManifest] = None

    @property
    def loaded(self) -> bool:
        return self.bundle is not None

    def describe(self) -> dict:
        doc = {
            "model_id": self.model_id,
            "loaded": self.loaded,
            "fid_extractor_id": self.fid_extractor_id,
            "anchor": {"enabled": self.anchor.enabled, "rho": self.anchor.rho},
        }
        if self.bundle is not None:
            spec = self.bundle.spec
            doc.update(
                family=spec.family,
                resolution=spec.resolution,
                conditional=spec.conditional,
                num_classes=spec.num_classes,
                channels=spec.channels,
            )
            if self.manifest is not None:
                doc["classes"] = self.manifest.classes
        return doc


@dataclass
class PipelineRoles:
    silhouette: Optional[str] = None
    translator: Optional[str] = None
    style: Optional[str] = None


class ModelRegistry:
    def __init__(self):
        self.entries: dict[str, ModelRegistryEntry] = {}
        self.roles = PipelineRoles()

    def add(self, entry: ModelRegistryEntry) -> None:
        if entry.model_id in self.entries:
            raise RegistryError(f"duplicate model id {entry.model_id!r}")
        self.entries[entry.model_id] = entry

    def load_all(self) -> None:
        for entry in self.entries.values():
            if entry.loaded:
                continue
            state = load_checkpoint(entry.checkpoint)  # digest verified inside
            bundle = state.bundle
            bundle.apply_ema()
            bundle.train(False)
            if bundle.spec.is_style and not bundle.nets["generator"].mapping.w_mean_estimated:
                bundle.nets["generator"].mapping.estimate_w_mean(seed=bundle.seed)
            entry.bundle = bundle
            if entry.manifest_path:
                entry.manifest = DatasetManifest.load(entry.manifest_path)
            if entry.anchor.enabled:
                if not bundle.spec.is_style:
                    raise RegistryError(
                        f"{entry.model_id}: projection anchoring needs a style-family model"
                    )
                if entry.manifest is None:
                    raise RegistryError(f"{entry.model_id}: anchoring needs a dataset manifest")

    def get(self, model_id: str) -> ModelRegistryEntry:
        if model_id not in self.entries:
            raise KeyError(model_id)
        return self.entries[model_id]

    def role(self, name: str) -> Optional[ModelRegistryEntry]:
        model_id = getattr(self.roles, name)
        return self.entries.get(model_id) if model_id else None

    def listing(self) -> list[dict]:
        return [self.entries[k].describe() for k in sorted(self.entries)]

    @staticmethod
    def from_config_file(path: str | Path) -> "ModelRegistry":
        doc = json.loads(Path(path).read_text())
        reg = ModelRegistry()
        base = Path(path).parent
        for m in doc.get("models", []):
            anchor = AnchorConfig(**m.get("anchor", {}))
            ckpt = m["checkpoint"]
            if not Path(ckpt).is_absolute():
                ckpt = str(base / ckpt)
            manifest_path = m.get("manifest")
            if manifest_path and not Path(manifest_path).is_absolute():
                manifest_path = str(base / manifest_path)
            reg.add(
                ModelRegistryEntry(
                    model_id=m["model_id"],
                    checkpoint=ckpt,
                    anchor=anchor,
                    manifest_path=manifest_path,
                    fid_extractor_id=m.get("fid_extractor_id"),
                )
            )
        roles = doc.get("pipeline", {})
        reg.roles = PipelineRoles(
            silhouette=roles.get("silhouette"),
            translator=roles.get("translator"),
            style=roles.get("style"),
        )
        return reg
