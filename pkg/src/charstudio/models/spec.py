"""Model family specifications."""

from __future__ import annotations

from dataclasses import asdict, dataclass

FAMILIES = (
    "dcgan",
    "wgan",
    "wgan_gp",
    "gan_qp",
    "biggan_lite",
    "stylegan_lite",
    "pix2pix",
    "cyclegan",
)
TRANSLATOR_FAMILIES = ("pix2pix", "cyclegan")
CONDITIONING = ("none", "embed_concat", "cond_batchnorm")

# objective each family trains with unless overridden
DEFAULT_OBJECTIVE = {
    "dcgan": "ns_gan",
    "wgan": "wgan",
    "wgan_gp": "wgan_gp",
    "gan_qp": "gan_qp",
    "biggan_lite": "hinge",
    "stylegan_lite": "ns_gan",
    "pix2pix": "pix2pix",
    "cyclegan": "cycle",
}


class ModelSpecError(ValueError):
    pass


@dataclass
class ModelSpec:
    family: str
    resolution: int = 64
    z_dim: int = 64
    w_dim: int = 64
    base_channels: int = 32
    num_classes: int = 0
    conditioning: str = "none"
    channels: int = 1          # image channels produced (1 silhouette, 3 colored)
    source_channels: int = 1   # translator input channels
    embed_dim: int = 16
    mapping_depth: int = 4
    use_attention: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ModelSpecError(f"unknown family {self.family!r}")
        r = self.resolution
        if r < 32 or r > 512 or (r & (r - 1)) != 0:
            raise ModelSpecError(f"resolution must be a power of two in [32, 512], got {r}")
        if self.conditioning not in CONDITIONING:
            raise ModelSpecError(f"unknown conditioning {self.conditioning!r}")
        if self.num_classes == 0 and self.conditioning != "none":
            raise ModelSpecError("conditioning requires num_classes > 0")
        if self.num_classes > 0 and self.conditioning == "none" and not self.is_translator:
            raise ModelSpecError("num_classes > 0 requires a conditioning mode")
        if self.channels not in (1, 3):
            raise ModelSpecError("channels must be 1 or 3")

    @property
    def is_translator(self) -> bool:
        return self.family in TRANSLATOR_FAMILIES

    @property
    def is_style(self) -> bool:
        return self.family == "stylegan_lite"

    @property
    def conditional(self) -> bool:
        return self.num_classes > 0 and self.conditioning != "none"

    def to_json_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_json_dict(doc: dict) -> "ModelSpec":
        return ModelSpec(**doc)
