"""Model zoo: constructors and forward passes for every family."""

from .backbones import DCDiscriminator, DCGenerator, MLPCritic, MLPGenerator
from .bundle import ModelBundle, build_model
from .layers import modulated_conv
from .spec import DEFAULT_OBJECTIVE, FAMILIES, ModelSpec, ModelSpecError
from .style import MappingNetwork, StyleGenerator, TruncationError, map_latent
from .translate import PatchDiscriminator, UNetTranslator

__all__ = [
    "ModelSpec",
    "ModelSpecError",
    "ModelBundle",
    "build_model",
    "FAMILIES",
    "DEFAULT_OBJECTIVE",
    "DCGenerator",
    "DCDiscriminator",
    "MLPGenerator",
    "MLPCritic",
    "MappingNetwork",
    "StyleGenerator",
    "TruncationError",
    "map_latent",
    "modulated_conv",
    "UNetTranslator",
    "PatchDiscriminator",
]
