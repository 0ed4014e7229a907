"""Two-stage co-creation pipeline: generate, colorize, project, vary."""

from .concepts import (
    ColoredConcept,
    Concept,
    LatentRecord,
    PipelineError,
    SilhouetteConcept,
    colorize,
    generate_silhouette,
    interpolate,
    sharpen_silhouette,
)
from .project import ProjectionResult, project_latent, stylize_variants

__all__ = [
    "ColoredConcept",
    "Concept",
    "LatentRecord",
    "PipelineError",
    "SilhouetteConcept",
    "colorize",
    "generate_silhouette",
    "interpolate",
    "sharpen_silhouette",
    "ProjectionResult",
    "project_latent",
    "stylize_variants",
]
