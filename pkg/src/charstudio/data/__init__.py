"""Dataset ingestion, preprocessing, pairing, and augmentation."""

from . import imageio, synthetic
from .augment import AugPipelineConfig, apply_augmentation
from .loader import BatchSource, load_pair, load_sample
from .manifest import (
    DataError,
    DatasetManifest,
    IngestReport,
    SampleRecord,
    derive_pairs,
    ingest_directory,
    manifest_digest,
)
from .resize import bicubic_reference, resize_bicubic
from .silhouette import binarize_silhouette, luminance

__all__ = [
    "imageio",
    "synthetic",
    "AugPipelineConfig",
    "apply_augmentation",
    "BatchSource",
    "load_pair",
    "load_sample",
    "DataError",
    "DatasetManifest",
    "IngestReport",
    "SampleRecord",
    "derive_pairs",
    "ingest_directory",
    "manifest_digest",
    "resize_bicubic",
    "bicubic_reference",
    "binarize_silhouette",
    "luminance",
]
