"""Fréchet-distance evaluation harness."""

from .evaluate import (
    FidReport,
    ProtocolError,
    compare_reports,
    comparison_csv,
    comparison_text,
    evaluate_model,
    generated_features,
    real_features,
)
from .extractor import (
    DeskExtractor,
    DeskExtractorNet,
    IdentityPoolExtractor,
    extract_features,
    train_desk_extractor,
)
from .stats import (
    FidNumericsError,
    GaussianStats,
    fit_gaussian,
    frechet_distance,
    sqrtm_psd,
    sqrtm_trace,
)

__all__ = [
    "FidReport",
    "ProtocolError",
    "compare_reports",
    "comparison_csv",
    "comparison_text",
    "evaluate_model",
    "generated_features",
    "real_features",
    "DeskExtractor",
    "DeskExtractorNet",
    "IdentityPoolExtractor",
    "extract_features",
    "train_desk_extractor",
    "FidNumericsError",
    "GaussianStats",
    "fit_gaussian",
    "frechet_distance",
    "sqrtm_psd",
    "sqrtm_trace",
]
