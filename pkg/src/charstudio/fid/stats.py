"""Gaussian moment fitting and the Fréchet distance numerics."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

EIG_FLOOR = -1e-10  # eigenvalues below this reject the matrix as non-PSD


class FidNumericsError(ValueError):
    pass


@dataclass
class GaussianStats:
    mu: np.ndarray
    sigma: np.ndarray
    n: int

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=np.float64)
        self.sigma = np.asarray(self.sigma, dtype=np.float64)
        if self.n < 2:
            raise FidNumericsError("Gaussian stats need n >= 2 samples")
        if self.sigma.shape != (self.mu.size, self.mu.size):
            raise FidNumericsError("covariance shape does not match mean")
        if not np.allclose(self.sigma, self.sigma.T, atol=1e-8):
            raise FidNumericsError("covariance must be symmetric")


def fit_gaussian(features: np.ndarray) -> GaussianStats:
    """Column means and unbiased covariance, symmetrized."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise FidNumericsError(f"need an (N>=2) x d feature matrix, got {x.shape}")
    mu = x.mean(axis=0)
    centered = x - mu
    sigma = centered.T @ centered / (x.shape[0] - 1)
    sigma = (sigma + sigma.T) / 2.0
    return GaussianStats(mu, sigma, x.shape[0])


def _psd_eigvals(mat: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    if not np.all(np.isfinite(mat)):
        raise FidNumericsError(f"{what} contains non-finite entries")
    if not np.allclose(mat, mat.T, atol=1e-8):
        raise FidNumericsError(f"{what} is not symmetric")
    vals, vecs = np.linalg.eigh((mat + mat.T) / 2.0)
    if vals.min() < EIG_FLOOR * max(1.0, abs(vals.max())):
        raise FidNumericsError(f"{what} has negative eigenvalue {vals.min():.3e}")
    return np.clip(vals, 0.0, None), vecs


def sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition."""
    vals, vecs = _psd_eigvals(np.asarray(mat, dtype=np.float64), "matrix")
    return (vecs * np.sqrt(vals)) @ vecs.T


def sqrtm_trace(sigma1: np.ndarray, sigma2: np.ndarray) -> float:
    """Tr((S1 S2)^{1/2}) through the symmetric form Tr((A S2 A)^{1/2}), A = S1^{1/2}."""
    a = sqrtm_psd(sigma1)
    m = a @ np.asarray(sigma2, dtype=np.float64) @ a
    m = (m + m.T) / 2.0
    vals, _ = _psd_eigvals(m, "symmetric intermediate")
    return float(np.sqrt(vals).sum())


def frechet_distance(s1: GaussianStats, s2: GaussianStats) -> float:
    """||mu1-mu2||^2 + Tr(S1) + Tr(S2) - 2 Tr((S1 S2)^{1/2}), clamped at 0."""
    if s1.mu.size != s2.mu.size:
        raise FidNumericsError(
            f"feature dimensions differ: {s1.mu.size} vs {s2.mu.size}"
        )
    mean_term = float(np.sum((s1.mu - s2.mu) ** 2))
    value = mean_term + float(np.trace(s1.sigma) + np.trace(s2.sigma)) - 2.0 * sqrtm_trace(
        s1.sigma, s2.sigma
    )
    if value < 0:
        if value < -1e-6:
            raise FidNumericsError(f"Fréchet distance moved far below zero: {value:.3e}")
        logger.info("clamping slightly negative Fréchet distance %.3e to 0", value)
        value = 0.0
    return value
