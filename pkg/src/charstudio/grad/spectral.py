"""Spectral normalization via power iteration."""

from __future__ import annotations

import numpy as np


def _l2(v: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    return v / (np.linalg.norm(v) + eps)


def spectral_normalize(
    weight: np.ndarray,
    u_state: np.ndarray | None = None,
    n_iter: int = 1,
    converge_tol: float | None = None,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Divide a weight by its power-iteration largest singular value.

    The weight is viewed as 2-D (out x rest).  One iteration per call is the
    training regime; pass ``converge_tol`` to iterate until the estimate is
    stable (used by verification tests).  Returns (normalized weight, updated
    u vector, sigma estimate).  A zero matrix is returned unchanged with
    sigma = 0 to flag the degenerate case.
    """
    w = np.asarray(weight)
    mat = w.reshape(w.shape[0], -1)
    if not np.any(mat):
        u = u_state if u_state is not None else np.zeros(mat.shape[0], dtype=mat.dtype)
        return w.copy(), np.asarray(u), 0.0
    if u_state is None:
        rng = np.random.default_rng(mat.shape[0] * 7919 + mat.shape[1])
        u = _l2(rng.standard_normal(mat.shape[0]).astype(mat.dtype))
    else:
        u = _l2(np.asarray(u_state, dtype=mat.dtype))

    sigma_prev = None
    iters = n_iter if converge_tol is None else 10_000
    for _ in range(iters):
        v = _l2(mat.T @ u)
        u = _l2(mat @ v)
        sigma = float(u @ mat @ v)
        if converge_tol is not None and sigma_prev is not None:
            if abs(sigma - sigma_prev) <= converge_tol * max(abs(sigma), 1e-12):
                break
        sigma_prev = sigma
    v = _l2(mat.T @ u)
    sigma = float(u @ mat @ v)
    return (w / sigma).astype(w.dtype, copy=False), u, sigma
