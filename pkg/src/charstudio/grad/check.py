"""Central finite-difference oracles for verifying analytic gradients."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor, grad


def numeric_gradient(
    fn: Callable[[Sequence[Tensor]], Tensor],
    tensors: Sequence[Tensor],
    wrt: int,
    step: float = 1e-4,
) -> np.ndarray:
    """Central finite differences of a scalar function w.r.t. one input."""
    base = [Tensor(t.data.copy()) for t in tensors]
    target = base[wrt]
    out = np.zeros_like(target.data, dtype=np.float64)
    flat = target.data.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        f_plus = float(fn(base).data)
        flat[i] = orig - step
        f_minus = float(fn(base).data)
        flat[i] = orig
        out.reshape(-1)[i] = (f_plus - f_minus) / (2.0 * step)
    return out


def check_gradients(
    fn: Callable[[Sequence[Tensor]], Tensor],
    shapes: Sequence[tuple[int, ...]],
    seed: int = 0,
    step: float = 1e-4,
    rtol: float = 1e-3,
    scale: float = 1.0,
) -> float:
    """Compare analytic and numeric gradients in 64-bit; returns worst rel error."""
    rng = np.random.default_rng(seed)
    tensors = [
        Tensor(scale * rng.standard_normal(s), requires_grad=True, dtype=np.float64)
        for s in shapes
    ]
    loss = fn(tensors)
    analytic = grad(loss, tensors)
    worst = 0.0
    for i, t in enumerate(tensors):
        num = numeric_gradient(fn, tensors, i, step=step)
        ana = analytic[i].data.astype(np.float64)
        denom = max(np.linalg.norm(num), np.linalg.norm(ana), 1e-8)
        rel = float(np.linalg.norm(ana - num) / denom)
        worst = max(worst, rel)
        if rel >= rtol:
            raise AssertionError(
                f"gradient mismatch on input {i}: relative error {rel:.3e} >= {rtol}"
            )
    return worst
