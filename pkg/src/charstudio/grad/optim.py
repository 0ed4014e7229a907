"""Optimizers and weight-constraint helpers for the training loops."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .module import Parameter


@dataclass
class OptimizerState:
    """Serializable per-parameter accumulators plus hyperparameters."""

    kind: str
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    moments1: dict[str, np.ndarray] = field(default_factory=dict)
    moments2: dict[str, np.ndarray] = field(default_factory=dict)

    def snapshot(self) -> dict:
        return {
            "kind": self.kind,
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "step_count": self.step_count,
        }


def adam_state(lr: float = 2e-4, beta1: float = 0.5, beta2: float = 0.999, eps: float = 1e-8) -> OptimizerState:
    return OptimizerState(kind="adam", lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def rmsprop_state(lr: float = 5e-5, alpha: float = 0.99, eps: float = 1e-8) -> OptimizerState:
    return OptimizerState(kind="rmsprop", lr=lr, beta1=0.0, beta2=alpha, eps=eps)


def optimizer_step(
    params: dict[str, Parameter],
    grads: dict[str, np.ndarray],
    state: OptimizerState,
) -> OptimizerState:
    """One in-place update over named parameters. Missing grads are an error."""
    state.step_count += 1
    t = state.step_count
    for name, p in params.items():
        if not p.trainable:
            continue
        if name not in grads:
            raise KeyError(f"no gradient provided for parameter {name!r}")
        g = np.asarray(grads[name], dtype=p.data.dtype)
        if g.shape != p.shape:
            raise ValueError(f"grad shape {g.shape} != param shape {p.shape} for {name!r}")
        if state.kind == "adam":
            m = state.moments1.setdefault(name, np.zeros_like(p.data))
            v = state.moments2.setdefault(name, np.zeros_like(p.data))
            m *= state.beta1
            m += (1.0 - state.beta1) * g
            v *= state.beta2
            v += (1.0 - state.beta2) * g * g
            m_hat = m / (1.0 - state.beta1**t)
            v_hat = v / (1.0 - state.beta2**t)
            p.set_data(p.data - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        elif state.kind == "rmsprop":
            v = state.moments2.setdefault(name, np.zeros_like(p.data))
            v *= state.beta2
            v += (1.0 - state.beta2) * g * g
            p.set_data(p.data - state.lr * g / (np.sqrt(v) + state.eps))
        else:
            raise ValueError(f"unknown optimizer kind {state.kind!r}")
    return state


def clip_parameters(params: Iterable[Parameter], c: float) -> None:
    """Clamp every trainable weight into [-c, c] (Wasserstein critic constraint)."""
    if c <= 0:
        raise ValueError("clip bound must be positive")
    for p in params:
        if p.trainable:
            np.clip(p.data, -c, c, out=p.data)
