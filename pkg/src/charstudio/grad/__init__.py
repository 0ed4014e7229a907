"""Differentiable tensor substrate: tape autodiff, ops, optimizers."""

from . import ops
from .module import Module, Parameter
from .optim import OptimizerState, adam_state, clip_parameters, optimizer_step, rmsprop_state
from .rng import make_rng, restore_rng, rng_state, split_rng
from .spectral import spectral_normalize
from .tensor import GradError, Tensor, grad, no_grad, set_debug_checks

__all__ = [
    "Tensor",
    "Parameter",
    "Module",
    "GradError",
    "grad",
    "no_grad",
    "set_debug_checks",
    "ops",
    "input_gradient",
    "backward_map",
    "OptimizerState",
    "adam_state",
    "rmsprop_state",
    "optimizer_step",
    "clip_parameters",
    "spectral_normalize",
    "make_rng",
    "split_rng",
    "rng_state",
    "restore_rng",
]


def input_gradient(scalar_fn, x: Tensor) -> Tensor:
    """Gradient of a scalar function w.r.t. its input, itself differentiable.

    The returned tensor stays on the tape, so norms of it can be backpropagated
    to parameters (the double-backprop path used by the gradient penalty).
    """
    probe = Tensor(x.data, requires_grad=True)
    y = scalar_fn(probe)
    (gx,) = grad(y, [probe], create_graph=True)
    return gx


def backward_map(loss: Tensor, params: dict[str, Parameter]) -> dict[str, Tensor]:
    """Gradients of a scalar loss keyed by parameter name (zeros if unreachable)."""
    tensors = [p.tensor for p in params.values()]
    grads = grad(loss, tensors)
    return {name: g for name, g in zip(params.keys(), grads)}
