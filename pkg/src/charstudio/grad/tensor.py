"""Tape-based reverse-mode autodiff over numpy arrays.

Every differentiable primitive records its parents together with a vector-
Jacobian closure expressed in terms of further Tensor ops, so gradients are
themselves graph nodes and can be differentiated again (needed for the
gradient-penalty objective, which backpropagates through an input gradient).
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

FLOAT_DTYPES = (np.float32, np.float64)
DEFAULT_DTYPE = np.float32

_state = threading.local()


def _grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


def _debug_checks() -> bool:
    return getattr(_state, "debug_checks", False)


@contextmanager
def no_grad():
    """Disable graph recording inside the block (pure forward evaluation)."""
    prev = _grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = prev


def set_debug_checks(enabled: bool) -> None:
    """When on, every primitive asserts its output is free of NaN/Inf."""
    _state.debug_checks = bool(enabled)


class GradError(RuntimeError):
    """Raised for malformed graphs or gradient requests."""


def _coerce(data, dtype=None) -> np.ndarray:
    arr = np.asarray(data)
    if dtype is not None:
        return np.ascontiguousarray(arr, dtype=dtype)
    if arr.dtype in FLOAT_DTYPES:
        return arr
    return arr.astype(DEFAULT_DTYPE)


class Tensor:
    """Dense real-valued tensor, optionally tracked on the autodiff tape."""

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        self.data = _coerce(data, dtype)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[Tensor] = None
        self._parents: tuple[Tensor, ...] = ()
        self._vjp: Optional[Callable[[Tensor], Sequence[Optional[Tensor]]]] = None

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _from_op(data: np.ndarray, parents: tuple["Tensor", ...], vjp) -> "Tensor":
        if _debug_checks() and not np.all(np.isfinite(data)):
            raise FloatingPointError("non-finite value produced by a forward op")
        out = Tensor.__new__(Tensor)
        out.data = data
        out.grad = None
        if _grad_enabled() and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._vjp = vjp
        else:
            out.requires_grad = False
            out._parents = ()
            out._vjp = None
        return out

    # -- properties ------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def is_leaf(self) -> bool:
        return self._vjp is None

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def astype(self, dtype) -> "Tensor":
        from . import ops

        return ops.cast(self, dtype)

    def __repr__(self) -> str:
        flag = ", grad" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype.name}{flag})"

    # -- operator sugar (delegates to ops) --------------------------------------

    def __add__(self, other):
        from . import ops

        return ops.add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        from . import ops

        return ops.mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        from . import ops

        return ops.sub(self, other)

    def __rsub__(self, other):
        from . import ops

        return ops.sub(other, self)

    def __truediv__(self, other):
        from . import ops

        return ops.div(self, other)

    def __rtruediv__(self, other):
        from . import ops

        return ops.div(other, self)

    def __neg__(self):
        from . import ops

        return ops.neg(self)

    def __pow__(self, exponent):
        from . import ops

        return ops.pow(self, exponent)

    def __getitem__(self, idx):
        from . import ops

        return ops.index(self, idx)

    def reshape(self, *shape):
        from . import ops

        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, axes=None):
        from . import ops

        return ops.transpose(self, axes)

    def sum(self, axis=None, keepdims=False):
        from . import ops

        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        from . import ops

        return ops.mean(self, axis=axis, keepdims=keepdims)

    # -- autodiff ---------------------------------------------------------------

    def backward(self) -> None:
        """Backpropagate from a scalar, populating ``.grad`` on reachable leaves."""
        grads = grad(self, None, create_graph=False, accumulate=True)
        del grads

    def zero_grad(self) -> None:
        self.grad = None


def as_tensor(value, like: Optional[Tensor] = None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    dtype = like.data.dtype if like is not None else None
    return Tensor(np.asarray(value, dtype=dtype))


def _topo_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def grad(
    output: Tensor,
    inputs: Optional[Iterable[Tensor]],
    create_graph: bool = False,
    accumulate: bool = False,
) -> Optional[list[Tensor]]:
    """Reverse-mode gradients of a scalar ``output``.

    With ``inputs`` given, returns one gradient tensor per input (zeros for
    inputs the output does not depend on).  With ``accumulate``, also adds
    gradients into ``.grad`` of every reachable leaf that requires grad.
    ``create_graph`` records the backward pass itself so the result can be
    differentiated again.
    """
    from . import ops

    if output.size != 1:
        raise GradError(f"backward requires a scalar, got shape {output.shape}")
    if not output.requires_grad:
        raise GradError("output does not require grad (no path to any parameter)")

    order = _topo_order(output)
    grads: dict[int, Tensor] = {
        id(output): Tensor(np.ones(output.shape, dtype=output.data.dtype))
    }

    ctx = _noop_context() if create_graph else no_grad()
    with ctx:
        for node in reversed(order):
            g = grads.get(id(node))
            if g is None:
                continue
            if node._vjp is not None:
                parent_grads = node._vjp(g)
                for parent, pg in zip(node._parents, parent_grads):
                    if pg is None or not parent.requires_grad:
                        continue
                    prev = grads.get(id(parent))
                    grads[id(parent)] = pg if prev is None else ops.add(prev, pg)
            elif accumulate:
                node.grad = g if node.grad is None else Tensor(node.grad.data + g.data)

    if inputs is None:
        return None
    result = []
    for inp in inputs:
        g = grads.get(id(inp))
        if g is None:
            g = Tensor(np.zeros(inp.shape, dtype=inp.data.dtype))
        result.append(g)
    return result


@contextmanager
def _noop_context():
    yield
