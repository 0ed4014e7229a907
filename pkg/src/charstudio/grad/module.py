"""Parameter containers and a minimal module tree for the model zoo."""

from __future__ import annotations

from typing import Iterator, Optional

import numpy as np

from .tensor import Tensor


class Parameter:
    """Named, shape-frozen weight tensor."""

    __slots__ = ("tensor", "name", "trainable")

    def __init__(self, value, name: str = "", trainable: bool = True, dtype=None):
        arr = np.asarray(value, dtype=dtype)
        self.tensor = Tensor(arr, requires_grad=trainable)
        self.name = name
        self.trainable = trainable

    @property
    def data(self) -> np.ndarray:
        return self.tensor.data

    @property
    def shape(self) -> tuple[int, ...]:
        return self.tensor.data.shape

    @property
    def grad(self) -> Optional[Tensor]:
        return self.tensor.grad

    def set_data(self, value: np.ndarray) -> None:
        value = np.asarray(value, dtype=self.tensor.data.dtype)
        if value.shape != self.tensor.data.shape:
            raise ValueError(
                f"parameter {self.name!r}: shape {value.shape} != {self.tensor.data.shape}"
            )
        self.tensor.data = value

    def zero_grad(self) -> None:
        self.tensor.grad = None

    def __repr__(self) -> str:
        kind = "param" if self.trainable else "buffer"
        return f"Parameter({self.name!r}, shape={self.shape}, {kind})"


class Module:
    """Tree of parameters/buffers with hierarchical slash-separated names."""

    def __init__(self):
        self._params: dict[str, Parameter] = {}
        self._children: dict[str, "Module"] = {}
        self.training = True

    def add_param(self, name: str, value, trainable: bool = True, dtype=None) -> Parameter:
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        p = Parameter(value, name=name, trainable=trainable, dtype=dtype)
        self._params[name] = p
        return p

    def add_child(self, name: str, child: "Module") -> "Module":
        if name in self._children:
            raise ValueError(f"duplicate child name {name!r}")
        self._children[name] = child
        return child

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        for name, p in self._params.items():
            yield (f"{prefix}{name}", p)
        for cname, child in self._children.items():
            yield from child.named_parameters(prefix=f"{prefix}{cname}/")

    def parameters(self, trainable_only: bool = True) -> list[Parameter]:
        return [
            p
            for _, p in self.named_parameters()
            if p.trainable or not trainable_only
        ]

    def param_dict(self) -> dict[str, Parameter]:
        pairs = list(self.named_parameters())
        out = dict(pairs)
        if len(out) != len(pairs):
            raise ValueError("parameter names collide across the module tree")
        return out

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray], strict: bool = True) -> list[str]:
        """Copy matching name+shape entries in; returns names left untouched."""
        params = dict(self.named_parameters())
        missing = []
        for name, p in params.items():
            if name in state and state[name].shape == p.shape:
                p.set_data(state[name])
            else:
                missing.append(name)
        if strict and missing:
            raise KeyError(f"state dict missing/mismatched entries: {missing[:8]}")
        return missing

    def train(self, mode: bool = True) -> "Module":
        self.training = mode
        for child in self._children.values():
            child.train(mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def zero_grad(self) -> None:
        for _, p in self.named_parameters():
            p.zero_grad()

    def num_params(self, trainable_only: bool = True) -> int:
        return sum(
            p.data.size
            for _, p in self.named_parameters()
            if p.trainable or not trainable_only
        )

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)
