"""Differentiable op set shared by all model families.

Each primitive's vector-Jacobian product is written in terms of other ops in
this module, so backward passes are themselves differentiable graphs.  The
leaky-relu and abs derivatives treat the sign mask as a constant, making their
second derivative exactly zero.
"""

from __future__ import annotations

import numpy as np

from .tensor import GradError, Tensor, as_tensor

__all__ = [
    "add", "sub", "mul", "div", "neg", "pow", "exp", "log", "sqrt", "abs",
    "tanh", "sigmoid", "softplus", "relu", "leaky_relu", "cast",
    "sum", "mean", "reshape", "transpose", "broadcast_to", "concat", "index",
    "matmul", "pad2d", "im2col", "col2im", "conv2d", "embedding",
    "upsample_nearest2x", "avg_pool2d", "l2_norm", "stop_gradient",
]


def _unbroadcast(g: Tensor, shape: tuple[int, ...]) -> Tensor:
    """Sum ``g`` down to ``shape`` (adjoint of numpy broadcasting)."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = sum(g, axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = sum(g, axis=axes, keepdims=True)
    return reshape(g, shape)


def _pair(a, b) -> tuple[Tensor, Tensor]:
    """Coerce a binary-op operand pair; scalars adopt the tensor's dtype."""
    if isinstance(a, Tensor):
        return a, (b if isinstance(b, Tensor) else as_tensor(b, like=a))
    if isinstance(b, Tensor):
        return as_tensor(a, like=b), b
    return as_tensor(a), as_tensor(b)


# -- elementwise arithmetic ------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = _pair(a, b)
    out = a.data + b.data

    def vjp(g: Tensor):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return Tensor._from_op(out, (a, b), vjp)


def sub(a, b) -> Tensor:
    a, b = _pair(a, b)
    return add(a, neg(b))


def mul(a, b) -> Tensor:
    a, b = _pair(a, b)
    out = a.data * b.data

    def vjp(g: Tensor):
        return _unbroadcast(mul(g, b), a.shape), _unbroadcast(mul(g, a), b.shape)

    return Tensor._from_op(out, (a, b), vjp)


def div(a, b) -> Tensor:
    a, b = _pair(a, b)
    out = a.data / b.data

    def vjp(g: Tensor):
        ga = _unbroadcast(div(g, b), a.shape)
        gb = _unbroadcast(neg(div(mul(g, a), mul(b, b))), b.shape)
        return ga, gb

    return Tensor._from_op(out, (a, b), vjp)


def neg(a) -> Tensor:
    a = as_tensor(a)
    out = -a.data

    def vjp(g: Tensor):
        return (neg(g),)

    return Tensor._from_op(out, (a,), vjp)


def pow(a, exponent: float) -> Tensor:
    a = as_tensor(a)
    e = float(exponent)
    out = a.data ** e

    def vjp(g: Tensor):
        return (mul(g, mul(pow(a, e - 1.0), e)),)

    return Tensor._from_op(out, (a,), vjp)


def exp(a) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.data)

    def vjp(g: Tensor):
        return (mul(g, exp(a)),)

    return Tensor._from_op(out, (a,), vjp)


def log(a) -> Tensor:
    a = as_tensor(a)
    out = np.log(a.data)

    def vjp(g: Tensor):
        return (div(g, a),)

    return Tensor._from_op(out, (a,), vjp)


def sqrt(a) -> Tensor:
    a = as_tensor(a)
    out = np.sqrt(a.data)

    def vjp(g: Tensor):
        return (div(g, mul(sqrt(a), 2.0)),)

    return Tensor._from_op(out, (a,), vjp)


def abs(a) -> Tensor:
    a = as_tensor(a)
    out = np.abs(a.data)

    def vjp(g: Tensor):
        sign = Tensor(np.sign(a.data))
        return (mul(g, sign),)

    return Tensor._from_op(out, (a,), vjp)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.data)

    def vjp(g: Tensor):
        y = tanh(a)
        return (mul(g, sub(1.0, mul(y, y))),)

    return Tensor._from_op(out, (a,), vjp)


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    x = a.data
    # stable piecewise form: 1/(1+e^-x) for x>=0, e^x/(1+e^x) for x<0
    ex = np.exp(-np.abs(x))
    out = np.where(x >= 0, 1.0 / (1.0 + ex), ex / (1.0 + ex))

    def vjp(g: Tensor):
        s = sigmoid(a)
        return (mul(g, mul(s, sub(1.0, s))),)

    return Tensor._from_op(out.astype(x.dtype), (a,), vjp)


def softplus(a) -> Tensor:
    a = as_tensor(a)
    x = a.data
    out = np.maximum(x, 0) + np.log1p(np.exp(-np.abs(x)))

    def vjp(g: Tensor):
        return (mul(g, sigmoid(a)),)

    return Tensor._from_op(out.astype(x.dtype), (a,), vjp)


def leaky_relu(a, slope: float = 0.2) -> Tensor:
    a = as_tensor(a)
    mask = np.where(a.data > 0, 1.0, slope).astype(a.data.dtype)
    out = a.data * mask

    def vjp(g: Tensor):
        return (mul(g, Tensor(mask)),)

    return Tensor._from_op(out, (a,), vjp)


def relu(a) -> Tensor:
    return leaky_relu(a, slope=0.0)


def cast(a, dtype) -> Tensor:
    a = as_tensor(a)
    dtype = np.dtype(dtype)
    out = a.data.astype(dtype)

    def vjp(g: Tensor):
        return (cast(g, a.data.dtype),)

    return Tensor._from_op(out, (a,), vjp)


def stop_gradient(a) -> Tensor:
    return as_tensor(a).detach()


# -- reductions and shape ops -----------------------------------------------------


def sum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = np.sum(a.data, axis=axis, keepdims=keepdims)
    in_shape = a.shape

    def vjp(g: Tensor):
        if axis is None:
            gg = reshape(g, (1,) * len(in_shape)) if in_shape else g
            return (broadcast_to(gg, in_shape),)
        axes = axis if isinstance(axis, tuple) else (axis,)
        axes = tuple(ax % len(in_shape) for ax in axes)
        if not keepdims:
            kept = [1 if i in axes else n for i, n in enumerate(in_shape)]
            g = reshape(g, tuple(kept))
        return (broadcast_to(g, in_shape),)

    return Tensor._from_op(np.asarray(out), (a,), vjp)


def mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    if axis is None:
        count = a.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = 1
        for ax in axes:
            count *= a.shape[ax % a.ndim]
    if count == 0:
        raise GradError("mean over empty axis")
    return div(sum(a, axis=axis, keepdims=keepdims), float(count))


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    shape = tuple(shape)
    out = a.data.reshape(shape)
    in_shape = a.shape

    def vjp(g: Tensor):
        return (reshape(g, in_shape),)

    return Tensor._from_op(out, (a,), vjp)


def transpose(a, axes=None) -> Tensor:
    a = as_tensor(a)
    out = np.transpose(a.data, axes)
    if axes is None:
        inv = None
    else:
        inv = tuple(np.argsort(axes))

    def vjp(g: Tensor):
        return (transpose(g, inv),)

    return Tensor._from_op(np.ascontiguousarray(out), (a,), vjp)


def broadcast_to(a, shape) -> Tensor:
    a = as_tensor(a)
    shape = tuple(shape)
    out = np.broadcast_to(a.data, shape).copy()
    in_shape = a.shape

    def vjp(g: Tensor):
        return (_unbroadcast(g, in_shape),)

    return Tensor._from_op(out, (a,), vjp)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = tuple(as_tensor(t) for t in tensors)
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]

    def vjp(g: Tensor):
        grads = []
        start = 0
        for n in sizes:
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(start, start + n)
            grads.append(index(g, tuple(sl)))
            start += n
        return tuple(grads)

    return Tensor._from_op(out, tensors, vjp)


def index(a, idx) -> Tensor:
    """Basic slicing/integer indexing; adjoint scatters into zeros."""
    a = as_tensor(a)
    out = a.data[idx]
    in_shape = a.shape

    def vjp(g: Tensor):
        return (_scatter(g, idx, in_shape),)

    return Tensor._from_op(np.ascontiguousarray(out), (a,), vjp)


def _is_basic_index(idx) -> bool:
    parts = idx if isinstance(idx, tuple) else (idx,)
    return all(isinstance(p, (slice, int, type(Ellipsis), type(None))) for p in parts)


def _scatter(g: Tensor, idx, shape) -> Tensor:
    out = np.zeros(shape, dtype=g.data.dtype)
    if _is_basic_index(idx):
        out[idx] += g.data
    else:
        # fancy indices may repeat (embedding rows): unbuffered accumulate
        np.add.at(out, idx, g.data)

    def vjp(gg: Tensor):
        return (index(gg, idx),)

    return Tensor._from_op(out, (g,), vjp)


# -- linear algebra ----------------------------------------------------------------


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise GradError("matmul operands must be at least 2-D")
    out = a.data @ b.data

    def vjp(g: Tensor):
        def swap(t: Tensor) -> Tensor:
            axes = list(range(t.ndim))
            axes[-1], axes[-2] = axes[-2], axes[-1]
            return transpose(t, tuple(axes))

        ga = matmul(g, swap(b))
        gb = matmul(swap(a), g)
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return Tensor._from_op(out, (a, b), vjp)


# -- image-structured ops ------------------------------------------------------------


def pad2d(a, pad: int) -> Tensor:
    """Zero-pad the two trailing spatial dims of an N×C×H×W tensor."""
    a = as_tensor(a)
    if pad == 0:
        return a
    width = [(0, 0)] * (a.ndim - 2) + [(pad, pad), (pad, pad)]
    out = np.pad(a.data, width)

    def vjp(g: Tensor):
        sl = (slice(None),) * (a.ndim - 2) + (
            slice(pad, g.shape[-2] - pad),
            slice(pad, g.shape[-1] - pad),
        )
        return (index(g, sl),)

    return Tensor._from_op(out, (a,), vjp)


def _conv_out_size(n: int, k: int, stride: int) -> int:
    return (n - k) // stride + 1


def im2col(a, kh: int, kw: int, stride: int = 1) -> Tensor:
    """Unfold N×C×H×W into N×(C·kh·kw)×L patch columns (L = OH·OW)."""
    a = as_tensor(a)
    n, c, h, w = a.shape
    oh = _conv_out_size(h, kh, stride)
    ow = _conv_out_size(w, kw, stride)
    if oh <= 0 or ow <= 0:
        raise GradError(f"im2col output dims must be positive, got {oh}x{ow}")
    cols = np.empty((n, c, kh, kw, oh, ow), dtype=a.data.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = a.data[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride]
    out = cols.reshape(n, c * kh * kw, oh * ow)
    in_shape = a.shape

    def vjp(g: Tensor):
        return (col2im(g, in_shape, kh, kw, stride),)

    return Tensor._from_op(out, (a,), vjp)


def col2im(cols, img_shape, kh: int, kw: int, stride: int = 1) -> Tensor:
    """Adjoint of :func:`im2col`: fold patch columns back with overlap-add."""
    cols = as_tensor(cols)
    n, c, h, w = img_shape
    oh = _conv_out_size(h, kh, stride)
    ow = _conv_out_size(w, kw, stride)
    data = cols.data.reshape(n, c, kh, kw, oh, ow)
    out = np.zeros(img_shape, dtype=cols.data.dtype)
    for i in range(kh):
        for j in range(kw):
            out[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += data[:, :, i, j]

    def vjp(g: Tensor):
        return (im2col(g, kh, kw, stride),)

    return Tensor._from_op(out, (cols,), vjp)


def conv2d(a, weight, bias=None, stride: int = 1, pad: int = 0) -> Tensor:
    """2-D cross-correlation over N×Cin×H×W with a Cout×Cin×Kh×Kw kernel."""
    a, weight = as_tensor(a), as_tensor(weight)
    if a.ndim != 4 or weight.ndim != 4:
        raise GradError("conv2d expects 4-D input and kernel")
    n, cin, h, w = a.shape
    cout, cin_k, kh, kw = weight.shape
    if cin != cin_k:
        raise GradError(f"conv2d channel mismatch: input {cin} vs kernel {cin_k}")
    if stride < 1:
        raise GradError("conv2d stride must be >= 1")
    oh = _conv_out_size(h + 2 * pad, kh, stride)
    ow = _conv_out_size(w + 2 * pad, kw, stride)
    if oh <= 0 or ow <= 0:
        raise GradError(f"conv2d output dims must be positive, got {oh}x{ow}")
    cols = im2col(pad2d(a, pad), kh, kw, stride)  # N x (Cin*kh*kw) x L
    w2 = reshape(weight, (cout, cin * kh * kw))
    out = matmul(w2, cols)  # broadcasting: N x Cout x L
    out = reshape(out, (n, cout, oh, ow))
    if bias is not None:
        out = add(out, reshape(as_tensor(bias), (1, cout, 1, 1)))
    return out


def embedding(table, indices) -> Tensor:
    """Row lookup into a (num_embeddings, dim) table; adjoint scatter-adds."""
    table = as_tensor(table)
    idx = np.asarray(indices, dtype=np.int64)
    if np.any(idx < 0) or np.any(idx >= table.shape[0]):
        raise GradError("embedding index out of range")
    return index(table, (idx,))


def upsample_nearest2x(a) -> Tensor:
    a = as_tensor(a)
    n, c, h, w = a.shape
    x = reshape(a, (n, c, h, 1, w, 1))
    x = broadcast_to(x, (n, c, h, 2, w, 2))
    return reshape(x, (n, c, 2 * h, 2 * w))


def avg_pool2d(a, factor: int) -> Tensor:
    a = as_tensor(a)
    n, c, h, w = a.shape
    if h % factor or w % factor:
        raise GradError(f"avg_pool2d: {h}x{w} not divisible by {factor}")
    x = reshape(a, (n, c, h // factor, factor, w // factor, factor))
    return mean(x, axis=(3, 5))


def l2_norm(a, axis=None, keepdims: bool = False, eps: float = 0.0) -> Tensor:
    """Euclidean norm; ``eps`` guards the sqrt for gradient stability at 0."""
    a = as_tensor(a)
    sq = sum(mul(a, a), axis=axis, keepdims=keepdims)
    if eps:
        sq = add(sq, eps)
    return sqrt(sq)
