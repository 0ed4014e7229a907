"""Finite-difference verification of every differentiable op (64-bit)."""

import numpy as np
import pytest

from charstudio.grad import Tensor, grad, no_grad, ops, set_debug_checks
from charstudio.grad.check import check_gradients


def test_sum_of_squares_gradient():
    x = Tensor(np.array([1.0, -2.0, 3.0]), requires_grad=True)
    loss = ops.sum(ops.mul(x, x))
    (g,) = grad(loss, [x])
    np.testing.assert_allclose(g.data, 2 * x.data)


def test_unused_parameter_gets_zero_gradient():
    x = Tensor(np.ones(3), requires_grad=True)
    unused = Tensor(np.ones(2), requires_grad=True)
    loss = ops.sum(x)
    gx, gu = grad(loss, [x, unused])
    np.testing.assert_array_equal(gu.data, np.zeros(2))
    np.testing.assert_array_equal(gx.data, np.ones(3))


def test_backward_populates_leaf_grads():
    x = Tensor(np.array([2.0, 5.0]), requires_grad=True)
    loss = ops.sum(ops.mul(x, x))
    loss.backward()
    np.testing.assert_allclose(x.grad.data, 2 * x.data)


def test_non_scalar_backward_rejected():
    x = Tensor(np.ones(3), requires_grad=True)
    y = ops.mul(x, 2.0)
    with pytest.raises(Exception):
        y.backward()


@pytest.mark.parametrize(
    "name,fn,shapes",
    [
        ("add", lambda ts: ops.sum(ops.add(ts[0], ts[1])), [(3, 4), (3, 4)]),
        ("add_broadcast", lambda ts: ops.sum(ops.mul(ops.add(ts[0], ts[1]), ts[0])), [(3, 4), (1, 4)]),
        ("sub", lambda ts: ops.sum(ops.mul(ops.sub(ts[0], ts[1]), ts[1])), [(2, 5), (2, 5)]),
        ("mul", lambda ts: ops.sum(ops.mul(ts[0], ts[1])), [(4,), (4,)]),
        ("div", lambda ts: ops.sum(ops.div(ts[0], ops.add(ops.mul(ts[1], ts[1]), 1.0))), [(3,), (3,)]),
        ("neg", lambda ts: ops.sum(ops.mul(ops.neg(ts[0]), ts[0])), [(6,)]),
        ("pow", lambda ts: ops.sum(ops.pow(ops.add(ops.mul(ts[0], ts[0]), 0.5), 3.0)), [(5,)]),
        ("exp", lambda ts: ops.sum(ops.exp(ts[0])), [(4,)]),
        ("log", lambda ts: ops.sum(ops.log(ops.add(ops.mul(ts[0], ts[0]), 1.0))), [(4,)]),
        ("sqrt", lambda ts: ops.sum(ops.sqrt(ops.add(ops.mul(ts[0], ts[0]), 0.5))), [(4,)]),
        ("tanh", lambda ts: ops.sum(ops.tanh(ts[0])), [(7,)]),
        ("sigmoid", lambda ts: ops.sum(ops.sigmoid(ts[0])), [(7,)]),
        ("softplus", lambda ts: ops.sum(ops.softplus(ts[0])), [(7,)]),
        ("matmul", lambda ts: ops.sum(ops.matmul(ts[0], ts[1])), [(3, 4), (4, 2)]),
        ("matmul_batched", lambda ts: ops.sum(ops.matmul(ts[0], ts[1])), [(2, 3), (5, 3, 4)]),
        ("reshape_transpose", lambda ts: ops.sum(ops.mul(ops.transpose(ops.reshape(ts[0], (4, 3))), ts[1])), [(3, 4), (3, 4)]),
        ("concat", lambda ts: ops.sum(ops.mul(ops.concat([ts[0], ts[1]], axis=1), ops.concat([ts[1], ts[0]], axis=1))), [(2, 3), (2, 3)]),
        ("index", lambda ts: ops.sum(ops.mul(ts[0][:, 1:3], ts[0][:, 0:2])), [(3, 4)]),
        ("broadcast", lambda ts: ops.sum(ops.mul(ops.broadcast_to(ts[0], (4, 3, 2)), ts[1])), [(3, 2), (4, 3, 2)]),
        ("mean_axis", lambda ts: ops.sum(ops.mul(ops.mean(ts[0], axis=1), ops.mean(ts[0], axis=0))), [(3, 3)]),
        ("embedding", lambda ts: ops.sum(ops.mul(ops.embedding(ts[0], [0, 2, 2, 1]), 1.5)), [(3, 4)]),
        ("upsample", lambda ts: ops.sum(ops.mul(ops.upsample_nearest2x(ts[0]), ops.upsample_nearest2x(ts[0]))), [(1, 2, 3, 3)]),
        ("avg_pool", lambda ts: ops.sum(ops.pow(ops.avg_pool2d(ts[0], 2), 2.0)), [(1, 2, 4, 4)]),
        ("l2_norm", lambda ts: ops.l2_norm(ts[0], eps=1e-12), [(6,)]),
        ("pad", lambda ts: ops.sum(ops.pow(ops.pad2d(ts[0], 2), 2.0)), [(1, 1, 3, 3)]),
    ],
)
def test_op_matches_finite_differences(name, fn, shapes):
    worst = check_gradients(fn, shapes, seed=hash(name) % 2**31, rtol=1e-3)
    assert worst < 1e-3


def test_conv2d_gradient_matches_finite_differences():
    def fn(ts):
        out = ops.conv2d(ts[0], ts[1], bias=ts[2], stride=2, pad=1)
        return ops.sum(ops.tanh(out))

    worst = check_gradients(fn, [(2, 3, 5, 5), (4, 3, 3, 3), (4,)], seed=11, rtol=1e-3)
    assert worst < 1e-3


def test_leaky_relu_gradient_matches_finite_differences():
    # offset inputs away from the kink where central differences are invalid
    def fn(ts):
        shifted = ops.add(ts[0], 0.05)
        return ops.sum(ops.mul(ops.leaky_relu(shifted, 0.2), shifted))

    worst = check_gradients(fn, [(40,)], seed=3, rtol=1e-3)
    assert worst < 1e-3


def test_conv2d_is_linear():
    rng = np.random.default_rng(0)
    x = Tensor(rng.standard_normal((1, 2, 6, 6)))
    y = Tensor(rng.standard_normal((1, 2, 6, 6)))
    k = Tensor(rng.standard_normal((3, 2, 3, 3)))
    a, b = 1.7, -0.4
    lhs = ops.conv2d(ops.add(ops.mul(x, a), ops.mul(y, b)), k)
    rhs = ops.add(ops.mul(ops.conv2d(x, k), a), ops.mul(ops.conv2d(y, k), b))
    np.testing.assert_allclose(lhs.data, rhs.data, atol=1e-6)


def test_conv2d_interior_average_of_constant():
    x = Tensor(np.full((1, 1, 5, 5), 3.25))
    k = Tensor(np.full((1, 1, 3, 3), 1.0 / 9.0))
    out = ops.conv2d(x, k, pad=1)
    np.testing.assert_allclose(out.data[0, 0, 1:-1, 1:-1], 3.25, atol=1e-6)


def test_conv2d_channel_mismatch_raises():
    x = Tensor(np.zeros((1, 3, 4, 4)))
    k = Tensor(np.zeros((2, 4, 3, 3)))
    with pytest.raises(Exception, match="channel"):
        ops.conv2d(x, k)


def test_conv2d_degenerate_output_raises():
    x = Tensor(np.zeros((1, 1, 2, 2)))
    k = Tensor(np.zeros((1, 1, 5, 5)))
    with pytest.raises(Exception, match="positive"):
        ops.conv2d(x, k)


def test_debug_mode_flags_nonfinite():
    set_debug_checks(True)
    try:
        x = Tensor(np.array([1.0, 0.0]))
        with pytest.raises(FloatingPointError):
            ops.log(x)  # log(0) = -inf
    finally:
        set_debug_checks(False)


def test_no_grad_blocks_recording():
    x = Tensor(np.ones(3), requires_grad=True)
    with no_grad():
        y = ops.mul(x, 2.0)
    assert not y.requires_grad


def test_float32_stays_float32():
    x = Tensor(np.ones(3, dtype=np.float32), requires_grad=True)
    y = ops.sum(ops.mul(ops.add(x, 1.0), 0.5))
    assert y.data.dtype == np.float32
    (g,) = grad(y, [x])
    assert g.data.dtype == np.float32
