"""Optimizer semantics, weight clipping, and spectral normalization."""

import numpy as np
import pytest

from charstudio.grad import (
    Parameter,
    adam_state,
    clip_parameters,
    optimizer_step,
    spectral_normalize,
)


def _params(values):
    return {name: Parameter(v, name=name) for name, v in values.items()}


def test_zero_gradient_is_fixed_point():
    params = _params({"w": np.array([1.0, -2.0])})
    state = adam_state(lr=0.1)
    optimizer_step(params, {"w": np.zeros(2)}, state)
    np.testing.assert_array_equal(params["w"].data, [1.0, -2.0])
    np.testing.assert_array_equal(state.moments1["w"], np.zeros(2))
    assert state.step_count == 1


def test_first_adam_step_magnitude_is_lr():
    lr = 0.05
    params = _params({"w": np.array([0.0])})
    state = adam_state(lr=lr)
    optimizer_step(params, {"w": np.array([7.3])}, state)
    # bias correction makes the first update lr * g / (|g| + eps) ~= lr
    assert abs(abs(params["w"].data[0]) - lr) < 1e-6


def test_identical_steps_are_deterministic():
    def run():
        params = _params({"w": np.array([0.3, -0.8])})
        state = adam_state(lr=0.01)
        for _ in range(2):
            optimizer_step(params, {"w": np.array([0.5, 0.25])}, state)
        return params["w"].data.copy(), state.moments1["w"].copy(), state.moments2["w"].copy()

    a = run()
    b = run()
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


def test_missing_gradient_raises():
    params = _params({"w": np.zeros(2)})
    with pytest.raises(KeyError):
        optimizer_step(params, {}, adam_state())


def test_grad_shape_mismatch_raises():
    params = _params({"w": np.zeros(2)})
    with pytest.raises(ValueError):
        optimizer_step(params, {"w": np.zeros(3)}, adam_state())


def test_clip_parameters_clamps_and_is_idempotent():
    p = Parameter(np.array([0.05, -0.5, 0.003]), name="w")
    clip_parameters([p], 0.01)
    np.testing.assert_allclose(p.data, [0.01, -0.01, 0.003])
    before = p.data.copy()
    clip_parameters([p], 0.01)
    np.testing.assert_array_equal(p.data, before)


def test_clip_rejects_nonpositive_bound():
    with pytest.raises(ValueError):
        clip_parameters([Parameter(np.zeros(1), name="w")], 0.0)


def test_spectral_normalize_diagonal():
    w = np.diag([3.0, 1.0])
    normed, _, sigma = spectral_normalize(w, converge_tol=1e-12)
    assert abs(sigma - 3.0) < 1e-9
    np.testing.assert_allclose(np.linalg.svd(normed, compute_uv=False)[0], 1.0, atol=1e-9)


def test_spectral_normalize_orthogonal_unchanged():
    rng = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    normed, _, sigma = spectral_normalize(q, converge_tol=1e-12)
    assert abs(sigma - 1.0) < 1e-7
    np.testing.assert_allclose(normed, q, atol=1e-6)


def test_spectral_normalize_matches_svd_oracle():
    rng = np.random.default_rng(17)
    w = rng.standard_normal((8, 8))
    _, _, sigma = spectral_normalize(w, converge_tol=1e-14)
    sigma_svd = np.linalg.svd(w, compute_uv=False)[0]
    assert abs(sigma - sigma_svd) / sigma_svd < 1e-6


def test_spectral_normalize_zero_matrix_flagged():
    w = np.zeros((3, 3))
    normed, _, sigma = spectral_normalize(w)
    assert sigma == 0.0
    np.testing.assert_array_equal(normed, w)


def test_spectral_normalize_output_sigma_at_most_one():
    rng = np.random.default_rng(23)
    for _ in range(5):
        w = rng.standard_normal((10, 7)) * rng.uniform(0.1, 10)
        normed, _, _ = spectral_normalize(w, converge_tol=1e-12)
        assert np.linalg.svd(normed.reshape(10, -1), compute_uv=False)[0] <= 1 + 1e-4
