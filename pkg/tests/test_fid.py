"""FID numerics against analytic and eigen oracles, plus protocol shape."""

import numpy as np
import pytest

from charstudio.data import ingest_directory, synthetic
from charstudio.fid import (
    FidNumericsError,
    FidReport,
    IdentityPoolExtractor,
    ProtocolError,
    compare_reports,
    comparison_csv,
    comparison_text,
    evaluate_model,
    extract_features,
    fit_gaussian,
    frechet_distance,
    sqrtm_psd,
    sqrtm_trace,
    train_desk_extractor,
)
from charstudio.fid.stats import GaussianStats
from charstudio.models import ModelSpec, build_model


def rand_spd(rng, d, scale=1.0):
    a = rng.standard_normal((d, d))
    return scale * (a @ a.T / d + 0.5 * np.eye(d))


# -- fit_gaussian ------------------------------------------------------------------


def test_fit_two_points_hand_covariance():
    stats = fit_gaussian(np.array([[0.0], [2.0]]))
    assert stats.mu[0] == pytest.approx(1.0)
    assert stats.sigma[0, 0] == pytest.approx(2.0)  # unbiased: ((1)^2+(1)^2)/(2-1)


def test_fit_identical_rows_zero_covariance():
    stats = fit_gaussian(np.tile([1.5, -0.5], (6, 1)))
    np.testing.assert_allclose(stats.sigma, 0.0, atol=1e-12)


def test_fit_standard_normal_monte_carlo():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((100_000, 4))
    stats = fit_gaussian(x)
    np.testing.assert_allclose(stats.mu, 0.0, atol=0.02)
    np.testing.assert_allclose(stats.sigma, np.eye(4), atol=0.02)


def test_fit_requires_two_samples():
    with pytest.raises(FidNumericsError):
        fit_gaussian(np.ones((1, 3)))


# -- sqrtm -------------------------------------------------------------------------


def test_sqrtm_trace_identity():
    assert sqrtm_trace(np.eye(5), np.eye(5)) == pytest.approx(5.0)


def test_sqrtm_trace_1d():
    assert sqrtm_trace(np.array([[4.0]]), np.array([[9.0]])) == pytest.approx(6.0)


def test_sqrtm_trace_matches_eigen_oracle():
    rng = np.random.default_rng(7)
    for _ in range(10):
        d = int(rng.integers(2, 12))
        s1, s2 = rand_spd(rng, d), rand_spd(rng, d)
        # oracle: eigenvalues of the (non-symmetric) product S1 S2
        eigs = np.linalg.eigvals(s1 @ s2)
        oracle = np.sqrt(np.clip(eigs.real, 0, None)).sum()
        got = sqrtm_trace(s1, s2)
        assert abs(got - oracle) / oracle < 1e-8


def test_sqrtm_residual_on_random_spd():
    rng = np.random.default_rng(3)
    for _ in range(100):
        d = int(rng.integers(2, 65))
        s1, s2 = rand_spd(rng, d), rand_spd(rng, d)
        a = sqrtm_psd(s1)
        m = (a @ s2 @ a + (a @ s2 @ a).T) / 2
        s = sqrtm_psd(m)
        assert np.linalg.norm(s @ s - m) / np.linalg.norm(m) <= 1e-8


def test_sqrtm_rejects_asymmetric():
    with pytest.raises(FidNumericsError):
        sqrtm_trace(np.array([[1.0, 0.5], [0.0, 1.0]]), np.eye(2))


def test_sqrtm_rejects_negative_definite():
    with pytest.raises(FidNumericsError):
        sqrtm_trace(-np.eye(3), np.eye(3))


# -- frechet_distance -----------------------------------------------------------------


def g(mu, var, n=100):
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    sigma = np.diag(np.atleast_1d(np.asarray(var, dtype=float)))
    return GaussianStats(mu, sigma, n)


def test_identical_stats_distance_zero():
    rng = np.random.default_rng(1)
    s = fit_gaussian(rng.standard_normal((50, 6)))
    assert frechet_distance(s, s) <= 1e-6


def test_unit_mean_shift_1d():
    assert frechet_distance(g(0.0, 1.0), g(1.0, 1.0)) == pytest.approx(1.0, abs=1e-9)


def test_variance_gap_1d():
    assert frechet_distance(g(0.0, 4.0), g(0.0, 9.0)) == pytest.approx(1.0, abs=1e-9)


def test_distance_symmetric():
    rng = np.random.default_rng(5)
    s1 = fit_gaussian(rng.standard_normal((60, 5)))
    s2 = fit_gaussian(rng.standard_normal((60, 5)) * 1.4 + 0.3)
    assert abs(frechet_distance(s1, s2) - frechet_distance(s2, s1)) < 1e-8


def test_mean_term_scales_quadratically():
    base = frechet_distance(g([0.0, 0.0], [1.0, 1.0]), g([1.0, 0.0], [1.0, 1.0]))
    doubled = frechet_distance(g([0.0, 0.0], [1.0, 1.0]), g([2.0, 0.0], [1.0, 1.0]))
    assert doubled == pytest.approx(4 * base, abs=1e-9)


def test_distance_monotone_in_mean_gap():
    prev = -1.0
    for shift in (0.0, 0.5, 1.0, 2.0, 4.0):
        d = frechet_distance(g(0.0, 2.0), g(shift, 2.0))
        assert d > prev
        prev = d


def test_dimension_mismatch_rejected():
    with pytest.raises(FidNumericsError):
        frechet_distance(g(0.0, 1.0), g([0.0, 0.0], [1.0, 1.0]))


# -- extractors --------------------------------------------------------------------


def test_identity_pool_constant_image():
    ex = IdentityPoolExtractor(resolution=64, channels=1)
    imgs = np.full((2, 1, 64, 64), 0.25, dtype=np.float32)
    f = extract_features(imgs, ex)
    assert f.shape == (2, 64)
    np.testing.assert_allclose(f, 0.25, atol=1e-6)


def test_extract_features_deterministic_rows():
    ex = IdentityPoolExtractor(resolution=32, channels=1)
    rng = np.random.default_rng(0)
    img = rng.uniform(-1, 1, (1, 1, 32, 32)).astype(np.float32)
    both = extract_features(np.concatenate([img, img]), ex)
    np.testing.assert_array_equal(both[0], both[1])


def test_extract_features_empty_rejected():
    ex = IdentityPoolExtractor()
    with pytest.raises(ValueError):
        extract_features(np.zeros((0, 1, 64, 64)), ex)


def test_desk_extractor_frozen_and_stamped(tmp_path):
    from charstudio.data.loader import BatchSource

    synthetic.write_dataset(tmp_path / "d", per_class=8, res=32, seed=0)
    manifest = ingest_directory(tmp_path / "d", target_resolution=32)
    ex = train_desk_extractor(manifest, epochs=1, seed=0)
    assert ex.id.startswith("desk-cnn-")
    imgs, _ = BatchSource(manifest).gather(range(4))
    f1 = ex.features(imgs)
    f2 = ex.features(imgs)
    np.testing.assert_array_equal(f1, f2)
    assert f1.shape == (4, 64)
    ex2 = train_desk_extractor(manifest, epochs=1, seed=0)
    assert ex2.id == ex.id  # same data + seed -> same weights -> same stamp


# -- protocol ----------------------------------------------------------------------


def test_conditional_per_class_scope_cardinality(tmp_path):
    synthetic.write_dataset(tmp_path / "d", per_class=6, res=32, seed=1)
    manifest = ingest_directory(tmp_path / "d", target_resolution=32)
    spec = ModelSpec(
        family="dcgan", resolution=32, z_dim=8, base_channels=4,
        num_classes=3, conditioning="embed_concat",
    )
    bundle = build_model(spec, seed=0)
    ex = IdentityPoolExtractor(resolution=32, channels=1)
    reports = evaluate_model(bundle, manifest, ex, n_gen=12, scope="per_class", model_id="m")
    assert len(reports) == 4
    assert [r.scope for r in reports] == sorted(synthetic.CLASSES) + ["merged"]


def test_per_class_scope_requires_conditional(tmp_path):
    synthetic.write_dataset(tmp_path / "d", per_class=3, res=32, seed=2)
    manifest = ingest_directory(tmp_path / "d", target_resolution=32)
    spec = ModelSpec(family="dcgan", resolution=32, z_dim=8, base_channels=4)
    bundle = build_model(spec, seed=0)
    ex = IdentityPoolExtractor(resolution=32, channels=1)
    with pytest.raises(ProtocolError):
        evaluate_model(bundle, manifest, ex, n_gen=8, scope="per_class")


def test_memorizing_generator_scores_near_zero(tmp_path):
    # a "generator" that emits the real images gives near-identical Gaussians
    synthetic.write_dataset(tmp_path / "d", per_class=20, res=32, seed=3)
    manifest = ingest_directory(tmp_path / "d", target_resolution=32)
    ex = IdentityPoolExtractor(resolution=32, channels=1)
    from charstudio.data.loader import BatchSource

    imgs, _ = BatchSource(manifest).gather(range(len(manifest)))
    real = fit_gaussian(extract_features(imgs, ex))
    fake = fit_gaussian(extract_features(imgs.copy(), ex))
    assert frechet_distance(real, fake) < 0.5


# -- compare ------------------------------------------------------------------------


def _report(model, score, ex="desk-cnn-aaaa", scope="merged"):
    return FidReport(ex, model, scope, 100, 100, score)


def test_compare_reports_ranked_ascending():
    reports = [
        _report("WGAN", 71.25),
        _report("StyleGAN2-ada (c)", 17.53),
        _report("BigBiGAN", 45.24),
    ]
    ranked = compare_reports(reports)
    assert [r.model_id for r in ranked] == ["StyleGAN2-ada (c)", "BigBiGAN", "WGAN"]


def test_compare_single_report():
    ranked = compare_reports([_report("only", 1.0)])
    assert len(ranked) == 1


def test_compare_ties_lexicographic():
    ranked = compare_reports([_report("bbb", 2.0), _report("aaa", 2.0)])
    assert [r.model_id for r in ranked] == ["aaa", "bbb"]


def test_compare_rejects_mixed_extractors():
    with pytest.raises(ProtocolError):
        compare_reports([_report("a", 1.0, ex="e1"), _report("b", 2.0, ex="e2")])


def test_report_json_round_trip():
    r = _report("m", 3.5)
    assert FidReport.from_json(r.to_json()) == r


def test_comparison_text_and_csv():
    reports = [_report("b", 2.0), _report("a", 1.0)]
    text = comparison_text(reports)
    assert text.splitlines()[1].startswith("a")
    csv_text = comparison_csv(reports)
    assert csv_text.splitlines()[0].startswith("model,")
    assert len(csv_text.strip().splitlines()) == 3
