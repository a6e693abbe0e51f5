import json

import numpy as np
import pytest

from manifactor import datasets
from manifactor.errors import InvalidParameterError, RankDeficiencyError

SQRT_PI = float(np.sqrt(np.pi))


def test_rectangle_latent_ranges():
    c = datasets.sample_rectangle(10000, 1 + SQRT_PI, 1.5, 0.1, seed=7)
    assert c.latent[:, 0].min() >= 0 and c.latent[:, 0].max() <= 1 + SQRT_PI
    assert c.latent[:, 1].min() >= 0 and c.latent[:, 1].max() <= 1.5
    assert c.points.shape == (10000, 3)


def test_rectangle_zero_noise_single_point():
    c = datasets.sample_rectangle(1, 1, 1, 0.0, seed=0)
    assert c.points[0, 2] == 0.0


def test_rectangle_mean_matches_monte_carlo():
    n = 10000
    c = datasets.sample_rectangle(n, 1, 1, 0.0, seed=3)
    # oracle: direct recomputation from the same seeded stream
    oracle = np.random.default_rng(3).uniform(0, 1, size=n)
    assert np.allclose(c.latent[:, 0], oracle)
    std = oracle.std()
    assert abs(c.latent[:, 0].mean() - 0.5) <= 3 * std / np.sqrt(n)


def test_rectangle_determinism():
    a = datasets.sample_rectangle(100, 2, 1, 0.1, seed=42)
    b = datasets.sample_rectangle(100, 2, 1, 0.1, seed=42)
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.latent, b.latent)


def test_rectangle_isotropic_noise_differs():
    a = datasets.sample_rectangle(100, 2, 1, 0.1, seed=1)
    b = datasets.sample_rectangle(100, 2, 1, 0.1, seed=1, isotropic_noise=True)
    assert not np.array_equal(a.points[:, 0], b.points[:, 0])
    assert np.array_equal(a.latent, b.latent)


def test_rectangle_rejects_bad_sides():
    with pytest.raises(InvalidParameterError):
        datasets.sample_rectangle(10, -1, 1)
    with pytest.raises(InvalidParameterError):
        datasets.sample_rectangle(0, 1, 1)


def test_torus_embedding_identity():
    c = datasets.sample_torus(10000, 2, 0.7, seed=1)
    x, y, z = c.points.T
    resid = (np.sqrt(x**2 + y**2) - 2) ** 2 + z**2 - 0.7**2
    assert np.max(np.abs(resid)) <= 1e-12


def test_torus_symmetry_mean_z():
    c = datasets.sample_torus(10000, 2, 0.7, seed=1)
    assert abs(c.points[:, 2].mean()) <= 3 * 0.7 / np.sqrt(10000)


def test_torus_origin_angles():
    # latent (0, 0) maps to (R + r, 0, 0)
    th = np.deg2rad(0.0)
    assert np.allclose([(2 + 1) * np.cos(th), 0, 0], [3, 0, 0])
    c = datasets.sample_torus(1, 2, 1, seed=0)
    theta, psi = np.deg2rad(c.latent[0])
    expect = [(2 + np.cos(psi)) * np.cos(theta),
              (2 + np.cos(psi)) * np.sin(theta), np.sin(psi)]
    assert np.allclose(c.points[0], expect)


def test_torus_rejects_self_intersecting():
    with pytest.raises(InvalidParameterError):
        datasets.sample_torus(10, 1, 1)
    with pytest.raises(InvalidParameterError):
        datasets.sample_torus(10, 0.5, 1)


def test_cylinder_identities_and_independence():
    c = datasets.sample_cylinder(5000, 1, 2, seed=5)
    x, y, _ = c.points.T
    assert np.max(np.abs(x**2 + y**2 - 1)) <= 1e-12
    corr = np.corrcoef(c.latent[:, 0], c.latent[:, 1])[0, 1]
    assert abs(corr) < 0.05


def test_latent_marginals_uniform_ks():
    n = 10000
    c = datasets.sample_rectangle(n, 2.0, 1.5, 0.0, seed=11)
    for col, hi in ((0, 2.0), (1, 1.5)):
        u = np.sort(c.latent[:, col]) / hi
        ks = np.max(np.abs(u - np.arange(1, n + 1) / n))
        assert ks <= 2 / np.sqrt(n)
    t = datasets.sample_torus(n, 2, 0.7, seed=12)
    for col in (0, 1):
        u = np.sort(t.latent[:, col]) / 360.0
        ks = np.max(np.abs(u - np.arange(1, n + 1) / n))
        assert ks <= 2 / np.sqrt(n)


def test_surrogate_render_contract():
    c = datasets.render_image_surrogate(1, 64, 0.0, seed=0)
    assert c.points.shape == (1, 64 * 64)
    assert c.points.min() >= 0.0 and c.points.max() <= 1.0


def test_surrogate_rotation_has_full_period():
    # blob-based rotation feature: theta=0 and theta=180 must differ
    i0 = datasets._render_frames([0.0], [0.0], 64)
    i180 = datasets._render_frames([180.0], [0.0], 64)
    i360 = datasets._render_frames([360.0], [0.0], 64)
    assert np.max(np.abs(i0 - i180)) > 0.5
    assert np.allclose(i0, i360, atol=1e-10)


def test_surrogate_stretch_visible_over_noise():
    lo = datasets._render_frames([90.0], [-20.0], 64)
    hi = datasets._render_frames([90.0], [20.0], 64)
    assert np.mean(np.abs(hi - lo)) > 0.01  # well above the 0.1-noise mean effect


def test_surrogate_rejects_small_side():
    with pytest.raises(InvalidParameterError):
        datasets.render_image_surrogate(1, 8)


def test_pca_whiten_idempotent_on_white_data():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((5000, 3))
    X -= X.mean(axis=0)
    c = datasets.PointCloud(X)
    w = datasets.pca_whiten(c, 3)
    assert np.allclose(w.points.var(axis=0, ddof=1), 1.0, atol=1e-9)


def test_pca_whiten_output_dim_and_decorrelation():
    c = datasets.render_image_surrogate(300, 32, 0.01, seed=2)
    w = datasets.pca_whiten(c, 4)
    assert w.points.shape == (300, 4)
    cov = np.cov(w.points.T)
    off = cov - np.diag(np.diag(cov))
    assert np.max(np.abs(off)) <= 1e-6 * np.max(np.diag(cov))


def test_pca_whiten_rank_deficient():
    base = np.outer(np.arange(50, dtype=float), [1.0, 2.0, 3.0])
    with pytest.raises(RankDeficiencyError) as exc:
        datasets.pca_whiten(datasets.PointCloud(base), 2)
    assert exc.value.achieved == 1


def test_cloud_roundtrip(tmp_path):
    c = datasets.sample_rectangle(50, 1, 1, 0.1, seed=9)
    datasets.write_cloud(c, tmp_path)
    back = datasets.read_cloud(tmp_path)
    assert np.allclose(back.points, c.points)
    assert np.allclose(back.latent, c.latent)
    with open(tmp_path / "generator.json") as fh:
        assert json.load(fh)["kind"] == "rectangle"


def test_cloud_rejects_nonfinite():
    with pytest.raises(InvalidParameterError):
        datasets.PointCloud(np.array([[1.0, np.nan]]))


def test_generator_config_validation():
    with pytest.raises(InvalidParameterError):
        datasets.GeneratorConfig("hexagon")
    with pytest.raises(InvalidParameterError):
        datasets.GeneratorConfig("rectangle", {"a": -1.0, "b": 1.0})
