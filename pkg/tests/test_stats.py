import numpy as np
import pytest
from scipy.stats import multivariate_normal

from noisegen.embeddings import PyramidColorEmbedding
from noisegen.generators.deadleaves import DeadLeavesParams, generate_dead_leaves
from noisegen.generators.statistical import generate_spectrum_image
from noisegen.stats import (
    GaussianSummary,
    crop_variation,
    diversity_log_volume,
    fit_alpha,
    fit_alpha_image,
    fit_lab_gaussian,
    frechet_distance,
    histogram_summary,
    knn_precision_recall,
    pearson,
    symmetric_kl,
)

I3 = np.eye(3)


# ---------------------------------------------------------------------------
# Lab color Gaussian
# ---------------------------------------------------------------------------


def test_mid_gray_dataset():
    imgs = [np.full((16, 16, 3), 0.5, np.float32) for _ in range(3)]
    g = fit_lab_gaussian(imgs)
    # stored 0.5 is display-referred mid-gray: L* ~ 53.4
    assert abs(g.mean[0] - 53.6) < 0.5
    assert abs(g.mean[1]) < 1e-6 and abs(g.mean[2]) < 1e-6
    assert np.abs(g.cov).max() < 1e-9


def test_mixture_mean_linearity():
    a = [np.full((8, 8, 3), 0.2, np.float32)] * 2
    b = [np.full((8, 8, 3), 0.8, np.float32)] * 2
    ga = fit_lab_gaussian(a)
    gb = fit_lab_gaussian(b)
    gm = fit_lab_gaussian(a + b)
    assert np.allclose(gm.mean, (ga.mean + gb.mean) / 2, atol=1e-9)


def test_needs_two_images():
    with pytest.raises(ValueError):
        fit_lab_gaussian([np.zeros((4, 4, 3), np.float32)])


def test_self_kl_zero(rng):
    imgs = [rng.random((16, 16, 3)).astype(np.float32) for _ in range(4)]
    g = fit_lab_gaussian(imgs)
    assert symmetric_kl(g, g) < 1e-9


# ---------------------------------------------------------------------------
# Symmetric KL
# ---------------------------------------------------------------------------


def test_kl_identity():
    g = GaussianSummary(np.zeros(3), I3)
    assert symmetric_kl(g, g) <= 1e-9


def test_kl_mean_shift():
    delta = np.array([1.0, 2.0, 2.0])
    p = GaussianSummary(np.zeros(3), I3)
    q = GaussianSummary(delta, I3)
    assert abs(symmetric_kl(p, q) - 9.0) <= 1e-6


def test_kl_matches_monte_carlo(rng):
    a = rng.standard_normal((3, 3))
    b = rng.standard_normal((3, 3))
    covp = a @ a.T + 0.5 * I3
    covq = b @ b.T + 0.5 * I3
    mup = rng.standard_normal(3)
    muq = rng.standard_normal(3)
    closed = symmetric_kl(GaussianSummary(mup, covp), GaussianSummary(muq, covq))
    mvp = multivariate_normal(mup, covp)
    mvq = multivariate_normal(muq, covq)
    xp = mvp.rvs(1_000_000, random_state=11)
    xq = mvq.rvs(1_000_000, random_state=12)
    mc = float(
        np.mean(mvp.logpdf(xp) - mvq.logpdf(xp)) + np.mean(mvq.logpdf(xq) - mvp.logpdf(xq))
    )
    assert abs(closed - mc) / mc < 0.02


def test_kl_symmetric_in_arguments(rng):
    a = rng.standard_normal((3, 3))
    p = GaussianSummary(rng.standard_normal(3), a @ a.T + I3)
    q = GaussianSummary(rng.standard_normal(3), I3 * 2.0)
    assert abs(symmetric_kl(p, q) - symmetric_kl(q, p)) < 1e-9


def test_non_psd_rejected():
    with pytest.raises(ValueError):
        GaussianSummary(np.zeros(2), np.array([[1.0, 0.0], [0.0, -1.0]]))
    with pytest.raises(ValueError):
        GaussianSummary(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))


# ---------------------------------------------------------------------------
# Spectral slope
# ---------------------------------------------------------------------------


def test_alpha_synthetic_power_law(rng):
    from noisegen.spectrum import impose_spectrum

    fx = np.fft.fftfreq(128) * 128
    r = np.hypot(fx[None, :], fx[:, None])
    r[0, 0] = 1.0
    mag = r**-1.5
    mag[0, 0] = 0.0
    # random phases from a real noise image keep the spectrum Hermitian, so the
    # synthesized image's magnitude equals the target exactly
    base = impose_spectrum(rng.standard_normal((128, 128)), mag)
    img = np.repeat(base[:, :, None], 3, axis=2)
    fit = fit_alpha_image(img)
    assert abs(fit.alpha - 1.5) <= 0.05
    assert 0.0 <= fit.fit_r2 <= 1.0


def test_alpha_white_noise(rng):
    img = rng.random((128, 128, 3))
    assert abs(fit_alpha_image(img).alpha) <= 0.05


def test_alpha_brightness_invariant(rng):
    img = rng.random((64, 64, 3))
    a1 = fit_alpha_image(img).alpha
    a2 = fit_alpha_image(img * 0.2).alpha
    assert abs(a1 - a2) < 1e-9


def test_alpha_cross_module(root):
    imgs = [generate_spectrum_image(128, root.child("xm", i), a=2.0, b=2.0) for i in range(16)]
    summary = fit_alpha(imgs)
    assert abs(summary.mean_alpha - 2.0) <= 0.2
    assert summary.n_images == 16 and summary.n_excluded == 0


def test_alpha_constant_flagged():
    imgs = [np.full((64, 64, 3), 0.3, np.float32), np.random.default_rng(0).random((64, 64, 3))]
    summary = fit_alpha(imgs)
    assert summary.n_excluded == 1
    assert len(summary.fits) == 1
    assert fit_alpha_image(imgs[0]) is None


# ---------------------------------------------------------------------------
# Crop variation
# ---------------------------------------------------------------------------


def test_variation_constant_dataset(root):
    prov = PyramidColorEmbedding()
    imgs = [np.full((64, 64, 3), 0.31, np.float32)] * 4
    res = crop_variation(imgs, prov, root.child("cv"))
    assert res.value < 1e-4
    assert res.provider == prov.name
    assert res.n_pairs == 4


def test_variation_shuffle_invariant(root):
    prov = PyramidColorEmbedding()
    imgs = [
        generate_dead_leaves(64, DeadLeavesParams(variant="shapes"), root.child("dl", i))
        for i in range(8)
    ]
    v1 = crop_variation(imgs, prov, root.child("cv")).value
    v2 = crop_variation(list(reversed(imgs)), prov, root.child("cv")).value
    assert v1 == v2


def test_variation_ordering_white_noise_above_dead_leaves(root, rng):
    prov = PyramidColorEmbedding()
    white = [rng.random((128, 128, 3)).astype(np.float32) for _ in range(16)]
    leaves = [
        generate_dead_leaves(128, DeadLeavesParams(variant="shapes"), root.child("ldl", i))
        for i in range(16)
    ]
    vw = crop_variation(white, prov, root.child("vw")).value
    vl = crop_variation(leaves, prov, root.child("vl")).value
    assert vw > vl


# ---------------------------------------------------------------------------
# Diversity log-volume
# ---------------------------------------------------------------------------


def test_volume_whitened_is_zero(rng):
    x = rng.standard_normal((500, 6))
    x -= x.mean(axis=0)
    cov = np.cov(x, rowvar=False, ddof=1)
    w, v = np.linalg.eigh(cov)
    x = x @ (v / np.sqrt(w)) @ v.T  # exact whitening
    assert abs(diversity_log_volume(x)) < 1e-9


def test_volume_scaling_law(rng):
    x = rng.standard_normal((400, 5))
    c = 2.5
    diff = diversity_log_volume(x * c) - diversity_log_volume(x)
    assert abs(diff - 5 * 2 * np.log(c)) < 1e-9


def test_volume_diagonal_2d(rng):
    x = rng.standard_normal((200_000, 2)) * np.array([1.0, 2.0])
    assert abs(diversity_log_volume(x) - np.log(4.0)) < 0.02 * np.log(4.0) + 0.02


def test_volume_rank_deficient_flagged(rng):
    x = rng.standard_normal((50, 3))
    x[:, 2] = x[:, 0] + x[:, 1]
    with pytest.raises(ValueError):
        diversity_log_volume(x, regularize=False)
    assert np.isfinite(diversity_log_volume(x, regularize=True))


# ---------------------------------------------------------------------------
# Frechet distance
# ---------------------------------------------------------------------------


def test_frechet_identity(rng):
    a = rng.standard_normal((4, 4))
    g = GaussianSummary(rng.standard_normal(4), a @ a.T + np.eye(4))
    assert frechet_distance(g, g) <= 1e-9


def test_frechet_mean_shift():
    delta = np.array([3.0, 4.0, 0.0])
    p = GaussianSummary(np.zeros(3), I3)
    q = GaussianSummary(delta, I3)
    assert abs(frechet_distance(p, q) - 25.0) <= 1e-9


def test_frechet_symmetric(rng):
    a = rng.standard_normal((3, 3))
    p = GaussianSummary(rng.standard_normal(3), a @ a.T + I3)
    q = GaussianSummary(rng.standard_normal(3), 2.0 * I3)
    assert abs(frechet_distance(p, q) - frechet_distance(q, p)) <= 1e-9


def test_frechet_commuting_diagonal():
    # diagonal covariances commute: closed form per dimension
    sp = np.array([1.0, 4.0, 9.0])
    sq = np.array([4.0, 1.0, 16.0])
    p = GaussianSummary(np.zeros(3), np.diag(sp))
    q = GaussianSummary(np.ones(3), np.diag(sq))
    expected = 3.0 + float(np.sum(sp + sq - 2 * np.sqrt(sp * sq)))
    assert abs(frechet_distance(p, q) - expected) <= 1e-9


# ---------------------------------------------------------------------------
# k-NN precision / recall
# ---------------------------------------------------------------------------


def test_pr_identical_sets(rng):
    x = rng.standard_normal((200, 8))
    precision, recall = knn_precision_recall(x, x.copy())
    assert precision == 1.0 and recall == 1.0


def test_pr_far_clusters(rng):
    a = rng.standard_normal((200, 8))
    b = rng.standard_normal((200, 8)) + 100.0
    precision, recall = knn_precision_recall(a, b)
    assert precision < 0.05 and recall < 0.05


def test_pr_subset_cluster(rng):
    real = rng.standard_normal((400, 8))
    gen = real[:40] + 0.001 * rng.standard_normal((40, 8))  # tight subset
    precision, recall = knn_precision_recall(real, gen)
    assert precision > 0.95
    assert recall < 0.9


def test_pr_validation(rng):
    with pytest.raises(ValueError):
        knn_precision_recall(rng.standard_normal((2, 3)), rng.standard_normal((10, 3)), k=3)
    dup = np.zeros((10, 3))
    with pytest.raises(ValueError):
        knn_precision_recall(dup, dup)


# ---------------------------------------------------------------------------
# Utilities
# ---------------------------------------------------------------------------


def test_pearson():
    xs = [1.0, 2.0, 3.0, 4.0]
    assert abs(pearson(xs, [2.0, 4.0, 6.0, 8.0]) - 1.0) < 1e-12
    assert abs(pearson(xs, [8.0, 6.0, 4.0, 2.0]) + 1.0) < 1e-12
    with pytest.raises(ValueError):
        pearson([1.0], [2.0])
    with pytest.raises(ValueError):
        pearson([1.0, 1.0], [2.0, 3.0])


def test_histogram_summary(rng):
    h = histogram_summary(rng.standard_normal(1000), bins=16)
    assert len(h["bin_edges"]) == 17
    assert sum(h["counts"]) == 1000
