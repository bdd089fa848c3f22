"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`. Criterion 8 materializes the
full 105k-image regime and takes the bulk of the runtime (bounded at 30 min).
"""

import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import kurtosis

from helpers import box_counting_dimension, empirical_w1, occupied_mask
from noisegen.dataset import (
    iter_dataset,
    quantize,
    read_shard_raw,
    regenerate_from_manifest,
    write_shards,
)
from noisegen.generators.deadleaves import DeadLeavesParams, _draw_batch, generate_dead_leaves
from noisegen.generators.fractal import SIERPINSKI, render_ifs
from noisegen.generators.statistical import generate_spectrum_image, synthesize_wmm_channels
from noisegen.generators.stylenet import tied_conv
from noisegen.imageops import luminance
from noisegen.pyramid import ORIENTATIONS, pyramid_decompose
from noisegen.seeds import SeedTree
from noisegen.stats import (
    GaussianSummary,
    diversity_log_volume,
    fit_alpha,
    frechet_distance,
    knn_precision_recall,
    symmetric_kl,
)

ROOT = SeedTree(20_240_817)


def _report(criterion: int, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {criterion}: {status} - {detail}")
    assert passed, f"criterion {criterion}: {detail}"


# ---------------------------------------------------------------------------
# 1. Spectral recovery
# ---------------------------------------------------------------------------


def test_criterion_1_spectral_recovery():
    t0 = time.perf_counter()
    errors = {}
    for target in (0.8, 1.5, 2.5):
        imgs = [
            generate_spectrum_image(128, ROOT.child(f"ac1-{target}", i), a=target, b=target)
            for i in range(32)
        ]
        errors[target] = abs(fit_alpha(imgs).mean_alpha - target)
    elapsed = time.perf_counter() - t0
    ok = all(err <= 0.15 for err in errors.values()) and elapsed < 60
    detail = (
        ", ".join(f"a={t}: |err|={e:.3f}" for t, e in errors.items())
        + f" (tol 0.15); runtime {elapsed:.1f}s < 60s"
    )
    _report(1, ok, detail)


# ---------------------------------------------------------------------------
# 2. Dead-leaves contract
# ---------------------------------------------------------------------------


def test_criterion_2_dead_leaves_contract():
    t0 = time.perf_counter()
    params = DeadLeavesParams(variant="shapes")
    uncovered = 0
    for i in range(100):
        img = generate_dead_leaves(128, params, ROOT.child("ac2-img", i))
        uncovered += int((img < 0.0).sum())  # sentinel background is -1
    rate_params = DeadLeavesParams(variant="shapes", radius_lambda=0.01, min_radius=1.0)
    radii, *_ = _draw_batch(ROOT.child("ac2-radii").generator(), rate_params, 128, 100_000, None)
    rel_err = abs(radii.mean() - 100.0) / 100.0
    elapsed = time.perf_counter() - t0
    ok = uncovered == 0 and rel_err < 0.01 and elapsed < 120
    _report(
        2,
        ok,
        f"uncovered pixels over 100 images: {uncovered}; mean radius rel err {rel_err:.4f}"
        f" (tol 0.01); runtime {elapsed:.1f}s < 120s",
    )


# ---------------------------------------------------------------------------
# 3. WMM matching
# ---------------------------------------------------------------------------


def test_criterion_3_wmm_matching():
    # Residuals are measured on the matched coefficient state after the Kth
    # matching pass (the exact coefficients the output image reconstructs
    # from); see the decisions ledger for why a re-decomposition of the image
    # cannot certify heavy-tailed marginals at this sample size.
    res = synthesize_wmm_channels(128, ROOT.child("ac3"))
    assert res.alphas == [4.0, 16.0, 256.0]
    worst = 0.0
    for c in range(3):
        for i in range(3):
            for band in res.matched[c].bands[i]:
                rel = empirical_w1(band, res.targets[(i, c)]) / res.alphas[i]
                worst = max(worst, rel)
    _report(3, worst <= 0.05, f"worst per-band W1 / alpha_i = {worst:.5f} (tol 0.05)")


# ---------------------------------------------------------------------------
# 4. StyleNet mode separations
# ---------------------------------------------------------------------------


def _stylenet_dataset(tmp_path: Path, mode: str, n: int) -> list[np.ndarray]:
    spec = {"model": f"stylenet-{mode}", "size": 128, "params": {}}
    out = tmp_path / mode
    write_shards(spec, n, out, root_seed=511, shard_size=64, workers=2)
    return list(iter_dataset(out))


def _finest_band_excess_kurtosis(img: np.ndarray) -> float:
    coeffs = pyramid_decompose(luminance(img.astype(np.float64)), 2)
    return float(kurtosis(np.concatenate([b.ravel() for b in coeffs.bands[0]]), fisher=True))


def _orientation_circular_variance(img: np.ndarray) -> float:
    coeffs = pyramid_decompose(luminance(img.astype(np.float64)), 3)
    energy = np.array(
        [sum(float((coeffs.bands[i][k] ** 2).sum()) for i in range(3)) for k in range(4)]
    )
    p = energy / energy.sum()
    return float(1.0 - np.abs(np.sum(p * np.exp(2j * np.array(ORIENTATIONS)))))


def _top_octave_fraction(img: np.ndarray) -> float:
    lum = luminance(img.astype(np.float64))
    spec = np.abs(np.fft.fft2(lum)) ** 2
    h, w = lum.shape
    fx = np.fft.fftfreq(w) * w
    fy = np.fft.fftfreq(h) * h
    r = np.hypot(fx[None, :], fy[:, None])
    total = spec.sum() - spec[0, 0]
    return float(spec[r > w / 4].sum() / total)


def _bootstrap_diff_ci(a: np.ndarray, b: np.ndarray, level: float = 99.0):
    """Percentile bootstrap CI (two-sided) for mean(a) - mean(b)."""
    rng = np.random.default_rng(0)
    diffs = [
        np.mean(rng.choice(a, a.size)) - np.mean(rng.choice(b, b.size)) for _ in range(4000)
    ]
    lo, hi = np.percentile(diffs, [(100 - level) / 2, 100 - (100 - level) / 2])
    return float(lo), float(hi)


def test_criterion_4_stylenet_mode_separations(tmp_path):
    n = 256
    modes = {m: _stylenet_dataset(tmp_path, m, n) for m in ("random", "highfreq", "sparse", "oriented")}

    k_sparse = np.array([_finest_band_excess_kurtosis(im) for im in modes["sparse"]])
    k_high = np.array([_finest_band_excess_kurtosis(im) for im in modes["highfreq"]])
    lo_a, _ = _bootstrap_diff_ci(k_sparse, k_high)

    cv_high = np.array([_orientation_circular_variance(im) for im in modes["highfreq"]])
    cv_orient = np.array([_orientation_circular_variance(im) for im in modes["oriented"]])
    lo_b, _ = _bootstrap_diff_ci(cv_high, cv_orient)

    top_rand = np.array([_top_octave_fraction(im) for im in modes["random"]])
    top_high = np.array([_top_octave_fraction(im) for im in modes["highfreq"]])

    ok_a = lo_a > 0
    ok_b = lo_b > 0
    ok_c = top_rand.mean() < top_high.mean()
    detail = (
        f"(a) sparse-highfreq kurtosis diff {k_sparse.mean() - k_high.mean():+.2f},"
        f" 99% CI lower {lo_a:+.2f} > 0: {ok_a}; "
        f"(b) highfreq-oriented circvar diff {cv_high.mean() - cv_orient.mean():+.4f},"
        f" 99% CI lower {lo_b:+.4f} > 0: {ok_b}; "
        f"(c) top-octave fraction random {top_rand.mean():.4f} < highfreq {top_high.mean():.4f}: {ok_c}"
    )
    _report(4, ok_a and ok_b and ok_c, detail)


# ---------------------------------------------------------------------------
# 5. tied_conv oracle
# ---------------------------------------------------------------------------


def test_criterion_5_tied_conv_oracle():
    rng = np.random.default_rng(55)
    worst = 0.0
    for _ in range(1000):
        c_in = int(rng.integers(1, 4))
        c_out = int(rng.integers(1, 4))
        h = int(rng.integers(3, 9))
        w = int(rng.integers(3, 9))
        x = rng.standard_normal((c_in, h, w))
        f = rng.standard_normal((c_in, 3, 3))
        a = rng.standard_normal((c_out, c_in))
        b = rng.standard_normal(c_out)
        err = np.abs(tied_conv(x, f, a, b) - naive_tied_conv_rect(x, f, a, b)).max()
        worst = max(worst, float(err))
    _report(5, worst <= 1e-6, f"max |tied_conv - bruteforce| over 1000 trials = {worst:.2e}")


def naive_tied_conv_rect(x, filters, amplitudes, bias):
    c_in, h, w = x.shape
    c_out = amplitudes.shape[0]
    out = np.zeros((c_out, h, w))
    for k in range(c_out):
        for l in range(c_in):
            for i in range(h):
                for j in range(w):
                    acc = 0.0
                    for di in (-1, 0, 1):
                        for dj in (-1, 0, 1):
                            ii, jj = i + di, j + dj
                            if 0 <= ii < h and 0 <= jj < w:
                                acc += x[l, ii, jj] * filters[l, di + 1, dj + 1]
                    out[k, i, j] += amplitudes[k, l] * acc
        out[k] += bias[k]
    return out


# ---------------------------------------------------------------------------
# 6. Metric identities
# ---------------------------------------------------------------------------


def test_criterion_6_metric_identities():
    rng = np.random.default_rng(66)
    a = rng.standard_normal((3, 3))
    cov = a @ a.T + np.eye(3)
    g = GaussianSummary(rng.standard_normal(3), cov)
    kl_self = symmetric_kl(g, g)
    fd_self = frechet_distance(g, g)
    delta = np.array([1.0, -2.0, 2.0])
    p = GaussianSummary(np.zeros(3), np.eye(3))
    q = GaussianSummary(delta, np.eye(3))
    kl_shift = abs(symmetric_kl(p, q) - 9.0)
    fd_shift = abs(frechet_distance(p, q) - 9.0)
    x = rng.standard_normal((300, 6))
    precision, recall = knn_precision_recall(x, x.copy())
    white = rng.standard_normal((500, 6))
    white -= white.mean(axis=0)
    c = np.cov(white, rowvar=False, ddof=1)
    w, v = np.linalg.eigh(c)
    white = white @ (v / np.sqrt(w)) @ v.T
    vol = abs(diversity_log_volume(white))
    ok = (
        kl_self <= 1e-9
        and fd_self <= 1e-9
        and kl_shift <= 1e-9
        and fd_shift <= 1e-9
        and precision == 1.0
        and recall == 1.0
        and vol <= 1e-9
    )
    _report(
        6,
        ok,
        f"symKL(g,g)={kl_self:.1e}, FD(g,g)={fd_self:.1e}, |symKL-9|={kl_shift:.1e},"
        f" |FD-9|={fd_shift:.1e}, PR=({precision},{recall}), |logvol|={vol:.1e} (tol 1e-9)",
    )


# ---------------------------------------------------------------------------
# 7. Determinism & format
# ---------------------------------------------------------------------------


def test_criterion_7_determinism_and_format(tmp_path):
    checks = []
    for spec, tag in (
        ({"model": "dead-leaves-shapes", "size": 64, "params": {}}, "dl"),
        ({"model": "stylenet-sparse", "size": 32, "params": {}}, "sn"),
    ):
        m1 = write_shards(spec, 24, tmp_path / f"{tag}-w1", root_seed=77, shard_size=8, workers=1)
        m8 = write_shards(spec, 24, tmp_path / f"{tag}-w8", root_seed=77, shard_size=8, workers=8)
        same_bytes = all(
            (tmp_path / f"{tag}-w1" / s1["filename"]).read_bytes()
            == (tmp_path / f"{tag}-w8" / s2["filename"]).read_bytes()
            for s1, s2 in zip(m1["shards"], m8["shards"])
        )
        m_regen = regenerate_from_manifest(
            tmp_path / f"{tag}-w1" / "manifest.json", tmp_path / f"{tag}-regen", workers=2
        )
        regen_ok = [s["checksum64"] for s in m_regen["shards"]] == [
            s["checksum64"] for s in m1["shards"]
        ]
        checks.append((tag, same_bytes, regen_ok))

    # read(write(x)) round-trips pixel-exactly at u8 resolution
    spec = {"model": "spectrum", "size": 32, "params": {}}
    write_shards(spec, 6, tmp_path / "rt", root_seed=5, shard_size=8, workers=1)
    arr = read_shard_raw(tmp_path / "rt" / "shard-00000000.noiz")
    from noisegen.dataset import stream_samples
    import itertools

    regen = [quantize(im) for im in itertools.islice(stream_samples(spec, 5), 6)]
    rt_ok = all(np.array_equal(arr[i], regen[i]) for i in range(6))

    ok = rt_ok and all(sb and rg for _, sb, rg in checks)
    detail = (
        "; ".join(f"{tag}: 1v8-workers {sb}, regen {rg}" for tag, sb, rg in checks)
        + f"; read/write round-trip {rt_ok}"
    )
    _report(7, ok, detail)


# ---------------------------------------------------------------------------
# 8. Desk-scale throughput (full 105k regime)
# ---------------------------------------------------------------------------


def test_criterion_8_throughput_105k(tmp_path):
    import os

    spec = {"model": "dead-leaves-shapes", "size": 128, "params": {}}
    workers = min(8, os.cpu_count() or 1)
    t0 = time.perf_counter()
    manifest = write_shards(spec, 105_000, tmp_path / "big", root_seed=4, workers=workers)
    elapsed = time.perf_counter() - t0
    count_ok = sum(s["count"] for s in manifest["shards"]) == 105_000
    count_ok = count_ok and len(manifest["shards"]) == 26  # ceil(105000 / 4096)
    ok = count_ok and elapsed < 1800
    _report(
        8,
        ok,
        f"105000 images at 128^2 with {workers} workers in {elapsed / 60:.1f} min"
        f" (< 30 min); shard count {len(manifest['shards'])}",
    )


# ---------------------------------------------------------------------------
# 9. Fractal sanity
# ---------------------------------------------------------------------------


def test_criterion_9_fractal_box_dimension():
    img = render_ifs(SIERPINSKI, 512, 1_000_000, ROOT.child("ac9"))
    dim = box_counting_dimension(occupied_mask(img))
    err = abs(dim - 1.58)
    _report(9, err <= 0.1, f"Sierpinski box-counting dimension {dim:.3f} (target 1.58 +/- 0.1)")
