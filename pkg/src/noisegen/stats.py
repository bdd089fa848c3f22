"""Image and dataset statistics: Lab color Gaussians and symmetric KL, spectral
slope fits, crop-pair perceptual variation, Frechet distance, covariance
log-volume diversity, and k-NN precision/recall.

All reductions run in a fixed order, so results are independent of worker
scheduling; sample-based metrics report their sample counts.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from noisegen.augment import AugmentConfig, augment_view
from noisegen.colorspace import Image, rgb_to_lab, srgb_to_linear
from noisegen.embeddings import EmbeddingProvider
from noisegen.imageops import luminance
from noisegen.seeds import SeedTree
from noisegen.spectrum import fit_power_slope

_COV_REG = 1e-6


@dataclass(frozen=True)
class GaussianSummary:
    mean: np.ndarray  # (d,)
    cov: np.ndarray  # (d, d) symmetric PSD

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=np.float64)
        if not np.allclose(cov, cov.T, atol=1e-9):
            raise ValueError("covariance must be symmetric")
        scale = max(float(np.trace(cov)) / max(cov.shape[0], 1), 1.0)
        if np.linalg.eigvalsh(cov).min() < -1e-9 * scale:
            raise ValueError("covariance must be positive semi-definite")
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64))
        object.__setattr__(self, "cov", cov)


@dataclass(frozen=True)
class AlphaFit:
    alpha: float  # positive: magnitude ~ f^(-alpha)
    amplitude: float
    fit_r2: float


@dataclass(frozen=True)
class AlphaSummary:
    mean_alpha: float
    fits: tuple[AlphaFit, ...]
    n_images: int
    n_excluded: int  # constant images without a spectrum

    def alphas(self) -> np.ndarray:
        return np.array([f.alpha for f in self.fits])


@dataclass(frozen=True)
class CropVariationResult:
    value: float
    provider: str
    n_pairs: int


def _regularized(cov: np.ndarray, reg: float = _COV_REG) -> np.ndarray:
    """Add a scaled identity floor only when the covariance is ill-conditioned,
    so exact identities on well-conditioned inputs stay exact."""
    d = cov.shape[0]
    scale = float(np.trace(cov)) / d
    if scale <= 0:
        scale = 1.0
    if np.linalg.eigvalsh(cov).min() <= reg * scale:
        return cov + np.eye(d) * (reg * scale)
    return cov


def _lab_pixels(arr: np.ndarray, max_pixels: int | None) -> np.ndarray:
    linear = srgb_to_linear(np.clip(arr, 0.0, 1.0)).astype(np.float32)
    lab = rgb_to_lab(Image(linear)).data.reshape(-1, 3).astype(np.float64)
    if max_pixels is not None and lab.shape[0] > max_pixels:
        step = int(np.ceil(lab.shape[0] / max_pixels))
        lab = lab[::step]
    return lab


def fit_lab_gaussian(images: Iterable[np.ndarray], max_pixels_per_image: int | None = None) -> GaussianSummary:
    """Pool pixel-level L*a*b* samples over the images and fit a 3-D Gaussian.

    Stored [0,1] values are display-referred; they are sRGB-decoded before the
    colorimetric conversion.
    """
    n = 0
    count = 0
    mean = np.zeros(3)
    m2 = np.zeros((3, 3))
    for arr in images:
        lab = _lab_pixels(arr, max_pixels_per_image)
        count += lab.shape[0]
        mean += lab.sum(axis=0)
        m2 += lab.T @ lab
        n += 1
    if n < 2:
        raise ValueError("fit_lab_gaussian needs at least 2 images")
    mean /= count
    cov = m2 / count - np.outer(mean, mean)
    cov = (cov + cov.T) / 2.0
    # clip tiny negative eigenvalues from accumulation error
    w, v = np.linalg.eigh(cov)
    cov = (v * np.maximum(w, 0.0)) @ v.T
    return GaussianSummary(mean, (cov + cov.T) / 2.0)


def symmetric_kl(p: GaussianSummary, q: GaussianSummary, reg: float = _COV_REG) -> float:
    """KL(p||q) + KL(q||p) in closed form for Gaussians."""

    def kl(a: GaussianSummary, b: GaussianSummary) -> float:
        d = a.mean.shape[0]
        cov_a = _regularized(a.cov, reg)
        cov_b = _regularized(b.cov, reg)
        chol_a = np.linalg.cholesky(cov_a)
        chol_b = np.linalg.cholesky(cov_b)
        solve = np.linalg.solve
        tr = float(np.trace(solve(cov_b, cov_a)))
        diff = b.mean - a.mean
        maha = float(diff @ solve(cov_b, diff))
        logdet = 2.0 * float(np.sum(np.log(np.diag(chol_b))) - np.sum(np.log(np.diag(chol_a))))
        return 0.5 * (tr + maha - d + logdet)

    return kl(p, q) + kl(q, p)


def _sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.T) / 2.0)
    return (v * np.sqrt(np.maximum(w, 0.0))) @ v.T


def frechet_distance(p: GaussianSummary, q: GaussianSummary, reg: float = _COV_REG) -> float:
    """||mu_p - mu_q||^2 + Tr(S_p + S_q - 2 (S_p S_q)^(1/2))."""
    diff = float(np.sum((p.mean - q.mean) ** 2))
    a = p.cov
    b = q.cov
    sqrt_a = _sqrt_psd(a)
    cross = _sqrt_psd(sqrt_a @ b @ sqrt_a)
    val = diff + float(np.trace(a) + np.trace(b) - 2.0 * np.trace(cross))
    if not np.isfinite(val):
        sqrt_a = _sqrt_psd(_regularized(a, reg))
        cross = _sqrt_psd(sqrt_a @ _regularized(b, reg) @ sqrt_a)
        val = diff + float(np.trace(a) + np.trace(b) - 2.0 * np.trace(cross))
        if not np.isfinite(val):
            raise ValueError("matrix square root failed even after regularization")
    return max(val, 0.0)


def fit_alpha_image(arr: np.ndarray) -> AlphaFit | None:
    """Spectral slope of one image's grayscale luminance; None for constant images."""
    lum = luminance(arr.astype(np.float64))
    if float(lum.max() - lum.min()) < 1e-9:
        return None
    slope, amplitude, r2 = fit_power_slope(lum)
    return AlphaFit(alpha=-slope, amplitude=amplitude, fit_r2=r2)


def fit_alpha(images: Iterable[np.ndarray]) -> AlphaSummary:
    fits = []
    excluded = 0
    n = 0
    for arr in images:
        n += 1
        fit = fit_alpha_image(arr)
        if fit is None:
            excluded += 1
        else:
            fits.append(fit)
    if not fits:
        raise ValueError("no images with a usable spectrum")
    mean_alpha = float(np.mean([f.alpha for f in fits]))
    return AlphaSummary(mean_alpha, tuple(fits), n, excluded)


def crop_variation(
    images: Sequence[np.ndarray],
    provider: EmbeddingProvider,
    seed: SeedTree,
    out_size: int = 64,
) -> CropVariationResult:
    """Mean embedding distance between two random crops of each image.

    Crop priors follow the augmentation pipeline's area/aspect ranges; values
    are only comparable within one provider. Per-image crop seeds derive from
    the pixel content, so the result is invariant to dataset ordering.
    """
    cfg = AugmentConfig(
        out_size=out_size,
        grayscale_prob=0.0,
        jitter_lo=1.0,
        jitter_hi=1.0,
        flip_prob=0.0,
    )
    dists = []
    for arr in images:
        digest = hashlib.blake2b(
            np.ascontiguousarray(arr, dtype=np.float32).tobytes(), digest_size=8
        ).hexdigest()
        img_seed = seed.child(digest)
        va = augment_view(arr, cfg, img_seed.child("crop_a"))
        vb = augment_view(arr, cfg, img_seed.child("crop_b"))
        ea = provider.embed(va)
        eb = provider.embed(vb)
        dists.append(float(np.linalg.norm(ea - eb)))
    if not dists:
        raise ValueError("crop_variation needs at least one image")
    return CropVariationResult(float(np.mean(dists)), provider.name, len(dists))


def diversity_log_volume(features: np.ndarray, regularize: bool = True) -> float:
    """Log-determinant of the feature covariance (dataset diversity).

    Without regularization, a rank-deficient covariance raises; with it, a
    scaled identity floor keeps the value finite.
    """
    features = np.asarray(features, dtype=np.float64)
    n, d = features.shape
    cov = np.cov(features, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    eigs = np.linalg.eigvalsh((cov + cov.T) / 2.0)
    scale = max(float(np.trace(cov)) / d, 1e-300)
    if eigs.min() <= 1e-12 * scale:
        if not regularize:
            raise ValueError(
                f"feature covariance is rank-deficient (n={n}, d={d}); pass regularize=True"
            )
        cov = _regularized(cov)
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise ValueError("covariance log-determinant is not positive definite")
    return float(logdet)


def knn_precision_recall(
    feats_real: np.ndarray, feats_gen: np.ndarray, k: int = 3
) -> tuple[float, float]:
    """Manifold precision/recall from k-NN radii.

    precision: fraction of generated points within the real manifold (union of
    balls at each real point with its k-th neighbor radius); recall: fraction
    of real points within the generated manifold.
    """
    real = np.asarray(feats_real, dtype=np.float64)
    gen = np.asarray(feats_gen, dtype=np.float64)
    for name, f in (("real", real), ("generated", gen)):
        if f.shape[0] < k + 1:
            raise ValueError(f"{name} set needs at least k+1={k + 1} points")

    def radii(feats: np.ndarray) -> np.ndarray:
        tree = cKDTree(feats)
        dist, _ = tree.query(feats, k=k + 1)
        return dist[:, k]

    r_real = radii(real)
    r_gen = radii(gen)
    if r_real.max() == 0.0 or r_gen.max() == 0.0:
        raise ValueError("degenerate feature set: all points identical")

    def covered(points: np.ndarray, manifold: np.ndarray, manifold_radii: np.ndarray) -> float:
        tree = cKDTree(manifold)
        hits = 0
        for p in points:
            idx = tree.query_ball_point(p, r=float(manifold_radii.max()))
            if any(np.linalg.norm(p - manifold[j]) <= manifold_radii[j] for j in idx):
                hits += 1
        return hits / len(points)

    precision = covered(gen, real, r_real)
    recall = covered(real, gen, r_gen)
    return float(precision), float(recall)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Plain Pearson correlation for (metric, score) tables."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("pearson needs two equal-length sequences of >= 2 values")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt((xc**2).sum() * (yc**2).sum())
    if denom == 0:
        raise ValueError("pearson undefined for constant input")
    return float((xc * yc).sum() / denom)


def histogram_summary(values: np.ndarray, bins: int = 32) -> dict:
    counts, edges = np.histogram(np.asarray(values, dtype=np.float64), bins=bins)
    return {"bin_edges": [float(e) for e in edges], "counts": [int(c) for c in counts]}
