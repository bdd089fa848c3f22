"""Fourier-magnitude projection and radial spectral-slope estimation.

`impose_spectrum` replaces the 2-D DFT magnitude of a real grid with a target
grid while keeping the phases, the core projection step of the power-law noise
models. `fit_power_slope` is the matching estimator: least-squares slope of
radially averaged log magnitude against log frequency.
"""

from __future__ import annotations

import numpy as np


def impose_spectrum(arr: np.ndarray, target_mag: np.ndarray) -> np.ndarray:
    """Return a real grid (or (H,W,3) stack) whose DFT magnitude equals target_mag.

    Phases are preserved from the input. The target must be laid out like
    np.fft.fft2 output and be Hermitian-symmetry consistent for the result to
    be real (any function of |fx|, |fy| qualifies).
    """
    target_mag = np.asarray(target_mag, dtype=np.float64)
    if not np.all(np.isfinite(target_mag)):
        raise ValueError("target magnitude contains non-finite entries")
    if arr.ndim == 3:
        out = np.stack([impose_spectrum(arr[..., c], target_mag) for c in range(arr.shape[2])], axis=-1)
        return out
    if arr.shape != target_mag.shape:
        raise ValueError(f"target shape {target_mag.shape} does not match image shape {arr.shape}")
    spec = np.fft.fft2(arr.astype(np.float64))
    mag = np.abs(spec)
    phase = np.where(mag > 0, spec / np.where(mag > 0, mag, 1.0), 1.0)
    return np.fft.ifft2(target_mag * phase).real


def power_law_magnitude(height: int, width: int, a: float, b: float) -> np.ndarray:
    """Separable power-law magnitude target 1 / (|fx|^a + |fy|^b).

    Frequencies are in cycles per image. The DC entry diverges and is set to 0;
    callers re-introduce any desired mean separately.
    """
    fx = np.abs(np.fft.fftfreq(width) * width)
    fy = np.abs(np.fft.fftfreq(height) * height)
    denom = fx[None, :] ** a + fy[:, None] ** b
    denom[0, 0] = 1.0
    mag = 1.0 / denom
    mag[0, 0] = 0.0
    return mag


def radial_magnitude_profile(arr2d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean DFT magnitude over integer-radius annuli, radii 1 .. min(H,W)//2 - 1."""
    h, w = arr2d.shape
    spec_mag = np.abs(np.fft.fft2(arr2d.astype(np.float64)))
    fx = np.fft.fftfreq(w) * w
    fy = np.fft.fftfreq(h) * h
    r = np.rint(np.hypot(fx[None, :], fy[:, None])).astype(np.int64)
    rmax = min(h, w) // 2
    sums = np.bincount(r.ravel(), weights=spec_mag.ravel(), minlength=rmax + 1)
    counts = np.bincount(r.ravel(), minlength=rmax + 1)
    radii = np.arange(1, rmax)
    profile = sums[1:rmax] / np.maximum(counts[1:rmax], 1)
    return radii.astype(np.float64), profile


def fit_power_slope(arr2d: np.ndarray) -> tuple[float, float, float]:
    """Fit log(mean |F|) = intercept + slope * log(f) over the radial profile.

    Returns (slope, amplitude, r2) where amplitude = exp(intercept). Raises on
    images with an empty spectrum (constant input).
    """
    radii, profile = radial_magnitude_profile(arr2d)
    good = profile > 0
    if good.sum() < 8:
        raise ValueError("spectrum too sparse for a slope fit (constant image?)")
    x = np.log(radii[good])
    y = np.log(profile[good])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(np.exp(intercept)), float(max(0.0, min(1.0, r2)))
