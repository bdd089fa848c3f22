"""Random view augmentation: grayscale, color jitter, flip, aspect/area crop, resize.

The pipeline and its probabilities/ranges follow the contrastive-training
recipe used throughout the project: grayscale with probability 0.2;
brightness/contrast/saturation each scaled by an independent factor uniform in
[0.6, 1.4]; horizontal flip with probability 0.5; aspect-ratio change uniform
in [0.75, 1.33]; area crop factor uniform in [0.08, 1]; bicubic resize to the
output size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from noisegen.imageops import luminance, resize_bicubic
from noisegen.seeds import SeedTree


@dataclass(frozen=True)
class AugmentConfig:
    out_size: int = 64
    grayscale_prob: float = 0.2
    jitter_lo: float = 0.6
    jitter_hi: float = 1.4
    flip_prob: float = 0.5
    aspect_lo: float = 0.75
    aspect_hi: float = 4.0 / 3.0
    area_lo: float = 0.08
    area_hi: float = 1.0


def hflip(arr: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(arr[:, ::-1])


def to_grayscale(arr: np.ndarray) -> np.ndarray:
    y = luminance(arr)
    return np.repeat(y[..., None], 3, axis=2).astype(arr.dtype)


def _jitter(arr: np.ndarray, f_bright: float, f_contrast: float, f_sat: float) -> np.ndarray:
    out = arr.astype(np.float64) * f_bright
    mean = float(luminance(out).mean())
    out = mean + (out - mean) * f_contrast
    y = luminance(out)[..., None]
    out = y + (out - y) * f_sat
    return np.clip(out, 0.0, 1.0)


def _crop_box(rng: np.random.Generator, h: int, w: int, cfg: AugmentConfig) -> tuple[int, int, int, int]:
    """(top, left, box_h, box_w): area fraction and aspect drawn per config, clamped."""
    area = rng.uniform(cfg.area_lo, cfg.area_hi) * h * w
    ratio = rng.uniform(cfg.aspect_lo, cfg.aspect_hi) * (w / h)
    bw = int(round(np.sqrt(area * ratio)))
    bh = int(round(np.sqrt(area / ratio)))
    bw = min(max(bw, 1), w)
    bh = min(max(bh, 1), h)
    top = int(rng.integers(0, h - bh + 1))
    left = int(rng.integers(0, w - bw + 1))
    return top, left, bh, bw


def augment_view(arr: np.ndarray, cfg: AugmentConfig, seed: SeedTree) -> np.ndarray:
    """One augmented view of an (H, W, 3) image in [0,1]; deterministic per seed."""
    rng = seed.generator()
    gray = rng.random() < cfg.grayscale_prob
    f_bright, f_contrast, f_sat = rng.uniform(cfg.jitter_lo, cfg.jitter_hi, size=3)
    flip = rng.random() < cfg.flip_prob
    top, left, bh, bw = _crop_box(rng, arr.shape[0], arr.shape[1], cfg)

    out = arr
    if gray:
        out = to_grayscale(out)
    out = _jitter(out, f_bright, f_contrast, f_sat)
    if flip:
        out = hflip(out)
    out = out[top : top + bh, left : left + bw]
    out = resize_bicubic(out.astype(np.float32), cfg.out_size, cfg.out_size)
    return np.clip(out, 0.0, 1.0).astype(np.float32)
