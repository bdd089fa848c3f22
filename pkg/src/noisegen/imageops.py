"""Small shared image utilities: bicubic resampling, robust range normalization, luma."""

from __future__ import annotations

import cv2
import numpy as np

# Rec. 709 luma weights.
_LUMA = np.array([0.2126, 0.7152, 0.0722], dtype=np.float64)


def luminance(arr: np.ndarray) -> np.ndarray:
    """Rec. 709 weighted luma of an (H, W, 3) array."""
    return arr @ _LUMA.astype(arr.dtype)


def resize_bicubic(arr: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bicubic resize of a 2-D grid or (H, W, C) stack."""
    arr = np.ascontiguousarray(arr)
    if arr.ndim == 2 or arr.shape[2] <= 4:
        return cv2.resize(arr, (out_w, out_h), interpolation=cv2.INTER_CUBIC)
    chans = [
        cv2.resize(arr[..., c], (out_w, out_h), interpolation=cv2.INTER_CUBIC)
        for c in range(arr.shape[2])
    ]
    return np.stack(chans, axis=-1)


def upsample2x_stack(stack: np.ndarray) -> np.ndarray:
    """Bicubic 2x upsample of a (C, H, W) feature stack."""
    c, h, w = stack.shape
    out = np.empty((c, 2 * h, 2 * w), dtype=stack.dtype)
    for i in range(c):
        out[i] = cv2.resize(stack[i], (2 * w, 2 * h), interpolation=cv2.INTER_CUBIC)
    return out


def normalize_unit_range(arr: np.ndarray, p_lo: float = 1.0, p_hi: float = 99.0) -> np.ndarray:
    """Robust rescale to [0,1] using the p_lo..p_hi percentile window, then clamp.

    Constant inputs map to a flat 0.5 image.
    """
    lo, hi = np.percentile(arr, [p_lo, p_hi])
    if hi - lo < 1e-12:
        return np.full_like(np.asarray(arr, dtype=np.float32), 0.5)
    out = (arr - lo) / (hi - lo)
    return np.clip(out, 0.0, 1.0).astype(np.float32)
