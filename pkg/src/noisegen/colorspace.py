"""Image container and color conversions: linear RGB <-> CIE L*a*b* (D65), sRGB transfer.

Pixel data everywhere is float32 (H, W, 3) row-major. Stored dataset values in
[0,1] follow the usual display convention (sRGB-encoded); decode with
`srgb_to_linear` before colorimetric math.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LINEAR_RGB = "linear_rgb"
LAB = "lab"

# Linear sRGB primaries -> XYZ, D65 white.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_WHITE = _RGB_TO_XYZ.sum(axis=1)  # XYZ of RGB (1,1,1)

_DELTA = 6.0 / 29.0


@dataclass
class Image:
    """H x W x 3 grid of 32-bit reals with a color-space tag."""

    data: np.ndarray
    space: str = LINEAR_RGB

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"image data must be (H, W, 3), got {arr.shape}")
        if self.space not in (LINEAR_RGB, LAB):
            raise ValueError(f"unknown color space {self.space!r}")
        self.data = arr

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def _lab_f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA**3, np.cbrt(t), t / (3 * _DELTA**2) + 4.0 / 29.0)


def _lab_f_inv(u: np.ndarray) -> np.ndarray:
    return np.where(u > _DELTA, u**3, 3 * _DELTA**2 * (u - 4.0 / 29.0))


def rgb_to_lab(img: Image) -> Image:
    """Convert a linear-RGB image to CIE L*a*b* under D65."""
    if img.space != LINEAR_RGB:
        raise ValueError(f"rgb_to_lab expects a {LINEAR_RGB} image, got {img.space}")
    xyz = img.data.astype(np.float64) @ _RGB_TO_XYZ.T
    fx, fy, fz = (_lab_f(xyz[..., i] / _WHITE[i]) for i in range(3))
    lab = np.stack([116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1)
    return Image(lab.astype(np.float32), LAB)


def lab_to_rgb(img: Image) -> Image:
    """Inverse of `rgb_to_lab`."""
    if img.space != LAB:
        raise ValueError(f"lab_to_rgb expects a {LAB} image, got {img.space}")
    lab = img.data.astype(np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_lab_f_inv(f) * w for f, w in zip((fx, fy, fz), _WHITE)], axis=-1)
    rgb = xyz @ _XYZ_TO_RGB.T
    return Image(rgb.astype(np.float32), LINEAR_RGB)


def rgb_array_to_lab(arr: np.ndarray) -> np.ndarray:
    """Array-level linear RGB -> Lab (no container round trip)."""
    return rgb_to_lab(Image(arr, LINEAR_RGB)).data


def srgb_to_linear(v: np.ndarray) -> np.ndarray:
    """sRGB transfer decode; input in [0,1]."""
    v = np.asarray(v, dtype=np.float64)
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(v: np.ndarray) -> np.ndarray:
    v = np.clip(np.asarray(v, dtype=np.float64), 0.0, None)
    return np.where(v <= 0.0031308, v * 12.92, 1.055 * v ** (1.0 / 2.4) - 0.055)
