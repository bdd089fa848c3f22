"""Fixed bank of 3x3 wavelet filters: 4 orientations x 2 phases plus center-surround.

Every kernel is zero-mean and L2-normalized. Even-phase kernels respond to
thin bars, odd-phase kernels to step edges; orientation labels give the
direction of the bar / edge line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WaveletFilter:
    name: str
    orientation: float | None  # radians of the bar/edge line; None for center-surround
    phase: str | None  # "even", "odd", or None
    kernel: np.ndarray  # (3, 3) float64, zero-mean, unit L2


def _normalized(k: list[list[float]]) -> np.ndarray:
    arr = np.asarray(k, dtype=np.float64)
    arr = arr - arr.mean()
    return arr / np.linalg.norm(arr)


_KERNELS: list[tuple[str, float | None, str | None, list[list[float]]]] = [
    ("even_0", 0.0, "even", [[-1, -1, -1], [2, 2, 2], [-1, -1, -1]]),
    ("odd_0", 0.0, "odd", [[-1, -1, -1], [0, 0, 0], [1, 1, 1]]),
    ("even_45", np.pi / 4, "even", [[-1, -1, 2], [-1, 2, -1], [2, -1, -1]]),
    ("odd_45", np.pi / 4, "odd", [[0, -1, -1], [1, 0, -1], [1, 1, 0]]),
    ("even_90", np.pi / 2, "even", [[-1, 2, -1], [-1, 2, -1], [-1, 2, -1]]),
    ("odd_90", np.pi / 2, "odd", [[-1, 0, 1], [-1, 0, 1], [-1, 0, 1]]),
    ("even_135", 3 * np.pi / 4, "even", [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]]),
    ("odd_135", 3 * np.pi / 4, "odd", [[1, 1, 0], [1, 0, -1], [0, -1, -1]]),
    ("center_surround", None, None, [[-1, -1, -1], [-1, 8, -1], [-1, -1, -1]]),
]


def make_wavelet_bank(seed=None) -> tuple[WaveletFilter, ...]:
    """The fixed 9-element bank. `seed` is accepted for interface symmetry; the
    bank itself is deterministic."""
    return tuple(
        WaveletFilter(name, orient, phase, _normalized(k))
        for name, orient, phase, k in _KERNELS
    )


def bank_kernels() -> np.ndarray:
    """(9, 3, 3) array of the bank kernels, in bank order."""
    return np.stack([f.kernel for f in make_wavelet_bank()])
