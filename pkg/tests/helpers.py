"""Shared test oracles."""

from __future__ import annotations

import numpy as np


def empirical_w1(values: np.ndarray, target_sorted: np.ndarray) -> float:
    """Wasserstein-1 between a sample and a reference sample, comparing their
    quantile functions on the sample's rank grid.

    For heavy-tailed references the plain two-sample W1 is dominated by tail
    resolution (the larger sample reaches more extreme quantiles), so the
    common-grid form is the meaningful empirical-CDF distance.
    """
    flat = np.sort(np.asarray(values, dtype=np.float64).ravel())
    q = (np.arange(flat.size) + 0.5) / flat.size
    tq = (np.arange(target_sorted.size) + 0.5) / target_sorted.size
    ref = np.interp(q, tq, np.asarray(target_sorted, dtype=np.float64))
    return float(np.mean(np.abs(flat - ref)))


def occupied_mask(img: np.ndarray, background: float = 0.5, tol: float = 1e-6) -> np.ndarray:
    """Pixels that differ from a flat background color (fractal renders)."""
    return np.abs(img.astype(np.float64) - background).max(axis=2) > tol


def box_counting_dimension(occ: np.ndarray, sizes=(1, 2, 4, 8, 16, 32)) -> float:
    n = occ.shape[0]
    counts = []
    for s in sizes:
        blocks = occ[: n - n % s, : n - n % s].reshape(n // s, s, n // s, s).any(axis=(1, 3))
        counts.append(max(int(blocks.sum()), 1))
    return float(-np.polyfit(np.log(sizes), np.log(counts), 1)[0])
