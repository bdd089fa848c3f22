"""Monotone (rank-preserving) histogram matching against empirical targets."""

from __future__ import annotations

import numpy as np


def histogram_match(values: np.ndarray, target_sorted: np.ndarray) -> np.ndarray:
    """Remap `values` so their empirical distribution matches the target samples.

    `target_sorted` is a sorted 1-D sample of the target distribution (its
    empirical CDF). The mapping is a monotone quantile transport: it preserves
    the rank order of the input exactly (stable sort for ties).
    """
    values = np.asarray(values)
    if values.size == 0:
        raise ValueError("histogram_match: empty input")
    target_sorted = np.asarray(target_sorted, dtype=np.float64)
    if target_sorted.ndim != 1 or target_sorted.size == 0:
        raise ValueError("histogram_match: target must be a non-empty 1-D sample")
    flat = values.ravel()
    order = np.argsort(flat, kind="stable")
    n = flat.size
    m = target_sorted.size
    q = (np.arange(n) + 0.5) / n
    tq = (np.arange(m) + 0.5) / m
    mapped = np.interp(q, tq, target_sorted)
    out = np.empty(n, dtype=np.float64)
    out[order] = mapped
    return out.reshape(values.shape)
