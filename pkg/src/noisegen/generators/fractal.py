"""Iterated-function-system fractals rendered with the chaos game.

Systems are 2-8 contractive affine maps with selection weights proportional to
|det| + eps and a color per map. Rendering iterates the maps from the first
map's fixed point (a point of the attractor, so every visited point stays on
it), discards a warm-up prefix, estimates the view window from a fixed-size
probe, and splats point densities composited over mid-gray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from noisegen.generators import GenerationError, ImageGenerator
from noisegen.seeds import SeedTree

_WARMUP = 100
_PROBE = 2000
_WEIGHT_EPS = 0.01


class DegenerateAttractorError(GenerationError):
    """Attractor collapsed below pixel scale; caller should resample the system."""


@dataclass(frozen=True)
class AffineMap:
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def translation(self) -> np.ndarray:
        return np.array([self.e, self.f])

    def fixed_point(self) -> np.ndarray:
        return np.linalg.solve(np.eye(2) - self.matrix(), self.translation())


@dataclass(frozen=True)
class IfsSystem:
    maps: tuple[AffineMap, ...]
    weights: tuple[float, ...]
    colors: np.ndarray  # (n, 3)

    def __post_init__(self):
        if not 2 <= len(self.maps) <= 8:
            raise ValueError("IFS systems use 2 to 8 maps")


def _spectral_norm(m: np.ndarray) -> float:
    return float(np.linalg.svd(m, compute_uv=False)[0])


def _hsv_to_rgb(h: float, s: float, v: float) -> np.ndarray:
    i = int(h * 6.0) % 6
    f = h * 6.0 - math.floor(h * 6.0)
    p, q, t = v * (1 - s), v * (1 - s * f), v * (1 - s * (1 - f))
    rgb = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)][i]
    return np.array(rgb)


def sample_ifs(seed: SeedTree, grayscale: bool = False) -> IfsSystem:
    """Draw a random contractive system: entries U(-1,1) rejected until the
    operator norm is < 1, weights proportional to |det| + eps."""
    rng = seed.generator()
    n = int(rng.integers(2, 9))
    maps = []
    dets = []
    for _ in range(n):
        while True:
            m = rng.uniform(-1.0, 1.0, size=(2, 2))
            if _spectral_norm(m) < 1.0:
                break
        e, f = rng.uniform(-1.0, 1.0, size=2)
        maps.append(AffineMap(m[0, 0], m[0, 1], m[1, 0], m[1, 1], float(e), float(f)))
        dets.append(abs(np.linalg.det(m)))
    w = np.asarray(dets) + _WEIGHT_EPS
    w = w / w.sum()
    if grayscale:
        colors = np.ones((n, 3))
    else:
        colors = np.stack(
            [
                _hsv_to_rgb(rng.uniform(0, 1), rng.uniform(0.5, 1.0), rng.uniform(0.6, 1.0))
                for _ in range(n)
            ]
        )
    return IfsSystem(tuple(maps), tuple(float(x) for x in w), colors)


def _chaos_points(sys: IfsSystem, total: int, rng: np.random.Generator):
    """Visited points after warm-up, plus their map indices."""
    cum = np.cumsum(sys.weights)
    cum[-1] = 1.0
    idx = np.searchsorted(cum, rng.random(_WARMUP + total), side="right")
    coeffs = [(m.a, m.b, m.c, m.d, m.e, m.f) for m in sys.maps]
    x, y = (float(v) for v in sys.maps[0].fixed_point())
    xs = np.empty(total)
    ys = np.empty(total)
    idx_list = idx.tolist()
    for t in range(_WARMUP):
        a, b, c, d, e, f = coeffs[idx_list[t]]
        x, y = a * x + b * y + e, c * x + d * y + f
    for t in range(total):
        a, b, c, d, e, f = coeffs[idx_list[_WARMUP + t]]
        x, y = a * x + b * y + e, c * x + d * y + f
        xs[t] = x
        ys[t] = y
    return xs, ys, idx[_WARMUP:]


def render_ifs(sys: IfsSystem, size: int, points: int, seed: SeedTree) -> np.ndarray:
    """Chaos-game render to an (H, W, 3) float32 image in [0,1].

    The view window comes from the first `_PROBE` post-warm-up points (padded,
    squared), so runs with more points share the window and strictly grow the
    occupied set. Raises DegenerateAttractorError when the probe spans less
    than a pixel.
    """
    if points < 10_000:
        raise ValueError("points must be >= 10000")
    rng = seed.generator()
    xs, ys, idx = _chaos_points(sys, points, rng)

    px, py = xs[:_PROBE], ys[:_PROBE]
    cx, cy = (px.min() + px.max()) / 2.0, (py.min() + py.max()) / 2.0
    span = max(px.max() - px.min(), py.max() - py.min())
    if span < 1e-9:
        raise DegenerateAttractorError("attractor probe spans less than a pixel")
    side = span * 1.1
    x0, y0 = cx - side / 2.0, cy - side / 2.0

    ix = np.clip(((xs - x0) / side * size).astype(np.int64), 0, size - 1)
    iy = np.clip(((ys - y0) / side * size).astype(np.int64), 0, size - 1)
    flat = iy * size + ix
    counts = np.zeros(size * size)
    rgb = np.zeros((size * size, 3))
    for m in range(len(sys.maps)):
        cm = np.bincount(flat[idx == m], minlength=size * size).astype(np.float64)
        counts += cm
        rgb += cm[:, None] * sys.colors[m][None, :]
    occupied = counts > 0
    mean_color = np.where(occupied[:, None], rgb / np.maximum(counts, 1.0)[:, None], 0.0)
    # near-binary alpha: most occupied pixels saturate
    q = np.percentile(counts[occupied], 75) if occupied.any() else 1.0
    alpha = np.minimum(counts / max(q, 1.0), 1.0)[:, None]
    out = alpha * mean_color + (1.0 - alpha) * 0.5
    return out.reshape(size, size, 3).astype(np.float32)


def probe_span(sys: IfsSystem, seed: SeedTree) -> float:
    """Spatial span of the probe prefix; render_ifs rejects when this is below
    pixel scale. Cheap degeneracy pre-check (same points as a render's probe)."""
    xs, ys, _ = _chaos_points(sys, _PROBE, seed.generator())
    px, py = xs[:_PROBE], ys[:_PROBE]
    return float(max(px.max() - px.min(), py.max() - py.min()))


def attractor_bound(sys: IfsSystem) -> tuple[np.ndarray, float]:
    """Center and radius of a ball invariant under all maps (contains the attractor)."""
    fixed = np.stack([m.fixed_point() for m in sys.maps])
    center = fixed.mean(axis=0)
    r = 0.0
    for m in sys.maps:
        norm = _spectral_norm(m.matrix())
        drift = float(np.linalg.norm(m.matrix() @ center + m.translation() - center))
        r = max(r, drift / (1.0 - norm))
    return center, r


SIERPINSKI = IfsSystem(
    maps=(
        AffineMap(0.5, 0.0, 0.0, 0.5, 0.0, 0.0),
        AffineMap(0.5, 0.0, 0.0, 0.5, 0.5, 0.0),
        AffineMap(0.5, 0.0, 0.0, 0.5, 0.25, math.sqrt(3.0) / 4.0),
    ),
    weights=(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
    colors=np.ones((3, 3)),
)


class FractalGenerator(ImageGenerator):
    def __init__(self, model: str, size: int, params: dict):
        self.model = model
        self.size = size
        self.points = int(params.get("points", 150_000))
        self.grayscale = bool(params.get("grayscale", False))
        self.max_retries = int(params.get("max_retries", 16))

    def params_dict(self) -> dict:
        return {"points": self.points, "grayscale": self.grayscale, "max_retries": self.max_retries}

    def sample(self, seed: SeedTree) -> np.ndarray:
        for attempt in range(self.max_retries):
            sys = sample_ifs(seed.child("sys", attempt), self.grayscale)
            try:
                return render_ifs(sys, self.size, self.points, seed.child("render", attempt))
            except DegenerateAttractorError:
                continue
        raise GenerationError(f"no usable attractor after {self.max_retries} resamples")
