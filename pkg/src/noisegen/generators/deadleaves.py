"""Dead-leaves generators: opaque shapes dropped uniformly at random until the
canvas is fully covered; each new leaf occludes everything beneath it.

Variants: axis-aligned squares; rotated squares; mixed circles / triangles /
rectangles; textured squares filled with statistical-model patches. Leaf
circumradii follow max(min_radius, Exponential(lambda)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from noisegen.generators import GenerationError, ImageGenerator
from noisegen.generators.statistical import Palette, sample_palette_from, spectrum_texture
from noisegen.seeds import SeedTree

VARIANTS = ("squares", "oriented", "shapes", "textured")
_SHAPE_CHOICES = ("circle", "triangle", "rectangle")
_BATCH = 256
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class DeadLeavesParams:
    variant: str = "shapes"
    radius_mean_frac: float = 0.08  # mean radius as a fraction of the canvas side
    radius_lambda: float | None = None  # explicit exponential rate (1/pixels) overrides frac
    min_radius: float = 1.0
    max_leaves: int = 1_000_000
    color_source: str = "uniform"  # "uniform" | "palette"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.radius_lambda is not None and not self.radius_lambda > 0:
            raise ValueError("radius_lambda must be > 0")
        if not self.min_radius >= 1:
            raise ValueError("min_radius must be >= 1")
        if not self.max_leaves >= 1:
            raise ValueError("max_leaves must be >= 1")
        if self.color_source not in ("uniform", "palette"):
            raise ValueError(f"unknown color source {self.color_source!r}")

    def rate_for(self, size: int) -> float:
        return self.radius_lambda if self.radius_lambda is not None else 1.0 / (self.radius_mean_frac * size)


@dataclass(frozen=True)
class Leaf:
    shape: str
    cx: float
    cy: float
    circumradius: float
    rotation: float
    color: np.ndarray | None  # None for textured leaves
    aspect: float = 1.0  # rectangles only: short/long side ratio


def _draw_batch(rng: np.random.Generator, params: DeadLeavesParams, size: int, n: int, palette: Palette | None):
    """Vectorized draw of n leaves' scalar fields (one stream, fixed order)."""
    rate = params.rate_for(size)
    radii = np.maximum(params.min_radius, rng.exponential(1.0 / rate, size=n))
    centers = rng.uniform(0.0, size, size=(n, 2))
    variant = params.variant
    if variant == "oriented":
        shapes = np.zeros(n, dtype=np.int64)  # 0 = square
        rotations = rng.uniform(0.0, np.pi / 2, size=n)
        aspects = np.ones(n)
    elif variant == "shapes":
        shapes = rng.integers(1, 4, size=n)  # 1 circle, 2 triangle, 3 rectangle
        rotations = rng.uniform(0.0, np.pi, size=n)
        aspects = rng.uniform(0.3, 1.0, size=n)
    else:  # squares, textured
        shapes = np.zeros(n, dtype=np.int64)
        rotations = np.zeros(n)
        aspects = np.ones(n)
    if variant == "textured":
        colors = None
    elif palette is not None:
        picks = np.searchsorted(np.cumsum(palette.weights), rng.random(n))
        colors = palette.colors[np.minimum(picks, len(palette.weights) - 1)].astype(np.float32)
    else:
        colors = rng.uniform(0.0, 1.0, size=(n, 3)).astype(np.float32)
    return radii, centers, shapes, rotations, aspects, colors


_SHAPE_NAMES = {0: "square", 1: "circle", 2: "triangle", 3: "rectangle"}


def sample_leaf(params: DeadLeavesParams, size: int, seed: SeedTree) -> Leaf:
    """Draw a single leaf (shape, placement, color) for a canvas of side `size`."""
    palette = None
    if params.color_source == "palette":
        palette = sample_palette_from(seed.child("palette").generator())
    radii, centers, shapes, rotations, aspects, colors = _draw_batch(
        seed.generator(), params, size, 1, palette
    )
    return Leaf(
        shape=_SHAPE_NAMES[int(shapes[0])],
        cx=float(centers[0, 0]),
        cy=float(centers[0, 1]),
        circumradius=float(radii[0]),
        rotation=float(rotations[0]),
        color=None if colors is None else colors[0],
        aspect=float(aspects[0]),
    )


def _triangle_mask(xs, ys, r, rotation):
    ang = rotation + np.array([0.0, 2.0, 4.0]) * np.pi / 3.0
    vx = r * np.cos(ang)
    vy = r * np.sin(ang)
    xg = xs[None, :]
    yg = ys[:, None]
    mask = None
    for i in range(3):
        ex, ey = vx[(i + 1) % 3] - vx[i], vy[(i + 1) % 3] - vy[i]
        side = (xg - vx[i]) * ey - (yg - vy[i]) * ex
        cur = side <= 1e-12  # vertices are counter-clockwise
        mask = cur if mask is None else (mask & cur)
    return mask


def generate_dead_leaves(size: int, params: DeadLeavesParams, seed: SeedTree) -> np.ndarray:
    """Render leaves in sampling order (later occludes earlier) until covered.

    Returns an (H, W, 3) float32 image in [0,1]. Raises GenerationError with the
    uncovered fraction if max_leaves is hit first.
    """
    if size < 16:
        raise ValueError("size must be >= 16")
    rng = seed.generator()
    palette = None
    if params.color_source == "palette":
        palette = sample_palette_from(seed.child("palette").generator())
    canvas = np.full((size, size, 3), -1.0, dtype=np.float32)
    covered = np.zeros((size, size), dtype=bool)
    n_uncovered = size * size
    base = np.arange(size, dtype=np.float64) + 0.5  # pixel centers
    textured = params.variant == "textured"

    drawn = 0
    while drawn < params.max_leaves:
        n = min(_BATCH, params.max_leaves - drawn)
        radii, centers, shapes, rotations, aspects, colors = _draw_batch(rng, params, size, n, palette)
        drawn += n
        for j in range(n):
            r = radii[j]
            cx = centers[j, 0]
            cy = centers[j, 1]
            shape = shapes[j]
            if shape == 0 and not textured and rotations[j] == 0.0:
                # axis-aligned square: the mask is the clipped box itself
                half = r / _SQRT2
                x0 = max(math.ceil(cx - half - 0.5), 0)
                x1 = min(math.floor(cx + half - 0.5) + 1, size)
                y0 = max(math.ceil(cy - half - 0.5), 0)
                y1 = min(math.floor(cy + half - 0.5) + 1, size)
                if x0 >= x1 or y0 >= y1:
                    continue
                canvas[y0:y1, x0:x1] = colors[j]
                cov = covered[y0:y1, x0:x1]
                n_uncovered -= cov.size - int(np.count_nonzero(cov))
                cov[:] = True
                if n_uncovered == 0:
                    return canvas
                continue
            x0 = max(int(cx - r), 0)
            x1 = min(int(cx + r) + 2, size)
            y0 = max(int(cy - r), 0)
            y1 = min(int(cy + r) + 2, size)
            if x0 >= x1 or y0 >= y1:
                continue
            xs = base[x0:x1] - cx
            ys = base[y0:y1] - cy
            if shape == 0:  # square (axis-aligned textured, or rotated)
                if rotations[j] == 0.0:
                    half = r / _SQRT2
                    mask = (np.abs(xs) <= half)[None, :] & (np.abs(ys) <= half)[:, None]
                else:
                    ct, st = math.cos(rotations[j]), math.sin(rotations[j])
                    u = xs[None, :] * ct + ys[:, None] * st
                    v = xs[None, :] * (-st) + ys[:, None] * ct
                    half = r / _SQRT2
                    mask = (np.abs(u) <= half) & (np.abs(v) <= half)
            elif shape == 1:  # circle
                mask = (xs * xs)[None, :] + (ys * ys)[:, None] <= r * r
            elif shape == 2:  # triangle
                mask = _triangle_mask(xs, ys, r, rotations[j])
            else:  # rectangle inscribed in the circumcircle
                ct, st = math.cos(rotations[j]), math.sin(rotations[j])
                u = xs[None, :] * ct + ys[:, None] * st
                v = xs[None, :] * (-st) + ys[:, None] * ct
                half_w = r / math.sqrt(1.0 + aspects[j] ** 2)
                half_h = aspects[j] * half_w
                mask = (np.abs(u) <= half_w) & (np.abs(v) <= half_h)
            if not mask.any():
                continue
            region = canvas[y0:y1, x0:x1]
            if textured:
                patch = spectrum_texture(y1 - y0, x1 - x0, rng)
                region[mask] = patch[mask]
            else:
                region[mask] = colors[j]
            cov = covered[y0:y1, x0:x1]
            n_uncovered -= int(np.count_nonzero(mask & ~cov))
            cov |= mask
            if n_uncovered == 0:
                return canvas

    frac = n_uncovered / (size * size)
    raise GenerationError(
        f"max_leaves={params.max_leaves} reached with uncovered fraction {frac:.6f}"
    )


class DeadLeavesGenerator(ImageGenerator):
    def __init__(self, model: str, size: int, params: dict):
        self.model = model
        self.size = size
        variant = model.removeprefix("dead-leaves-")
        self.params = DeadLeavesParams(
            variant=variant,
            radius_mean_frac=float(params.get("radius_mean_frac", 0.08)),
            radius_lambda=params.get("radius_lambda"),
            min_radius=float(params.get("min_radius", 1.0)),
            max_leaves=int(params.get("max_leaves", 1_000_000)),
            color_source=params.get("color_source", "uniform"),
        )

    def params_dict(self) -> dict:
        p = self.params
        return {
            "radius_mean_frac": p.radius_mean_frac,
            "radius_lambda": p.radius_lambda,
            "min_radius": p.min_radius,
            "max_leaves": p.max_leaves,
            "color_source": p.color_source,
        }

    def sample(self, seed: SeedTree) -> np.ndarray:
        return generate_dead_leaves(self.size, self.params, seed)
