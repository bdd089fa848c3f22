"""Generator registry: maps model names to bound image generators.

Every generator is a pure function of (spec, root seed, image index); dataset
writers and streams call `image_at(root, i)` so any image is addressable in
isolation and output never depends on worker scheduling.
"""

from __future__ import annotations

import numpy as np

from noisegen.seeds import SeedTree


class UnknownModelError(ValueError):
    def __init__(self, model: str, models: list[str]):
        super().__init__(f"unknown model {model!r}; available: {', '.join(models)}")
        self.model = model
        self.models = models


class GenerationError(RuntimeError):
    """Raised when a generator cannot produce a valid image."""


class ImageGenerator:
    """Base class: subclasses implement `sample` (one image from one seed node)."""

    model: str
    size: int

    def params_dict(self) -> dict:
        raise NotImplementedError

    def sample(self, seed: SeedTree) -> np.ndarray:
        raise NotImplementedError

    def image_at(self, root: SeedTree, index: int) -> np.ndarray:
        """Image for a dataset index; default derives a per-index seed."""
        return self.sample(root.child("img", index))

    def spec(self) -> dict:
        return {"model": self.model, "size": self.size, "params": self.params_dict()}


def model_names() -> list[str]:
    from noisegen.generators import deadleaves, fractal, statistical, stylenet

    names: list[str] = []
    names += [f"dead-leaves-{v}" for v in deadleaves.VARIANTS]
    names += ["spectrum", "wmm", "spectrum-color", "spectrum-color-wmm"]
    names += [f"stylenet-{m}" for m in stylenet.MODES]
    names += ["fractal"]
    return names


def build_generator(spec: dict) -> ImageGenerator:
    """Instantiate a generator from a spec dict {"model", "size", "params"?}."""
    from noisegen.generators import deadleaves, fractal, statistical, stylenet

    model = spec.get("model")
    size = int(spec.get("size", 128))
    params = dict(spec.get("params") or {})
    names = model_names()
    if model not in names:
        raise UnknownModelError(str(model), names)
    if model.startswith("dead-leaves-"):
        return deadleaves.DeadLeavesGenerator(model, size, params)
    if model in ("spectrum", "wmm", "spectrum-color", "spectrum-color-wmm"):
        return statistical.StatisticalGenerator(model, size, params)
    if model.startswith("stylenet-"):
        return stylenet.StyleNetGenerator(model, size, params)
    return fractal.FractalGenerator(model, size, params)
