"""Embedding providers for the dataset metrics, and the external feature-file format.

The built-in provider is a hand-crafted, pretrained-free stand-in for deep
perceptual features: oriented band-coefficient fingerprints at fixed positions
(structure), band log-energies (texture), and Lab color moments. Its absolute
values are not comparable to any pretrained metric; only comparisons within a
provider are meaningful.

Feature files (for plugging in externally computed embeddings) use a 16-byte
header mirroring the shard format: magic "NOIF", version u32 = 1, count u32,
dim u32, little-endian, followed by count * dim float32 values.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Iterable, Protocol

import numpy as np

from noisegen.colorspace import Image, rgb_to_lab, srgb_to_linear
from noisegen.imageops import luminance, resize_bicubic
from noisegen.pyramid import pyramid_decompose

FEATURE_MAGIC = b"NOIF"
FEATURE_VERSION = 1
_FEATURE_HEADER = struct.Struct("<4sIII")


class EmbeddingProvider(Protocol):
    name: str
    dim: int

    def embed(self, arr: np.ndarray) -> np.ndarray: ...


class PyramidColorEmbedding:
    """Deterministic 86-d embedding: oriented band fingerprints + color moments.

    The fingerprints are raw band coefficients at fixed grid positions, so
    statistically independent content (noise) lands far apart while shared
    structure stays close; color moments are weighted below the structure
    terms so layout changes dominate the distance.
    """

    name = "pyramid-color-v1"
    dim = 86
    _input_size = 64
    _scales = 2

    def embed(self, arr: np.ndarray) -> np.ndarray:
        img = resize_bicubic(arr.astype(np.float32), self._input_size, self._input_size)
        img = np.clip(img, 0.0, 1.0)
        lum = luminance(img.astype(np.float64))
        coeffs = pyramid_decompose(lum, self._scales)
        parts: list[np.ndarray] = []
        # structure fingerprints: fixed sample grids on the two finest scales
        for band in coeffs.bands[0]:
            parts.append(band[8::16, 8::16].ravel())  # 4x4 each
        for band in coeffs.bands[1]:
            parts.append(band[8::16, 8::16].ravel())  # 2x2 each
        lab = rgb_to_lab(Image(srgb_to_linear(img).astype(np.float32))).data.astype(np.float64)
        lab = lab.reshape(-1, 3)
        parts.append(lab.mean(axis=0) / 50.0)
        parts.append(lab.std(axis=0) / 50.0)
        vec = np.concatenate(parts)
        assert vec.shape == (self.dim,)
        return vec.astype(np.float32)


def embed_images(images: Iterable[np.ndarray], provider: EmbeddingProvider) -> np.ndarray:
    feats = [provider.embed(img) for img in images]
    if not feats:
        raise ValueError("no images to embed")
    return np.stack(feats)


def write_feature_file(path: str | Path, features: np.ndarray) -> None:
    features = np.ascontiguousarray(features, dtype="<f4")
    if features.ndim != 2:
        raise ValueError("features must be an (n, d) matrix")
    with open(path, "wb") as f:
        f.write(_FEATURE_HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, *features.shape))
        f.write(features.tobytes())


def read_feature_file(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _FEATURE_HEADER.size:
        raise ValueError("feature file shorter than its 16-byte header")
    magic, version, count, dim = _FEATURE_HEADER.unpack_from(raw)
    if magic != FEATURE_MAGIC:
        raise ValueError(f"bad feature-file magic {magic!r}")
    if version != FEATURE_VERSION:
        raise ValueError(f"unsupported feature-file version {version}")
    expected = _FEATURE_HEADER.size + count * dim * 4
    if len(raw) != expected:
        raise ValueError(f"feature file is {len(raw)} bytes, header implies {expected}")
    data = np.frombuffer(raw, dtype="<f4", offset=_FEATURE_HEADER.size)
    return data.reshape(count, dim).astype(np.float32)
