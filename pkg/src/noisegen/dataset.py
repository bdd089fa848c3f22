"""Sharded dataset materialization, manifests, and the streaming sample source.

Shard wire format (little-endian, 20-byte header):
    magic "NOIZ" (4 bytes) | version u32 = 1 | image_count u32 |
    height u16 | width u16 | channels u8 = 3 | dtype u8 = 0 (u8 RGB) |
    reserved u16 = 0
followed by image_count * height * width * 3 raw row-major RGB bytes. Stored
bytes are round(255 * v) of the float pipeline's [0,1] values.

Manifests are canonical JSON (sorted keys) carrying the root seed, generator
spec, shard listing, and 64-bit checksums (first 8 bytes of SHA-256, hex), so
a manifest alone regenerates every shard byte-identically.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterator

import numpy as np

from noisegen.generators import build_generator
from noisegen.seeds import SeedTree

MAGIC = b"NOIZ"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIHHBBH")
HEADER_SIZE = _HEADER.size  # 20
DEFAULT_SHARD_SIZE = 4096
WORKERS_ENV = "NOISEGEN_WORKERS"


class ShardFormatError(ValueError):
    """A shard file violated the wire format; `field` names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field


class ChecksumError(RuntimeError):
    def __init__(self, shard: str, expected: str, actual: str):
        super().__init__(f"checksum mismatch for {shard}: expected {expected}, got {actual}")
        self.shard = shard


def quantize(arr: np.ndarray) -> np.ndarray:
    """[0,1] floats -> u8 by round(255 * v)."""
    return np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)


def dequantize(arr_u8: np.ndarray) -> np.ndarray:
    return (arr_u8.astype(np.float32)) / 255.0


def checksum64(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def checksum64_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:16]


def pack_header(image_count: int, height: int, width: int) -> bytes:
    return _HEADER.pack(MAGIC, FORMAT_VERSION, image_count, height, width, 3, 0, 0)


def read_shard_raw(path: str | Path) -> np.ndarray:
    """Validated read of a shard as a (count, H, W, 3) uint8 array."""
    raw = Path(path).read_bytes()
    if len(raw) < HEADER_SIZE:
        raise ShardFormatError("length", f"file shorter than the {HEADER_SIZE}-byte header")
    magic, version, count, height, width, channels, dtype, reserved = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ShardFormatError("magic", f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise ShardFormatError("version", f"unsupported version {version}")
    if channels != 3:
        raise ShardFormatError("channels", f"expected 3 channels, got {channels}")
    if dtype != 0:
        raise ShardFormatError("dtype", f"unsupported dtype code {dtype}")
    if reserved != 0:
        raise ShardFormatError("reserved", f"reserved field must be 0, got {reserved}")
    expected = HEADER_SIZE + count * height * width * 3
    if len(raw) != expected:
        raise ShardFormatError(
            "length", f"file is {len(raw)} bytes, header implies {expected}"
        )
    data = np.frombuffer(raw, dtype=np.uint8, offset=HEADER_SIZE)
    return data.reshape(count, height, width, 3).copy()


def read_shard(path: str | Path) -> np.ndarray:
    """Shard contents as (count, H, W, 3) float32 in [0,1]."""
    return dequantize(read_shard_raw(path))


def _shard_filename(first_index: int) -> str:
    return f"shard-{first_index:08d}.noiz"


def _write_shard_job(spec: dict, root_seed: int, first: int, count: int, out_dir: str) -> dict:
    gen = build_generator(spec)
    root = SeedTree(root_seed)
    size = spec["size"]
    path = Path(out_dir) / _shard_filename(first)
    h = hashlib.sha256()
    with open(path, "wb") as f:
        header = pack_header(count, size, size)
        f.write(header)
        h.update(header)
        for i in range(first, first + count):
            img = gen.image_at(root, i)
            payload = quantize(img).tobytes()
            f.write(payload)
            h.update(payload)
    return {
        "filename": path.name,
        "first_index": first,
        "count": count,
        "checksum64": h.hexdigest()[:16],
    }


def resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def write_shards(
    spec: dict,
    count: int,
    out_dir: str | Path,
    root_seed: int,
    shard_size: int = DEFAULT_SHARD_SIZE,
    workers: int | None = None,
) -> dict:
    """Materialize `count` images into shards plus a manifest.json.

    Image i is generated from the seed path (root, "img", i); shards are
    assigned by index, so output bytes are independent of the worker count.
    Returns the manifest dict.
    """
    # validate the model and echo the fully expanded effective config
    spec = build_generator(spec).spec()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [
        (first, min(shard_size, count - first)) for first in range(0, max(count, 1), shard_size)
    ]
    if count == 0:
        jobs = []
    n_workers = resolve_workers(workers)
    if n_workers == 1 or len(jobs) <= 1:
        shards = [_write_shard_job(spec, root_seed, first, n, str(out)) for first, n in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = [
                pool.submit(_write_shard_job, spec, root_seed, first, n, str(out))
                for first, n in jobs
            ]
            shards = [f.result() for f in futures]
    shards.sort(key=lambda s: s["first_index"])
    manifest = {
        "format_version": FORMAT_VERSION,
        "root_seed": root_seed,
        "generator": spec,
        "count": count,
        "resolution": spec["size"],
        "shard_size": shard_size,
        "shards": shards,
    }
    write_manifest(out / "manifest.json", manifest)
    return manifest


def write_manifest(path: str | Path, manifest: dict) -> None:
    Path(path).write_text(canonical_json(manifest) + "\n")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True)


def load_manifest(path: str | Path) -> dict:
    manifest = json.loads(Path(path).read_text())
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ShardFormatError(
            "format_version", f"unsupported manifest version {manifest.get('format_version')}"
        )
    return manifest


def verify_dataset(dataset_dir: str | Path) -> dict:
    """Recompute shard checksums against the manifest; raises ChecksumError."""
    dataset_dir = Path(dataset_dir)
    manifest = load_manifest(dataset_dir / "manifest.json")
    for shard in manifest["shards"]:
        actual = checksum64_file(dataset_dir / shard["filename"])
        if actual != shard["checksum64"]:
            raise ChecksumError(shard["filename"], shard["checksum64"], actual)
    return manifest


def regenerate_from_manifest(manifest_path: str | Path, out_dir: str | Path, workers: int | None = None) -> dict:
    """Re-materialize a dataset from its manifest (byte-identical by contract)."""
    manifest = load_manifest(manifest_path)
    return write_shards(
        manifest["generator"],
        manifest["count"],
        out_dir,
        manifest["root_seed"],
        shard_size=manifest["shard_size"],
        workers=workers,
    )


def iter_dataset(dataset_dir: str | Path) -> Iterator[np.ndarray]:
    """Iterate a materialized dataset in index order as float32 images."""
    dataset_dir = Path(dataset_dir)
    manifest = load_manifest(dataset_dir / "manifest.json")
    for shard in manifest["shards"]:
        for img in read_shard(dataset_dir / shard["filename"]):
            yield img


def stream_samples(spec: dict, root_seed: int, start: int = 0) -> Iterator[np.ndarray]:
    """Unbounded deterministic sample source; image i equals the materialized
    image i for the same spec and root seed."""
    gen = build_generator(spec)
    root = SeedTree(root_seed)
    i = start
    while True:
        yield gen.image_at(root, i)
        i += 1
