"""Command-line surface: generate datasets, analyze them, render preview grids.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from noisegen.dataset import (
    DEFAULT_SHARD_SIZE,
    canonical_json,
    iter_dataset,
    load_manifest,
    quantize,
    read_shard,
    resolve_workers,
    stream_samples,
    write_shards,
)
from noisegen.embeddings import PyramidColorEmbedding, embed_images, read_feature_file
from noisegen.generators import UnknownModelError, build_generator, model_names
from noisegen.seeds import SeedTree
from noisegen.stats import (
    crop_variation,
    diversity_log_volume,
    fit_alpha,
    fit_lab_gaussian,
    frechet_distance,
    histogram_summary,
    knn_precision_recall,
    symmetric_kl,
)

USAGE_ERROR = 2
RUNTIME_ERROR = 1

ALL_STATS = ("color-kl", "alpha", "variation", "volume", "frechet", "pr")
_REFERENCE_STATS = ("color-kl", "frechet", "pr")


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    cfg = json.loads(Path(path).read_text())
    if "generator" in cfg:  # accept a manifest as a config overlay
        gen = cfg["generator"]
        flat = {"model": gen.get("model"), "size": gen.get("size"), "params": gen.get("params", {})}
        for key in ("count", "shard_size", "root_seed"):
            if key in cfg:
                flat["seed" if key == "root_seed" else key] = cfg[key]
        return flat
    return cfg


class UsageError(ValueError):
    pass


def _parse_param(kv: str):
    if "=" not in kv:
        raise argparse.ArgumentTypeError(f"--param expects key=value, got {kv!r}")
    key, raw = kv.split("=", 1)
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw


def _effective_spec(args, config: dict) -> dict:
    params = dict(config.get("params") or {})
    for key, value in args.param or []:
        params[key] = value
    model = args.model or config.get("model")
    if model is None:
        raise UsageError("--model is required (flag or config file)")
    size = args.size if args.size is not None else config.get("size", 128)
    return {"model": model, "size": int(size), "params": params}


def cmd_generate(args) -> int:
    config = _load_config(args.config)
    try:
        spec = _effective_spec(args, config)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR
    count = args.count if args.count is not None else int(config.get("count", 0))
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    shard_size = (
        args.shard_size if args.shard_size is not None else int(config.get("shard_size", DEFAULT_SHARD_SIZE))
    )
    try:
        build_generator(spec)
    except UnknownModelError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR
    if count <= 0:
        print("error: --count must be positive", file=sys.stderr)
        return USAGE_ERROR

    if args.stream:
        source = stream_samples(spec, seed)
        t0 = time.perf_counter()
        for _ in range(count):
            next(source)
        dt = time.perf_counter() - t0
        print(
            canonical_json(
                {
                    "mode": "stream",
                    "model": spec["model"],
                    "size": spec["size"],
                    "samples": count,
                    "seconds": round(dt, 3),
                    "images_per_second": round(count / dt, 2),
                }
            )
        )
        return 0

    if not args.out:
        print("error: --out is required unless --stream is given", file=sys.stderr)
        return USAGE_ERROR
    try:
        manifest = write_shards(
            spec, count, args.out, root_seed=seed, shard_size=shard_size, workers=args.workers
        )
    except Exception as e:
        print(f"error: generation failed: {e}", file=sys.stderr)
        return RUNTIME_ERROR
    print(
        canonical_json(
            {
                "out": str(args.out),
                "count": manifest["count"],
                "shards": len(manifest["shards"]),
                "workers": resolve_workers(args.workers),
            }
        )
    )
    return 0


def _load_images(dataset_dir: Path, limit: int) -> list[np.ndarray]:
    manifest = load_manifest(dataset_dir / "manifest.json")
    total = manifest["count"]
    if total == 0:
        raise ValueError("dataset is empty")
    if total <= limit:
        return list(iter_dataset(dataset_dir))
    keep = set(np.linspace(0, total - 1, limit).astype(int).tolist())
    images = []
    index = 0
    for shard in manifest["shards"]:
        arr = read_shard(dataset_dir / shard["filename"])
        for img in arr:
            if index in keep:
                images.append(img)
            index += 1
    return images


def cmd_analyze(args) -> int:
    stats = [s.strip() for s in args.stats.split(",") if s.strip()]
    unknown = [s for s in stats if s not in ALL_STATS]
    if unknown:
        print(f"error: unknown stats {unknown}; available: {', '.join(ALL_STATS)}", file=sys.stderr)
        return USAGE_ERROR
    needs_ref = [s for s in stats if s in _REFERENCE_STATS]
    if needs_ref and not args.reference:
        print(
            f"error: --reference is required for {', '.join(needs_ref)}",
            file=sys.stderr,
        )
        return USAGE_ERROR

    dataset_dir = Path(args.dataset)
    try:
        images = _load_images(dataset_dir, args.sample)
        reference_images = (
            _load_images(Path(args.reference), args.sample) if args.reference else None
        )
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return RUNTIME_ERROR

    provider = PyramidColorEmbedding()
    seed = SeedTree(args.seed)
    feats = ref_feats = None

    def dataset_features() -> np.ndarray:
        nonlocal feats
        if feats is None:
            feats = (
                read_feature_file(args.features)
                if args.features
                else embed_images(images, provider)
            )
        return feats

    def reference_features() -> np.ndarray:
        nonlocal ref_feats
        if ref_feats is None:
            ref_feats = (
                read_feature_file(args.reference_features)
                if args.reference_features
                else embed_images(reference_images, provider)
            )
        return ref_feats

    report: dict = {
        "dataset": str(dataset_dir),
        "n_images": len(images),
        "provider": provider.name,
        "metrics": {},
    }
    if args.reference:
        report["reference"] = str(args.reference)

    try:
        for stat in stats:
            if stat == "alpha":
                summary = fit_alpha(images)
                report["metrics"]["alpha"] = {
                    "mean": summary.mean_alpha,
                    "n_images": summary.n_images,
                    "n_excluded": summary.n_excluded,
                    "histogram": histogram_summary(summary.alphas()),
                }
            elif stat == "color-kl":
                p = fit_lab_gaussian(images, max_pixels_per_image=4096)
                q = fit_lab_gaussian(reference_images, max_pixels_per_image=4096)
                report["metrics"]["color-kl"] = {"symmetric_kl": symmetric_kl(p, q)}
            elif stat == "variation":
                res = crop_variation(images, provider, seed.child("variation"))
                values = {
                    "mean": res.value,
                    "provider": res.provider,
                    "n_pairs": res.n_pairs,
                }
                report["metrics"]["variation"] = values
            elif stat == "volume":
                report["metrics"]["volume"] = {
                    "log_volume": diversity_log_volume(dataset_features()),
                    "n": int(dataset_features().shape[0]),
                }
            elif stat == "frechet":
                f = dataset_features()
                r = reference_features()
                p = fit_gaussian_features(f)
                q = fit_gaussian_features(r)
                report["metrics"]["frechet"] = {"distance": frechet_distance(p, q)}
            elif stat == "pr":
                precision, recall = knn_precision_recall(
                    reference_features(), dataset_features(), k=args.knn_k
                )
                report["metrics"]["pr"] = {"precision": precision, "recall": recall, "k": args.knn_k}
    except Exception as e:
        print(f"error: analysis failed: {e}", file=sys.stderr)
        return RUNTIME_ERROR

    text = canonical_json(report)
    if args.report:
        Path(args.report).write_text(text + "\n")
    else:
        print(text)
    return 0


def fit_gaussian_features(features: np.ndarray):
    from noisegen.stats import GaussianSummary

    mean = features.mean(axis=0)
    cov = np.cov(features, rowvar=False, ddof=1)
    cov = np.atleast_2d((cov + cov.T) / 2.0)
    w, v = np.linalg.eigh(cov)
    cov = (v * np.maximum(w, 0.0)) @ v.T
    return GaussianSummary(mean, (cov + cov.T) / 2.0)


def cmd_preview(args) -> int:
    config = _load_config(args.config)
    try:
        spec = _effective_spec(args, config)
        gen = build_generator(spec)
    except (UsageError, UnknownModelError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR
    n = args.grid
    if n < 1:
        print("error: --grid must be >= 1", file=sys.stderr)
        return USAGE_ERROR
    root = SeedTree(args.seed)
    cols = min(n, int(math.ceil(math.sqrt(1.5 * n))))
    rows = int(math.ceil(n / cols))
    size = spec["size"]
    sheet = np.zeros((rows * size, cols * size, 3), dtype=np.uint8)
    try:
        for i in range(n):
            img = quantize(gen.image_at(root, i))
            r, c = divmod(i, cols)
            sheet[r * size : (r + 1) * size, c * size : (c + 1) * size] = img
    except Exception as e:
        print(f"error: generation failed at sample {i}: {e}", file=sys.stderr)
        return RUNTIME_ERROR
    try:
        PILImage.fromarray(sheet).save(args.out)
    except OSError as e:
        print(f"error: could not write {args.out}: {e}", file=sys.stderr)
        return RUNTIME_ERROR
    print(canonical_json({"out": str(args.out), "grid": [rows, cols], "cell": size}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisegen", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="materialize a dataset or run the streaming benchmark")
    g.add_argument("--model", help=f"one of: {', '.join(model_names())}")
    g.add_argument("--count", type=int)
    g.add_argument("--size", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.add_argument("--shard-size", type=int, dest="shard_size")
    g.add_argument("--workers", type=int)
    g.add_argument("--stream", action="store_true", help="generate without writing; print throughput")
    g.add_argument("--config", help="JSON config (or manifest) overlay; flags override")
    g.add_argument("--param", action="append", type=_parse_param, metavar="KEY=VALUE")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="compute dataset statistics as a JSON report")
    a.add_argument("--stats", default=",".join(ALL_STATS))
    a.add_argument("--dataset", required=True)
    a.add_argument("--reference")
    a.add_argument("--features", help="precomputed feature file for the dataset")
    a.add_argument("--reference-features", dest="reference_features")
    a.add_argument("--report", help="write the JSON report here instead of stdout")
    a.add_argument("--sample", type=int, default=1024, help="max images sampled per dataset")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--knn-k", type=int, default=3, dest="knn_k")
    a.set_defaults(func=cmd_analyze)

    p = sub.add_parser("preview", help="render a tiled grid of fresh samples to PNG")
    p.add_argument("--model")
    p.add_argument("--grid", type=int, default=96)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--param", action="append", type=_parse_param, metavar="KEY=VALUE")
    p.set_defaults(func=cmd_preview)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
