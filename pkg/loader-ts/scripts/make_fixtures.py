#!/usr/bin/env python3
"""Generate loader conformance fixtures with the producer package.

Writes, per generator family, a 256-image dataset (shards + manifest) and an
`expected.bin` reference dump: the concatenated pixel bytes returned by the
producer's shard reader, in global index order. The loader test suite compares
its own decoding byte-for-byte against these dumps.
"""

import json
import sys
from pathlib import Path

from noisegen.dataset import load_manifest, read_shard_raw, write_shards

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

FAMILIES = {
    "dead-leaves": {"model": "dead-leaves-shapes", "size": 32, "params": {}},
    "statistical": {"model": "spectrum-color-wmm", "size": 32, "params": {}},
    "stylenet": {
        "model": "stylenet-oriented",
        "size": 32,
        "params": {"channel_widths": [128, 128, 64, 32]},
    },
    "fractal": {"model": "fractal", "size": 32, "params": {"points": 20000}},
}

COUNT = 256
SHARD_SIZE = 100  # three shards per family, last one partial


def main() -> int:
    for name, spec in FAMILIES.items():
        out = FIXTURES / name
        if (out / "expected.bin").exists():
            print(f"{name}: fixtures present, skipping")
            continue
        out.mkdir(parents=True, exist_ok=True)
        manifest = write_shards(spec, COUNT, out, root_seed=97, shard_size=SHARD_SIZE)
        with open(out / "expected.bin", "wb") as f:
            for shard in manifest["shards"]:
                f.write(read_shard_raw(out / shard["filename"]).tobytes())
        print(f"{name}: wrote {COUNT} images in {len(manifest['shards'])} shards")
    (FIXTURES / "families.json").write_text(json.dumps(sorted(FAMILIES), indent=2) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
