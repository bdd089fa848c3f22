"""noisegen: deterministic procedural structured-noise image datasets.

Generators (dead leaves, statistical image models, untrained style-based
synthesis networks, IFS fractals), sharded dataset materialization, and a
statistics suite for measuring image and dataset properties.
"""

from noisegen.seeds import SeedTree, derive_seed, draw

__all__ = ["SeedTree", "derive_seed", "draw"]

__version__ = "0.1.0"
