"""Deterministic seed derivation and the scalar distributions the generators draw from.

All randomness in the pipeline flows through a `SeedTree`: a root seed plus a
path of (label, index) steps. A node's random stream depends only on
(root_seed, path), never on call order, thread count, or platform, so any
worker can regenerate any work item independently.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedTree:
    """A node in the seed-derivation tree.

    Children are addressed by (label, index); two distinct paths yield
    statistically independent streams (BLAKE2b keyed derivation feeding PCG64).
    """

    root_seed: int
    path: tuple[tuple[str, int], ...] = ()

    def child(self, label: str, index: int = 0) -> "SeedTree":
        return SeedTree(self.root_seed, self.path + ((label, int(index)),))

    def _key(self) -> bytes:
        h = hashlib.blake2b(digest_size=16)
        h.update((self.root_seed & _U64).to_bytes(8, "little"))
        for label, index in self.path:
            lb = label.encode("utf-8")
            h.update(len(lb).to_bytes(2, "little"))
            h.update(lb)
            h.update((index & _U64).to_bytes(8, "little"))
        return h.digest()

    def generator(self) -> np.random.Generator:
        """A fresh PCG64 stream for this node; identical on every call."""
        return np.random.Generator(np.random.PCG64(int.from_bytes(self._key(), "little")))


def derive_seed(tree: SeedTree, label: str, index: int = 0) -> SeedTree:
    """Derive a child node. Stable under re-ordering of sibling derivations."""
    return tree.child(label, index)


# ---------------------------------------------------------------------------
# Scalar distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"Uniform requires lo < hi, got [{self.lo}, {self.hi}]")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=n)

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def variance(self) -> float:
        return (self.hi - self.lo) ** 2 / 12.0


@dataclass(frozen=True)
class Gaussian:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"Gaussian requires sigma > 0, got {self.sigma}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(self.mu, self.sigma, size=n)

    def mean(self) -> float:
        return self.mu

    def variance(self) -> float:
        return self.sigma**2


@dataclass(frozen=True)
class Laplacian:
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"Laplacian requires scale > 0, got {self.scale}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.laplace(0.0, self.scale, size=n)

    def mean(self) -> float:
        return 0.0

    def variance(self) -> float:
        return 2.0 * self.scale**2


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"Exponential requires rate > 0, got {self.rate}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.exponential(1.0 / self.rate, size=n)

    def mean(self) -> float:
        return 1.0 / self.rate

    def variance(self) -> float:
        return 1.0 / self.rate**2


@dataclass(frozen=True)
class GeneralizedNormal:
    """Zero-centered generalized normal, density proportional to exp(-(|c|/alpha)^beta).

    beta=2 is Gaussian with sigma = alpha/sqrt(2); beta=1 is Laplacian with
    scale alpha; beta<1 is heavy-tailed / sparse.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"GeneralizedNormal requires alpha > 0, got {self.alpha}")
        if not self.beta > 0:
            raise ValueError(f"GeneralizedNormal requires beta > 0, got {self.beta}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # Gamma representation: |c| = alpha * G^(1/beta) with G ~ Gamma(1/beta, 1),
        # sign Rademacher. Exact for all beta; no rejection loop to degenerate at
        # small beta.
        g = rng.gamma(1.0 / self.beta, 1.0, size=n)
        mag = self.alpha * np.power(g, 1.0 / self.beta)
        sign = rng.integers(0, 2, size=n).astype(np.float64) * 2.0 - 1.0
        return sign * mag

    def mean(self) -> float:
        return 0.0

    def abs_moment(self, k: int) -> float:
        """E[|c|^k] = alpha^k * Gamma((k+1)/beta) / Gamma(1/beta)."""
        return self.alpha**k * math.gamma((k + 1) / self.beta) / math.gamma(1.0 / self.beta)

    def variance(self) -> float:
        return self.abs_moment(2)


DistributionSpec = Uniform | Gaussian | Laplacian | Exponential | GeneralizedNormal


def draw(dist: DistributionSpec, n: int, seed: SeedTree) -> np.ndarray:
    """n i.i.d. samples of `dist` from the stream at `seed`."""
    return dist.sample(seed.generator(), int(n))
