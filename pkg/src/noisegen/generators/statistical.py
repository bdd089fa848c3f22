"""Statistical image models: power-law spectrum, color histograms, wavelet
marginals (WMM), and their compositions.

Model priors:
  - spectrum exponents a, b uniform in [0.5, 3.5], imposed as magnitude
    1/(|fx|^a + |fy|^b) on three independent noise channels in a random
    orthonormal color basis;
  - color palettes with 3 + floor(U(0,20)) regions, relative sizes
    0.001 + U(0,1) (normalized), colors uniform in the RGB cube;
  - wavelet marginals: generalized normal per scale with alpha_i = 4^(2^i)
    and beta_i ~ 0.4 + U(0, 0.4), matched iteratively from Gaussian noise.

Compositions run a cyclic projection loop for a fixed iteration budget, in the
order wavelet marginals -> spectrum -> palette. The palette step runs last
because it is an exact projection (pixels end on palette colors, so the final
color histogram matches the palette almost exactly), while a final spectrum
projection would displace colors across palette cells; the spectral slope
survives the palette quantization to within a fraction of a unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from noisegen.generators import ImageGenerator
from noisegen.histmatch import histogram_match
from noisegen.imageops import normalize_unit_range
from noisegen.pyramid import pyramid_decompose, pyramid_reconstruct
from noisegen.seeds import GeneralizedNormal, SeedTree
from noisegen.spectrum import impose_spectrum, power_law_magnitude

_LUMA = np.array([0.2126, 0.7152, 0.0722])

WMM_TARGET_SAMPLES = 100_000
WMM_ITERATIONS = 5
COMPOSED_ITERATIONS = 10


# ---------------------------------------------------------------------------
# Spectrum model
# ---------------------------------------------------------------------------


def random_orthonormal_basis(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 3x3 orthonormal matrix (columns are color directions)."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    return q * np.sign(np.diag(r))


def generate_spectrum_image(
    size: int, seed: SeedTree, a: float | None = None, b: float | None = None
) -> np.ndarray:
    """Power-law noise image: three independent channels with magnitude
    1/(|fx|^a + |fy|^b) along random orthogonal color directions."""
    rng = seed.generator()
    draw_a, draw_b = rng.uniform(0.5, 3.5, size=2)
    a = draw_a if a is None else float(a)
    b = draw_b if b is None else float(b)
    basis = random_orthonormal_basis(rng)
    mag = power_law_magnitude(size, size, a, b)
    coords = np.stack(
        [impose_spectrum(rng.standard_normal((size, size)), mag) for _ in range(3)]
    )
    rgb = np.einsum("ij,jhw->hwi", basis, coords)
    return normalize_unit_range(rgb)


def spectrum_texture(height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    """Small power-law texture patch drawn from an existing stream (leaf fills)."""
    a, b = rng.uniform(0.5, 3.5, size=2)
    basis = random_orthonormal_basis(rng)
    mag = power_law_magnitude(height, width, a, b)
    coords = np.stack(
        [impose_spectrum(rng.standard_normal((height, width)), mag) for _ in range(3)]
    )
    rgb = np.einsum("ij,jhw->hwi", basis, coords)
    return normalize_unit_range(rgb)


# ---------------------------------------------------------------------------
# Color histogram model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Palette:
    colors: np.ndarray  # (N, 3) in [0,1]
    weights: np.ndarray  # (N,) positive, sums to 1


def sample_palette_from(rng: np.random.Generator) -> Palette:
    n = 3 + int(np.floor(rng.uniform(0.0, 20.0)))
    sizes = 0.001 + rng.uniform(0.0, 1.0, size=n)
    colors = rng.uniform(0.0, 1.0, size=(n, 3))
    return Palette(colors, sizes / sizes.sum())


def sample_color_palette(seed: SeedTree) -> Palette:
    """Region-count / size / color prior for the color-histogram model."""
    return sample_palette_from(seed.generator())


def match_palette_stack(x: np.ndarray, palette: Palette) -> np.ndarray:
    """Map a (3, H, W) stack onto the palette: pixels sorted by luminance are
    assigned palette colors (sorted by their own luminance) by weight quantiles."""
    _, h, w = x.shape
    npix = h * w
    lum = _LUMA @ x.reshape(3, -1)
    order = np.argsort(lum, kind="stable")
    color_order = np.argsort(palette.colors @ _LUMA, kind="stable")
    colors = palette.colors[color_order]
    weights = palette.weights[color_order]
    bounds = np.rint(np.cumsum(weights) * npix).astype(np.int64)
    bounds[-1] = npix
    assign = np.empty(npix, dtype=np.int64)
    start = 0
    for ci, end in enumerate(bounds):
        assign[order[start:end]] = ci
        start = max(start, int(end))
    return colors[assign].T.reshape(3, h, w)


def palette_tv_distance(arr: np.ndarray, palette: Palette) -> float:
    """Total-variation distance between the image's nearest-palette-color
    histogram and the palette weights (oracle for the color constraint)."""
    pixels = arr.reshape(-1, 3) if arr.shape[-1] == 3 else arr.reshape(3, -1).T
    d2 = ((pixels[:, None, :] - palette.colors[None, :, :]) ** 2).sum(axis=2)
    nearest = np.argmin(d2, axis=1)
    counts = np.bincount(nearest, minlength=len(palette.weights)).astype(np.float64)
    emp = counts / counts.sum()
    return 0.5 * float(np.abs(emp - palette.weights).sum())


# ---------------------------------------------------------------------------
# Wavelet-marginal model
# ---------------------------------------------------------------------------


def wmm_scales_for(size: int) -> int:
    if size == 128:
        return 3
    if size == 256:
        return 4
    return max(1, int(math.floor(math.log2(size))) - 4)


def wmm_alphas(n_scales: int) -> list[float]:
    return [float(4 ** (2**i)) for i in range(n_scales)]


def _gn_rms(beta: float) -> float:
    """RMS of a unit-alpha generalized normal."""
    return math.sqrt(math.gamma(3.0 / beta) / math.gamma(1.0 / beta))


@dataclass
class WmmResult:
    """Working-space synthesis state: the final image channels, the priors, and
    the matched coefficient state the last reconstruction was assembled from."""

    channels: np.ndarray  # (3, H, W)
    alphas: list[float]
    betas: np.ndarray  # (scales, 3)
    targets: dict[tuple[int, int], np.ndarray]  # sorted samples per (scale, channel)
    matched: list  # per-channel PyramidCoeffs after the final matching pass


def synthesize_wmm_channels(
    size: int,
    seed: SeedTree,
    n_scales: int | None = None,
    iterations: int = WMM_ITERATIONS,
) -> WmmResult:
    """Iterative band matching from Gaussian noise, in working units.

    Each iteration runs decompose -> match every band to its scale's target ->
    reconstruct. `generate_wmm_texture` wraps this and normalizes to [0,1].
    """
    n = wmm_scales_for(size) if n_scales is None else int(n_scales)
    rng = seed.generator()
    alphas = wmm_alphas(n)
    betas = 0.4 + rng.uniform(0.0, 0.4, size=(n, 3))
    targets: dict[tuple[int, int], np.ndarray] = {}
    for i in range(n):
        for c in range(3):
            dist = GeneralizedNormal(alphas[i], float(betas[i, c]))
            targets[(i, c)] = np.sort(dist.sample(rng, WMM_TARGET_SAMPLES))
    chans = rng.standard_normal((3, size, size))
    matched = [None, None, None]
    for _ in range(iterations):
        for c in range(3):
            coeffs = pyramid_decompose(chans[c], n)
            for i in range(n):
                for k in range(4):
                    coeffs.bands[i][k] = histogram_match(coeffs.bands[i][k], targets[(i, c)])
            matched[c] = coeffs
            chans[c] = pyramid_reconstruct(coeffs)
    return WmmResult(chans, alphas, betas, targets, matched)


def generate_wmm_texture(
    size: int, seed: SeedTree, n_scales: int | None = None, iterations: int = WMM_ITERATIONS
) -> np.ndarray:
    result = synthesize_wmm_channels(size, seed, n_scales, iterations)
    return normalize_unit_range(np.transpose(result.channels, (1, 2, 0)))


# ---------------------------------------------------------------------------
# Compositions
# ---------------------------------------------------------------------------


def _project_spectrum_stack(x: np.ndarray, shape_mag: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Impose the magnitude shape per basis channel, preserving each channel's
    total off-DC energy and its DC term (scale- and mean-stable projection)."""
    coords = np.einsum("ij,ihw->jhw", basis, x)  # basis^T @ rgb
    shape_norm = float(np.linalg.norm(shape_mag))
    out = np.empty_like(coords)
    for c in range(3):
        spec = np.fft.fft2(coords[c])
        dc = spec[0, 0]
        spec[0, 0] = 0.0
        energy = float(np.linalg.norm(np.abs(spec)))
        target = shape_mag * (energy / shape_norm if shape_norm > 0 else 1.0)
        mag = np.abs(spec)
        phase = np.where(mag > 0, spec / np.where(mag > 0, mag, 1.0), 1.0)
        new = target * phase
        new[0, 0] = dc
        out[c] = np.fft.ifft2(new).real
    return np.einsum("ij,jhw->ihw", basis, out)


@dataclass
class ComposedResult:
    image: np.ndarray  # (H, W, 3) float32 in [0,1]
    channels: np.ndarray  # (3, H, W) working-space result (pre-quantization)
    a: float | None
    b: float | None
    palette: Palette | None
    betas: np.ndarray | None
    alphas: np.ndarray | None  # effective per (scale, channel) target scales
    targets: dict[tuple[int, int], np.ndarray] | None
    matched: list | None  # per-channel PyramidCoeffs after the final matching pass


def generate_composed(
    size: int,
    seed: SeedTree,
    use_spectrum: bool = True,
    use_color: bool = True,
    use_wmm: bool = False,
    iterations: int = COMPOSED_ITERATIONS,
    a: float | None = None,
    b: float | None = None,
) -> ComposedResult:
    """Cyclic projection over the selected constraints (marginals, spectrum,
    palette; palette last).

    When the wavelet-marginal constraint is combined with others, the absolute
    alpha ladder is incompatible with palette-range pixel values, so the
    marginal targets keep their beta (sparsity) and relative scale ladder but
    are rescaled once, after a first spectrum/color pass, to the band energies
    actually achievable in that range. A standalone wavelet constraint uses the
    absolute ladder (see `generate_wmm_texture`).
    """
    if not (use_spectrum or use_color or use_wmm):
        raise ValueError("at least one constraint must be selected")
    rng = seed.generator()
    h = w = size

    shape_mag = basis = palette = None
    if use_spectrum:
        draw_a, draw_b = rng.uniform(0.5, 3.5, size=2)
        a = draw_a if a is None else float(a)
        b = draw_b if b is None else float(b)
        basis = random_orthonormal_basis(rng)
        shape_mag = power_law_magnitude(h, w, a, b)
    else:
        a = b = None
    if use_color:
        palette = sample_palette_from(rng)

    n = wmm_scales_for(size)
    betas = alphas_eff = targets = None
    unit_targets: dict[tuple[int, int], np.ndarray] = {}
    if use_wmm:
        betas = 0.4 + rng.uniform(0.0, 0.4, size=(n, 3))
        for i in range(n):
            for c in range(3):
                dist = GeneralizedNormal(1.0, float(betas[i, c]))
                unit_targets[(i, c)] = np.sort(dist.sample(rng, WMM_TARGET_SAMPLES))

    x = rng.standard_normal((3, h, w))

    # Initial pass puts the working range in palette/spectrum units before any
    # marginal targets are pinned.
    if use_spectrum:
        x = _project_spectrum_stack(x, shape_mag, basis)
    if use_color:
        x = match_palette_stack(x, palette)

    if use_wmm:
        if not (use_spectrum or use_color):
            ladder = np.array(wmm_alphas(n))
            alphas_eff = np.repeat(ladder[:, None], 3, axis=1)
        else:
            alphas_eff = np.empty((n, 3))
            for c in range(3):
                coeffs = pyramid_decompose(x[c], n)
                for i in range(n):
                    rms = float(np.sqrt(np.mean(np.concatenate([bb.ravel() for bb in coeffs.bands[i]]) ** 2)))
                    alphas_eff[i, c] = max(rms / _gn_rms(float(betas[i, c])), 1e-9)
        targets = {
            (i, c): unit_targets[(i, c)] * alphas_eff[i, c]
            for i in range(n)
            for c in range(3)
        }

    matched = [None, None, None] if use_wmm else None
    for _ in range(iterations):
        if use_wmm:
            for c in range(3):
                coeffs = pyramid_decompose(x[c], n)
                for i in range(n):
                    for k in range(4):
                        coeffs.bands[i][k] = histogram_match(coeffs.bands[i][k], targets[(i, c)])
                matched[c] = coeffs
                x[c] = pyramid_reconstruct(coeffs)
        if use_spectrum:
            x = _project_spectrum_stack(x, shape_mag, basis)
        if use_color:
            x = match_palette_stack(x, palette)

    if use_color:
        image = np.clip(np.transpose(x, (1, 2, 0)), 0.0, 1.0).astype(np.float32)
    else:
        image = normalize_unit_range(np.transpose(x, (1, 2, 0)))
    return ComposedResult(image, x, a, b, palette, betas, alphas_eff, targets, matched)


# ---------------------------------------------------------------------------
# Registry adapter
# ---------------------------------------------------------------------------


class StatisticalGenerator(ImageGenerator):
    def __init__(self, model: str, size: int, params: dict):
        self.model = model
        self.size = size
        self.a = params.get("a")
        self.b = params.get("b")
        self.iterations = int(params.get("iterations", COMPOSED_ITERATIONS))
        self.wmm_iterations = int(params.get("wmm_iterations", WMM_ITERATIONS))
        self.n_scales = params.get("n_scales")

    def params_dict(self) -> dict:
        d: dict = {}
        if self.model == "wmm":
            d["wmm_iterations"] = self.wmm_iterations
            d["n_scales"] = self.n_scales if self.n_scales is not None else wmm_scales_for(self.size)
        else:
            if self.a is not None:
                d["a"] = self.a
            if self.b is not None:
                d["b"] = self.b
            if self.model != "spectrum":
                d["iterations"] = self.iterations
        return d

    def sample(self, seed: SeedTree) -> np.ndarray:
        if self.model == "spectrum":
            return generate_spectrum_image(self.size, seed, self.a, self.b)
        if self.model == "wmm":
            return generate_wmm_texture(self.size, seed, self.n_scales, self.wmm_iterations)
        use_wmm = self.model == "spectrum-color-wmm"
        return generate_composed(
            self.size,
            seed,
            use_spectrum=True,
            use_color=True,
            use_wmm=use_wmm,
            iterations=self.iterations,
            a=self.a,
            b=self.b,
        ).image
