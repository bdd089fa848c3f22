"""Untrained style-based synthesis network with four initialization modes.

The architecture is a reduced StyleGAN2-style generator used purely as a
random prior: a 2-layer mapping network, a learned-constant 4x4 input, and one
modulated 3x3 convolution per resolution with bicubic 2x upsampling, noise
injection, bias, and leaky-ReLU, finished by a modulated 1x1 to-RGB.

Modes:
  - random: dense Gaussian kernels (fan-in scaled) with weight demodulation;
    noise maps are not applied.
  - highfreq: every kernel is a bank wavelet times an N(0,1) amplitude;
    power-law noise maps with exponent ~ U(0.5, 2) are added per resolution.
  - sparse: highfreq plus a Laplacian envelope on the noise maps (a 4x4 i.i.d.
    Laplacian grid bicubically upsampled and multiplied in) and a random
    U(-0.2, 0.2) bias at each convolution.
  - oriented: sparse, with the wavelets tied across output channels so each
    input channel contributes through a single filter:
    y_k = sum_l [ a_{k,l} (x_l * f_l) ] + b_k.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from noisegen.generators import ImageGenerator
from noisegen.imageops import normalize_unit_range, upsample2x_stack
from noisegen.seeds import SeedTree
from noisegen.spectrum import power_law_magnitude
from noisegen.wavelets import bank_kernels

MODES = ("random", "highfreq", "sparse", "oriented")

# Channel widths per resolution 4, 8, ..., out_size.
_WIDTH_LADDER = (512, 512, 256, 128, 64, 32, 16, 8, 8)
_LEAKY = 0.2


@dataclass(frozen=True)
class StyleNetConfig:
    out_size: int = 128
    mode: str = "random"
    latent_dim: int = 512
    channel_widths: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        n = int(np.log2(self.out_size))
        if self.out_size < 32 or (1 << n) != self.out_size:
            raise ValueError("out_size must be a power of two >= 32")
        widths = self.channel_widths or _WIDTH_LADDER[: n - 1]
        if len(widths) != n - 1:
            raise ValueError(
                f"channel_widths needs log2(out_size)-1 = {n - 1} entries, got {len(widths)}"
            )
        object.__setattr__(self, "channel_widths", tuple(int(c) for c in widths))


@dataclass
class BlockWeights:
    style_w: np.ndarray  # (C_in, latent)
    kernels: np.ndarray | None  # (C_out, C_in, 3, 3), random mode
    wavelet_idx: np.ndarray | None  # (C_out, C_in) or (C_in,) for tied mode
    amplitudes: np.ndarray | None  # (C_out, C_in)
    bias: np.ndarray  # (C_out,)
    tied: bool


@dataclass
class NetworkWeights:
    cfg: StyleNetConfig
    mapping: list[tuple[np.ndarray, np.ndarray]]
    const_input: np.ndarray  # (C0, 4, 4)
    blocks: list[BlockWeights]
    rgb_style_w: np.ndarray  # (C_last, latent)
    rgb_weight: np.ndarray  # (3, C_last)
    rgb_bias: np.ndarray  # (3,)


@dataclass(frozen=True)
class NoiseMapSpec:
    kind: str  # "none" | "powerlaw" | "powerlaw_env"
    alpha_lo: float = 0.5
    alpha_hi: float = 2.0
    envelope_grid: int = 4


def noise_spec_for_mode(mode: str) -> NoiseMapSpec:
    if mode == "random":
        return NoiseMapSpec("none")
    if mode == "highfreq":
        return NoiseMapSpec("powerlaw")
    return NoiseMapSpec("powerlaw_env")


def init_network(cfg: StyleNetConfig, seed: SeedTree) -> NetworkWeights:
    """Sample all network parameters for the configured mode.

    Kernel draws come from per-block child streams that do not depend on the
    mode's extras, so highfreq / sparse / oriented share wavelet choices and
    amplitudes for the same seed (the modes differ only in tying, noise
    envelopes, and biases).
    """
    wavelet_modes = cfg.mode != "random"
    bank = bank_kernels()
    n_bank = len(bank)

    rng_map = seed.child("mapping").generator()
    mapping = []
    dim = cfg.latent_dim
    for _ in range(2):
        w = rng_map.standard_normal((dim, dim)) / np.sqrt(dim)
        b = np.zeros(dim)
        mapping.append((w, b))

    c0 = cfg.channel_widths[0]
    const_input = seed.child("const").generator().standard_normal((c0, 4, 4))

    blocks: list[BlockWeights] = []
    widths = cfg.channel_widths
    for i in range(len(widths) - 1):
        c_in, c_out = widths[i], widths[i + 1]
        rng_k = seed.child("conv", i).generator()
        rng_s = seed.child("style", i).generator()
        style_w = rng_s.standard_normal((c_in, dim)) / np.sqrt(dim)
        if wavelet_modes:
            tied = cfg.mode == "oriented"
            if tied:
                idx = rng_k.integers(0, n_bank, size=c_in)
            else:
                idx = rng_k.integers(0, n_bank, size=(c_out, c_in))
            amps = rng_k.standard_normal((c_out, c_in))
            kernels = None
        else:
            tied = False
            idx = amps = None
            kernels = rng_k.standard_normal((c_out, c_in, 3, 3)) / np.sqrt(c_in * 9)
        if cfg.mode in ("sparse", "oriented"):
            bias = seed.child("bias", i).generator().uniform(-0.2, 0.2, size=c_out)
        else:
            bias = np.zeros(c_out)
        blocks.append(BlockWeights(style_w, kernels, idx, amps, bias, tied))

    rng_rgb = seed.child("torgb").generator()
    c_last = widths[-1]
    rgb_style_w = rng_rgb.standard_normal((c_last, dim)) / np.sqrt(dim)
    rgb_weight = rng_rgb.standard_normal((3, c_last)) / np.sqrt(c_last)
    if cfg.mode in ("sparse", "oriented"):
        rgb_bias = rng_rgb.uniform(-0.2, 0.2, size=3)
    else:
        rgb_bias = np.zeros(3)
    return NetworkWeights(cfg, mapping, const_input, blocks, rgb_style_w, rgb_weight, rgb_bias)


# ---------------------------------------------------------------------------
# Convolution paths
# ---------------------------------------------------------------------------


def _patches(x: np.ndarray) -> np.ndarray:
    """(C, 9, H, W) sliding 3x3 patches of a zero-padded (C, H, W) stack."""
    c, h, w = x.shape
    padded = np.zeros((c, h + 2, w + 2), dtype=x.dtype)
    padded[:, 1:-1, 1:-1] = x
    windows = np.lib.stride_tricks.sliding_window_view(padded, (3, 3), axis=(1, 2))
    return windows.reshape(c, h, w, 9).transpose(0, 3, 1, 2)


def conv3x3(x: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    """Dense 3x3 cross-correlation, zero padding: (C_in,H,W) x (C_out,C_in,3,3)."""
    c_in, h, w = x.shape
    c_out = kernels.shape[0]
    patches = _patches(x).reshape(c_in * 9, h * w)
    k = kernels.reshape(c_out, c_in * 9)
    return (k @ patches).reshape(c_out, h, w)


def bank_conv(x: np.ndarray, idx: np.ndarray, amps: np.ndarray, bank: np.ndarray) -> np.ndarray:
    """Per-(out,in) bank-wavelet convolution: kernel(k,l) = amps[k,l] * bank[idx[k,l]]."""
    kernels = (amps[:, :, None, None] * bank[idx]).astype(x.dtype)
    return conv3x3(x, kernels)


def tied_conv(x: np.ndarray, filters: np.ndarray, amplitudes: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """y_k = sum_l [ a_{k,l} (x_l * f_l) ] + b_k  (cross-correlation, zero pad).

    filters has one 3x3 kernel per input channel, shared across all output
    channels; amplitudes is (C_out, C_in); bias is (C_out,).
    """
    c_in, h, w = x.shape
    if filters.shape != (c_in, 3, 3):
        raise ValueError(f"filters must be ({c_in}, 3, 3), got {filters.shape}")
    if amplitudes.ndim != 2 or amplitudes.shape[1] != c_in:
        raise ValueError(f"amplitudes must be (C_out, {c_in}), got {amplitudes.shape}")
    if bias.shape != (amplitudes.shape[0],):
        raise ValueError(f"bias must be ({amplitudes.shape[0]},), got {bias.shape}")
    patches = _patches(x)  # (C_in, 9, H, W)
    responses = np.einsum("cphw,cp->chw", patches, filters.reshape(c_in, 9))
    return np.einsum("kc,chw->khw", amplitudes, responses) + bias[:, None, None]


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------


def _leaky(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0, x, _LEAKY * x)


def _noise_map(res: int, spec: NoiseMapSpec, rng: np.random.Generator) -> np.ndarray:
    alpha = rng.uniform(spec.alpha_lo, spec.alpha_hi)
    mag = power_law_magnitude(res, res, alpha, alpha)
    noise = np.fft.ifft2(mag * np.exp(2j * np.pi * rng.random((res, res)))).real
    std = noise.std()
    noise = noise / (std if std > 0 else 1.0)
    if spec.kind == "powerlaw_env":
        grid = rng.laplace(0.0, 1.0, size=(spec.envelope_grid, spec.envelope_grid))
        env = cv2.resize(grid, (res, res), interpolation=cv2.INTER_CUBIC)
        noise = noise * env
    return noise


def synthesize(weights: NetworkWeights, z_seed: SeedTree) -> np.ndarray:
    """Forward pass: z -> styles -> image, deterministic per (weights, z_seed)."""
    cfg = weights.cfg
    rng_z = z_seed.child("z").generator()
    rng_n = z_seed.child("noise").generator()
    noise_spec = noise_spec_for_mode(cfg.mode)
    bank = bank_kernels()

    z = rng_z.standard_normal(cfg.latent_dim)
    w = z / np.sqrt(np.mean(z**2) + 1e-8)
    for wm, bm in weights.mapping:
        w = _leaky(wm @ w + bm)

    x = weights.const_input.astype(np.float32)
    for block in weights.blocks:
        x = upsample2x_stack(x)
        style = (block.style_w @ w + 1.0).astype(np.float32)  # (C_in,)
        if block.kernels is not None:
            k = block.kernels * style[None, :, None, None]
            demod = np.sqrt(np.sum(k**2, axis=(1, 2, 3)) + 1e-8)
            k = (k / demod[:, None, None, None]).astype(np.float32)
            y = conv3x3(x, k)
        else:
            xm = x * style[:, None, None]
            c_in = x.shape[0]
            if block.tied:
                filters = (bank[block.wavelet_idx] / np.sqrt(c_in)).astype(np.float32)
                amps = block.amplitudes.astype(np.float32)
                y = tied_conv(xm, filters, amps, np.zeros(amps.shape[0], dtype=np.float32))
            else:
                y = bank_conv(xm, block.wavelet_idx, block.amplitudes / np.sqrt(c_in), bank)
        if noise_spec.kind != "none":
            y = y + _noise_map(y.shape[1], noise_spec, rng_n)[None, :, :].astype(np.float32)
        y = y + block.bias[:, None, None].astype(np.float32)
        x = _leaky(y)

    style = weights.rgb_style_w @ w + 1.0
    rgb = np.einsum("kc,chw->khw", (weights.rgb_weight * style[None, :]).astype(np.float32), x)
    rgb = rgb + weights.rgb_bias[:, None, None]
    return normalize_unit_range(np.transpose(rgb, (1, 2, 0)))


class StyleNetGenerator(ImageGenerator):
    """Weights are sampled once per dataset root by default; fresh z and noise
    per image. `reinit_every` re-samples the network every that many images."""

    def __init__(self, model: str, size: int, params: dict):
        self.model = model
        self.size = size
        mode = model.removeprefix("stylenet-")
        widths = params.get("channel_widths")
        self.cfg = StyleNetConfig(
            out_size=size,
            mode=mode,
            latent_dim=int(params.get("latent_dim", 512)),
            channel_widths=tuple(widths) if widths else None,
        )
        self.reinit_every = params.get("reinit_every")
        self._weights_cache: dict[tuple, NetworkWeights] = {}

    def params_dict(self) -> dict:
        return {
            "latent_dim": self.cfg.latent_dim,
            "channel_widths": list(self.cfg.channel_widths),
            "reinit_every": self.reinit_every,
        }

    def _weights(self, root: SeedTree, index: int) -> NetworkWeights:
        gen_index = 0 if not self.reinit_every else index // int(self.reinit_every)
        key = (root.root_seed, root.path, gen_index)
        if key not in self._weights_cache:
            if len(self._weights_cache) > 4:
                self._weights_cache.clear()
            self._weights_cache[key] = init_network(self.cfg, root.child("weights", gen_index))
        return self._weights_cache[key]

    def image_at(self, root: SeedTree, index: int) -> np.ndarray:
        weights = self._weights(root, index)
        return synthesize(weights, root.child("img", index))

    def sample(self, seed: SeedTree) -> np.ndarray:
        return synthesize(init_network(self.cfg, seed.child("weights")), seed)
