import numpy as np
import pytest

from noisegen.pyramid import pyramid_decompose, pyramid_reconstruct


def test_round_trip_on_random_images(rng):
    worst = 0.0
    for _ in range(100):
        x = rng.standard_normal((64, 64))
        coeffs = pyramid_decompose(x, 2)
        err = np.linalg.norm(pyramid_reconstruct(coeffs) - x) / np.linalg.norm(x)
        worst = max(worst, err)
    assert worst <= 1e-3


def test_round_trip_128_n3(rng):
    x = rng.standard_normal((128, 128))
    coeffs = pyramid_decompose(x, 3)
    err = np.linalg.norm(pyramid_reconstruct(coeffs) - x) / np.linalg.norm(x)
    assert err <= 1e-6  # tight frame is exact up to float error


def test_band_grid_sizes_128():
    coeffs = pyramid_decompose(np.zeros((128, 128)), 3)
    sizes = [level[0].shape[0] for level in coeffs.bands]
    assert sizes == [128, 64, 32]
    assert coeffs.lowpass.shape == (16, 16)
    assert all(len(level) == 4 for level in coeffs.bands)


def test_constant_image_zero_bands():
    coeffs = pyramid_decompose(np.full((64, 64), 3.7), 2)
    for level in coeffs.bands:
        for band in level:
            assert np.abs(band).max() < 1e-12
    assert np.allclose(coeffs.lowpass, 3.7, atol=1e-9)


def test_energy_preserved_bandlimited(rng):
    # band-limited input: reconstruction residual energy <= 1e-6 of signal energy
    x = rng.standard_normal((64, 64))
    spec = np.fft.fftshift(np.fft.fft2(x))
    yy, xx = np.mgrid[-32:32, -32:32]
    spec[(np.hypot(xx, yy) > 24)] = 0
    x = np.fft.ifft2(np.fft.ifftshift(spec)).real
    coeffs = pyramid_decompose(x, 2)
    resid = x - pyramid_reconstruct(coeffs)
    assert (resid**2).sum() <= 1e-6 * (x**2).sum()


def test_orientation_selectivity():
    t = np.arange(64)
    # wave along x only: horizontal frequency -> 0-degree wedge
    grating = np.sin(2 * np.pi * 20 * t[None, :] / 64.0) * np.ones((64, 1))
    coeffs = pyramid_decompose(grating, 1)
    energies = np.array([(b**2).sum() for b in coeffs.bands[0]])
    assert energies.argmax() == 0
    assert energies[0] > 100 * (energies[1] + energies[3] + 1e-12)


def test_diagonal_selectivity():
    t = np.arange(64)
    grating = np.sin(2 * np.pi * 12 * (t[None, :] + t[:, None]) / 64.0)
    coeffs = pyramid_decompose(grating, 1)
    energies = np.array([(b**2).sum() for b in coeffs.bands[0]])
    assert energies.argmax() == 1  # 45-degree wedge


def test_too_small_raises():
    with pytest.raises(ValueError):
        pyramid_decompose(np.zeros((32, 32)), 3)
    with pytest.raises(ValueError):
        pyramid_decompose(np.zeros((60, 60)), 2)  # not divisible by 4


def test_deterministic(rng):
    x = rng.standard_normal((64, 64))
    a = pyramid_decompose(x, 2)
    b = pyramid_decompose(x, 2)
    for la, lb in zip(a.bands, b.bands):
        for ba, bb in zip(la, lb):
            assert np.array_equal(ba, bb)
