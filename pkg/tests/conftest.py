import numpy as np
import pytest

from noisegen.seeds import SeedTree


@pytest.fixture
def root():
    return SeedTree(0xC0FFEE)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
