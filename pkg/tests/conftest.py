import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def make_image(rng, height=8, width=8):
    return rng.integers(0, 256, (height, width, 3), dtype=np.uint8)


@pytest.fixture
def random_image(rng):
    return make_image(rng, 8, 8)
