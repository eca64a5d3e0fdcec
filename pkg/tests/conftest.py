import numpy as np
import pytest

from coingp.imagery import GrayImage


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_image(rng, height, width):
    return GrayImage(rng.integers(0, 256, size=(height, width), dtype=np.uint8))
