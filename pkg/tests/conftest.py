import numpy as np
import pytest

from epf.image import ImageF


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, h, w, channels=3):
    return ImageF(rng.random((h, w, channels)))


@pytest.fixture
def small_color(rng):
    return random_image(rng, 16, 16, 3)


@pytest.fixture
def small_gray(rng):
    return random_image(rng, 16, 16, 1)
