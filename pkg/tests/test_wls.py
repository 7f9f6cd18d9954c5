import numpy as np

from conftest import random_image
from epf.filters.wls import build_system, wls_smooth
from epf.image import ImageF, luminance


from oracles import dense_wls_oracle as _dense_wls_oracle  # noqa: E402


def test_wls_lambda_zero_is_identity(rng):
    img = random_image(rng, 6, 6, 3)
    np.testing.assert_array_equal(wls_smooth(img, 0.0), img.data)


def test_wls_matches_dense_oracle(rng):
    img = random_image(rng, 6, 6, 3)
    out = wls_smooth(img, 1.0)
    oracle = _dense_wls_oracle(img, 1.0)
    assert np.max(np.abs(out - oracle)) < 1e-6


def test_wls_constant_image_unchanged():
    img = ImageF(np.full((8, 8, 1), 0.37))
    out = wls_smooth(img, 5.0)
    assert np.max(np.abs(out - img.data)) < 1e-9


def test_wls_residual_contract(rng):
    img = random_image(rng, 10, 10, 1)
    lam = 10.0
    out = wls_smooth(img, lam)
    m = build_system(luminance(img), lam)
    residual = m @ out[:, :, 0].ravel() - img.data[:, :, 0].ravel()
    assert np.max(np.abs(residual)) <= 1e-6
