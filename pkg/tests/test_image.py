import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image as PILImage

from epf.errors import ImageError
from epf.image import (
    ImageF,
    PixelMask,
    erode,
    gradient_magnitude,
    lab_to_image,
    load_image,
    luminance,
    save_image,
    to_lab,
)

from conftest import random_image


# ---------------------------------------------------------------- load/save

def test_load_8bit_gray_values(tmp_path):
    path = tmp_path / "g.png"
    PILImage.fromarray(np.array([[0, 255], [128, 64]], dtype=np.uint8), mode="L").save(path)
    img = load_image(path)
    assert img.channels == 1
    expected = np.array([[0.0, 1.0], [128 / 255, 64 / 255]])
    np.testing.assert_array_equal(img.data[:, :, 0], expected)


def test_load_16bit_png_full_scale(tmp_path):
    path = tmp_path / "g16.png"
    arr = np.array([[0, 65535], [32768, 1]], dtype=np.uint16)
    PILImage.fromarray(arr, mode="I;16").save(path)
    img = load_image(path)
    assert img.data[0, 1, 0] == 1.0
    assert img.data[0, 0, 0] == 0.0
    assert img.data[1, 0, 0] == pytest.approx(32768 / 65535)


def test_load_truncated_png_names_file(tmp_path):
    path = tmp_path / "broken.png"
    good = tmp_path / "good.png"
    PILImage.fromarray(np.zeros((8, 8), dtype=np.uint8), mode="L").save(good)
    path.write_bytes(good.read_bytes()[:40])
    with pytest.raises(ImageError, match="broken.png"):
        load_image(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(ImageError, match="nope.png"):
        load_image(tmp_path / "nope.png")


def test_load_unsupported_format(tmp_path):
    path = tmp_path / "x.png"
    PILImage.fromarray(np.zeros((4, 4), dtype=np.uint8), mode="L").save(path, format="BMP")
    with pytest.raises(ImageError, match="unsupported"):
        load_image(path)


def test_save_load_roundtrip_quantization(tmp_path, rng):
    img = random_image(rng, 16, 16, 3)
    path = tmp_path / "rt.png"
    save_image(img, path)
    back = load_image(path)
    assert np.max(np.abs(back.data - img.data)) <= 1.0 / 255.0


def test_save_gray_roundtrip(tmp_path, rng):
    img = random_image(rng, 9, 7, 1)
    path = tmp_path / "gray.png"
    save_image(img, path)
    back = load_image(path)
    assert back.channels == 1
    assert np.max(np.abs(back.data - img.data)) <= 1.0 / 255.0


def test_save_unwritable_path(tmp_path, rng):
    img = random_image(rng, 4, 4, 1)
    # a missing parent directory is unwritable for any euid (incl. root)
    with pytest.raises(ImageError, match="cannot write"):
        save_image(img, tmp_path / "missing" / "x.png")


def test_imagef_rejects_bad_data():
    with pytest.raises(ImageError):
        ImageF(np.full((4, 4, 1), 1.5))
    with pytest.raises(ImageError):
        ImageF(np.full((4, 4, 1), np.nan))
    with pytest.raises(ImageError):
        ImageF(np.zeros((0, 4, 1)))
    with pytest.raises(ImageError):
        ImageF(np.zeros((4, 4, 2)))


def test_imagef_is_immutable(rng):
    img = random_image(rng, 4, 4, 3)
    with pytest.raises(ValueError):
        img.data[0, 0, 0] = 0.5


# ------------------------------------------------------------------- to_lab

def _reference_srgb_to_lab(r, g, b):
    """Scalar CIE conversion, written independently of epf.image."""

    def lin(u):
        return u / 12.92 if u <= 0.04045 else ((u + 0.055) / 1.055) ** 2.4

    rl, gl, bl = lin(r), lin(g), lin(b)
    x = 0.4123907992659595 * rl + 0.35758433938387796 * gl + 0.18048078840183429 * bl
    y = 0.21263900587151036 * rl + 0.7151686787677559 * gl + 0.07219231536073371 * bl
    z = 0.019330818715591825 * rl + 0.11919477979462599 * gl + 0.9505321522496606 * bl

    def f(t):
        return t ** (1 / 3) if t > (6 / 29) ** 3 else t / (3 * (6 / 29) ** 2) + 4 / 29

    fx = f(x / 0.9504559270516717)
    fy = f(y / 0.9999999999999999)
    fz = f(z / 1.0890577507598784)
    return 116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)


def _one_pixel(r, g, b):
    return ImageF(np.array([[[r, g, b]]], dtype=float))


def test_lab_white_point():
    lab = to_lab(_one_pixel(1.0, 1.0, 1.0))
    assert lab.L[0, 0] == pytest.approx(100.0, abs=1e-3)
    assert lab.a[0, 0] == pytest.approx(0.0, abs=1e-3)
    assert lab.b[0, 0] == pytest.approx(0.0, abs=1e-3)


def test_lab_black():
    lab = to_lab(_one_pixel(0.0, 0.0, 0.0))
    assert lab.L[0, 0] == pytest.approx(0.0, abs=1e-9)
    assert lab.a[0, 0] == pytest.approx(0.0, abs=1e-9)
    assert lab.b[0, 0] == pytest.approx(0.0, abs=1e-9)


def test_lab_matches_independent_reference():
    lab = to_lab(_one_pixel(0.5, 0.2, 0.9))
    L, a, b = _reference_srgb_to_lab(0.5, 0.2, 0.9)
    assert lab.L[0, 0] == pytest.approx(L, abs=1e-9)
    assert lab.a[0, 0] == pytest.approx(a, abs=1e-9)
    assert lab.b[0, 0] == pytest.approx(b, abs=1e-9)


@pytest.mark.parametrize(
    "rgb,expected",
    [
        # Published D65 2-degree primaries (two-decimal references).
        ((1.0, 0.0, 0.0), (53.24, 80.09, 67.20)),
        ((0.0, 1.0, 0.0), (87.74, -86.18, 83.18)),
        ((0.0, 0.0, 1.0), (32.30, 79.19, -107.86)),
    ],
)
def test_lab_published_vectors(rgb, expected):
    lab = to_lab(_one_pixel(*rgb))
    assert lab.L[0, 0] == pytest.approx(expected[0], abs=0.05)
    assert lab.a[0, 0] == pytest.approx(expected[1], abs=0.05)
    assert lab.b[0, 0] == pytest.approx(expected[2], abs=0.05)


def test_gray_image_has_zero_chroma(rng):
    img = random_image(rng, 8, 8, 1)
    lab = to_lab(img)
    assert np.max(np.abs(lab.a)) < 1e-6
    assert np.max(np.abs(lab.b)) < 1e-6


def test_lab_roundtrip_many_colors(rng):
    colors = rng.random((1000, 1, 3))
    img = ImageF(colors)
    back = lab_to_image(to_lab(img))
    assert np.max(np.abs(back.data - img.data)) < 1e-4


# -------------------------------------------------------- gradient_magnitude

from oracles import gradient_oracle as _gradient_oracle  # noqa: E402


def test_gradient_constant_is_zero():
    img = ImageF(np.full((6, 6, 3), 0.4))
    assert np.all(gradient_magnitude(img).mag == 0.0)


def test_gradient_single_step():
    img = ImageF(np.array([[0.0, 1.0]])[:, :, None])
    mag = gradient_magnitude(img).mag
    y = luminance(img)
    assert mag[0, 0] == pytest.approx(abs(y[0, 1] - y[0, 0]))
    assert mag[0, 1] == 0.0


def test_gradient_matches_loop_oracle_exactly(rng):
    img = random_image(rng, 8, 8, 3)
    oracle = _gradient_oracle(luminance(img))
    np.testing.assert_array_equal(gradient_magnitude(img).mag, oracle)


@settings(max_examples=20, deadline=None)
@given(h=st.integers(1, 32), w=st.integers(1, 32), seed=st.integers(0, 2**32 - 1))
def test_gradient_oracle_bit_for_bit(h, w, seed):
    img = random_image(np.random.default_rng(seed), h, w, 1)
    oracle = _gradient_oracle(luminance(img))
    np.testing.assert_array_equal(gradient_magnitude(img).mag, oracle)


# -------------------------------------------------------------------- erode

from oracles import erode_oracle as _erode_oracle  # noqa: E402


def test_erode_radius_zero_is_identity(rng):
    bits = rng.random((9, 9)) > 0.5
    out = erode(PixelMask(bits), 0)
    np.testing.assert_array_equal(out.bits, bits)


def test_erode_single_false_center_matches_oracle():
    bits = np.ones((11, 11), dtype=bool)
    bits[5, 5] = False
    out = erode(PixelMask(bits), 5)
    np.testing.assert_array_equal(out.bits, _erode_oracle(bits, 5))
    # only pixels strictly farther than 5 from the center survive
    ys, xs = np.mgrid[0:11, 0:11]
    far = (ys - 5) ** 2 + (xs - 5) ** 2 > 25
    np.testing.assert_array_equal(out.bits, far)


def test_erode_full_mask_stays_full():
    bits = np.ones((7, 7), dtype=bool)
    out = erode(PixelMask(bits), 5)
    assert out.bits.all()


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    r1=st.integers(0, 3),
    r2=st.integers(0, 3),
)
def test_erode_anti_extensive(seed, r1, r2):
    bits = np.random.default_rng(seed).random((12, 12)) > 0.3
    once = erode(PixelMask(bits), r1)
    twice = erode(once, r2)
    assert not np.any(twice.bits & ~once.bits)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), radius=st.sampled_from([1, 2, 3, 5]))
def test_erode_matches_oracle(seed, radius):
    bits = np.random.default_rng(seed).random((10, 10)) > 0.4
    out = erode(PixelMask(bits), radius)
    np.testing.assert_array_equal(out.bits, _erode_oracle(bits, radius))
