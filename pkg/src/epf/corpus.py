"""Bundled evaluation corpus: synthetic rasters plus downscaled photographs.

The synthetic set covers steps, ramps, checkerboards, and noise mixtures at
moderate contrast; the natural set reuses the sample photographs shipped with
scikit-image, downscaled so the long side is bounded. Everything is seeded
and deterministic.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ImageError
from .image import ImageF, clamped, load_image, resize_max_side, save_image

SYNTHETIC_SIZE = 64
NATURAL_MAX_SIDE = 256
NATURAL_NAMES = ("astronaut", "camera", "chelsea", "coffee", "moon")


def _grid(size):
    return np.meshgrid(np.arange(size), np.arange(size), indexing="xy")


def _soften(plane, sigma=0.7):
    # Slight anti-aliasing keeps step edges representable after smoothing.
    return np.clip(ndimage.gaussian_filter(plane, sigma, mode="nearest"), 0.0, 1.0)


def _gray(plane):
    return clamped(plane[:, :, None])


def _color(r, g, b):
    return clamped(np.stack([r, g, b], axis=2))


def synthetic_images(size: int = SYNTHETIC_SIZE) -> dict[str, ImageF]:
    """Ten named synthetic images, keyed in deterministic generation order.

    Each structural image carries a texture or noise component: the total
    gradient magnitude of a clean monotone profile is invariant under
    smoothing, so removable fine-scale mass is what makes smoothing levels
    observable.
    """
    xs, ys = _grid(size)
    rng = np.random.default_rng(20240601)
    images: dict[str, ImageF] = {}

    def noisy(base, sigma):
        return _soften(base + sigma * rng.standard_normal((size, size)), 0.6)

    step_v = np.where(xs < size // 2, 0.3, 0.7).astype(float)
    images["step_vertical"] = _gray(noisy(step_v, 0.05))

    step_d = np.where(xs + ys < size, 0.25, 0.75).astype(float)
    grating = 0.05 * np.sin(2.0 * np.pi * (xs + ys) / 6.0)
    images["step_diagonal"] = _gray(noisy(step_d + grating, 0.02))

    ramp = 0.2 + 0.6 * xs / (size - 1)
    images["ramp_horizontal"] = _gray(noisy(ramp, 0.05))

    cx = cy = (size - 1) / 2.0
    rad = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    cone = 0.8 - 0.6 * np.clip(rad / rad.max(), 0, 1)
    images["ramp_radial"] = _gray(noisy(cone, 0.05))

    checker = np.where(((xs // 8) + (ys // 8)) % 2 == 0, 0.38, 0.62).astype(float)
    images["checker_coarse"] = _gray(noisy(checker, 0.05))

    checker_f = np.where(((xs // 4) + (ys // 4)) % 2 == 0, 0.44, 0.56).astype(float)
    images["checker_fine"] = _gray(noisy(checker_f, 0.05))

    images["noise_field"] = _gray(noisy(np.full((size, size), 0.5), 0.15))

    step_mid = np.where(xs < size // 2, 0.35, 0.65).astype(float)
    images["step_plus_noise"] = _gray(noisy(step_mid, 0.08))

    blobs = np.zeros((size, size))
    for bx, by, amp, s in ((16, 16, 0.5, 6), (44, 24, -0.35, 8), (30, 48, 0.4, 5)):
        blobs += amp * np.exp(-((xs - bx) ** 2 + (ys - by) ** 2) / (2.0 * s * s))
    images["blobs_noise"] = _gray(noisy(0.45 + blobs, 0.04))

    r = noisy(np.where(xs < size // 2, 0.7, 0.35).astype(float), 0.04)
    g = noisy(np.where(ys < size // 2, 0.6, 0.4).astype(float), 0.04)
    b = noisy(checker * 0.5 + 0.25, 0.04)
    images["color_patches"] = _color(r, g, b)

    return images


def natural_images(max_side: int = NATURAL_MAX_SIDE) -> dict[str, ImageF]:
    """Downscaled sample photographs (requires scikit-image)."""
    try:
        from skimage import data as skdata
    except ImportError as exc:  # pragma: no cover
        raise ImageError(
            "scikit-image is required for the bundled natural images; "
            "install the 'test' extra or supply your own corpus directory"
        ) from exc
    images: dict[str, ImageF] = {}
    for name in NATURAL_NAMES:
        arr = getattr(skdata, name)()
        img = ImageF(arr.astype(np.float64) / 255.0)
        img, _ = resize_max_side(img, max_side)
        images[name] = img
    return images


def build_default_corpus(out_dir, natural_max_side: int = NATURAL_MAX_SIDE,
                         synthetic_size: int = SYNTHETIC_SIZE) -> list[Path]:
    """Write the bundled corpus as PNGs; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, img in synthetic_images(synthetic_size).items():
        path = out_dir / f"syn_{name}.png"
        save_image(img, path)
        written.append(path)
    for name, img in natural_images(natural_max_side).items():
        path = out_dir / f"nat_{name}.png"
        save_image(img, path)
        written.append(path)
    return sorted(written)


def load_corpus(directory) -> list[tuple[str, ImageF]]:
    """Load every decodable PNG/JPEG in a directory, lexicographically."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ImageError(f"corpus directory not found: {directory}")
    entries = []
    for path in sorted(directory.iterdir()):
        if path.suffix.lower() not in (".png", ".jpg", ".jpeg"):
            continue
        entries.append((path.name, load_image(path)))
    if not entries:
        raise ImageError(f"no decodable images in corpus directory {directory}")
    return entries
