"""Image decoding/encoding, CIE Lab conversion, gradients, and morphology.

Every image in the toolkit is an :class:`ImageF`: a row-major H x W x C
float64 raster with samples in [0, 1], immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from scipy import ndimage

from .errors import ImageError

# sRGB -> XYZ matrix (IEC 61966-2-1, D65 white, 2 degree observer).
_SRGB_TO_XYZ = np.array(
    [
        [0.4123907992659595, 0.35758433938387796, 0.18048078840183429],
        [0.21263900587151036, 0.7151686787677559, 0.07219231536073371],
        [0.019330818715591825, 0.11919477979462599, 0.9505321522496606],
    ]
)
_XYZ_TO_SRGB = np.linalg.inv(_SRGB_TO_XYZ)
# Row sums, so equal-component grays map to exactly neutral chroma.
_WHITE_D65 = _SRGB_TO_XYZ.sum(axis=1)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ImageF:
    """Floating-point raster; ``data`` has shape (height, width, channels)."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim == 2:
            d = d[:, :, None]
        if d.ndim != 3 or d.shape[2] not in (1, 3):
            raise ImageError(f"expected HxWx1 or HxWx3 samples, got shape {d.shape}")
        if d.shape[0] == 0 or d.shape[1] == 0:
            raise ImageError("zero-dimension image")
        d = np.ascontiguousarray(d, dtype=np.float64)
        if not np.isfinite(d).all():
            raise ImageError("image contains non-finite samples")
        if d.min() < 0.0 or d.max() > 1.0:
            raise ImageError("image samples outside [0, 1]")
        object.__setattr__(self, "data", _freeze(d))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def same_shape(self, other: "ImageF") -> bool:
        return self.data.shape == other.data.shape


def clamped(samples: np.ndarray) -> ImageF:
    """Build an ImageF from arbitrary finite samples, clamping into [0, 1]."""
    arr = np.asarray(samples, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise ImageError("cannot clamp non-finite samples")
    return ImageF(np.clip(arr, 0.0, 1.0))


@dataclass(frozen=True)
class LabImage:
    """CIE Lab planes: L in [0, 100], a/b unbounded but finite."""

    L: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        for name in ("L", "a", "b"):
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name), dtype=np.float64)))

    @property
    def height(self) -> int:
        return self.L.shape[0]

    @property
    def width(self) -> int:
        return self.L.shape[1]


@dataclass(frozen=True)
class GradientField:
    """Per-pixel non-negative gradient magnitude."""

    mag: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mag", _freeze(np.asarray(self.mag, dtype=np.float64)))

    @property
    def height(self) -> int:
        return self.mag.shape[0]

    @property
    def width(self) -> int:
        return self.mag.shape[1]


@dataclass(frozen=True)
class PixelMask:
    """Boolean pixel selection."""

    bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bits", _freeze(np.asarray(self.bits, dtype=bool)))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def complement(self) -> "PixelMask":
        return PixelMask(~self.bits)

    def count(self) -> int:
        return int(self.bits.sum())


def load_image(path) -> ImageF:
    """Decode an 8- or 16-bit PNG/JPEG into an ImageF.

    Color sources yield 3 channels, grayscale sources 1 channel; samples are
    normalized to [0, 1].
    """
    path = Path(path)
    try:
        with PILImage.open(path) as im:
            fmt = im.format
            if fmt not in ("PNG", "JPEG"):
                raise ImageError(f"unsupported format {fmt!r} for {path}")
            im.load()
            mode = im.mode
            if mode in ("1", "L", "LA", "I", "I;16", "I;16B"):
                if mode in ("1", "LA"):
                    im = im.convert("L")
                arr = np.asarray(im)
            elif mode in ("P", "RGBA", "CMYK", "YCbCr"):
                arr = np.asarray(im.convert("RGB"))
            elif mode == "RGB":
                arr = np.asarray(im)
            else:
                raise ImageError(f"unsupported pixel mode {mode!r} for {path}")
    except ImageError:
        raise
    except FileNotFoundError:
        raise ImageError(f"no such file: {path}") from None
    except OSError as exc:
        raise ImageError(f"cannot decode {path}: {exc}") from exc

    if arr.ndim not in (2, 3) or arr.size == 0:
        raise ImageError(f"zero-dimension image: {path}")
    if arr.dtype == np.uint8:
        scale = 255.0
    elif arr.dtype == np.uint16:
        scale = 65535.0
    elif arr.dtype == np.int32:
        # PIL decodes 16-bit grayscale PNG as mode "I".
        scale = 65535.0
    else:
        raise ImageError(f"unsupported sample depth {arr.dtype} for {path}")
    data = arr.astype(np.float64) / scale
    return ImageF(data)


def save_image(img: ImageF, path) -> None:
    """Encode as 8-bit PNG or JPEG depending on the file extension."""
    path = Path(path)
    arr = np.round(img.data * 255.0).astype(np.uint8)
    if img.channels == 1:
        pil = PILImage.fromarray(arr[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(arr, mode="RGB")
    suffix = path.suffix.lower()
    fmt = "JPEG" if suffix in (".jpg", ".jpeg") else "PNG"
    try:
        pil.save(path, format=fmt)
    except OSError as exc:
        raise ImageError(f"cannot write {path}: {exc}") from exc


def _srgb_to_linear(s: np.ndarray) -> np.ndarray:
    return np.where(s <= 0.04045, s / 12.92, ((s + 0.055) / 1.055) ** 2.4)


def _linear_to_srgb(lin: np.ndarray) -> np.ndarray:
    lin = np.maximum(lin, 0.0)
    return np.where(lin <= 0.0031308, lin * 12.92, 1.055 * lin ** (1.0 / 2.4) - 0.055)


def _lab_f(t: np.ndarray) -> np.ndarray:
    delta = 6.0 / 29.0
    return np.where(t > delta**3, np.cbrt(t), t / (3.0 * delta**2) + 4.0 / 29.0)


def _lab_f_inv(ft: np.ndarray) -> np.ndarray:
    delta = 6.0 / 29.0
    return np.where(ft > delta, ft**3, 3.0 * delta**2 * (ft - 4.0 / 29.0))


def to_lab(img: ImageF) -> LabImage:
    """sRGB -> linear RGB -> XYZ -> CIE Lab under the D65 white point.

    Single-channel images are treated as gray sRGB (channel replicated).
    """
    rgb = img.data
    if rgb.shape[2] == 1:
        rgb = np.repeat(rgb, 3, axis=2)
    lin = _srgb_to_linear(rgb)
    xyz = lin @ _SRGB_TO_XYZ.T
    fxyz = _lab_f(xyz / _WHITE_D65)
    fx, fy, fz = fxyz[:, :, 0], fxyz[:, :, 1], fxyz[:, :, 2]
    L = 116.0 * fy - 16.0
    a = 500.0 * (fx - fy)
    b = 200.0 * (fy - fz)
    return LabImage(L=L, a=a, b=b)


def lab_to_image(lab: LabImage, channels: int = 3) -> ImageF:
    """Inverse of :func:`to_lab`; out-of-gamut values are clamped."""
    fy = (lab.L + 16.0) / 116.0
    fx = fy + lab.a / 500.0
    fz = fy - lab.b / 200.0
    xyz = np.stack([_lab_f_inv(fx), _lab_f_inv(fy), _lab_f_inv(fz)], axis=2) * _WHITE_D65
    lin = xyz @ _XYZ_TO_SRGB.T
    srgb = np.clip(_linear_to_srgb(lin), 0.0, 1.0)
    if channels == 1:
        srgb = srgb.mean(axis=2, keepdims=True)
    return ImageF(srgb)


def luminance(img: ImageF) -> np.ndarray:
    """Lab L channel rescaled to [0, 1]; the plane gradients are computed on."""
    return to_lab(img).L / 100.0


def _forward_diff_mag(plane: np.ndarray) -> np.ndarray:
    # Forward differences with replicate boundary: the last column/row of
    # gx/gy is zero because the out-of-bounds neighbor replicates the edge.
    gx = np.zeros_like(plane)
    gy = np.zeros_like(plane)
    gx[:, :-1] = plane[:, 1:] - plane[:, :-1]
    gy[:-1, :] = plane[1:, :] - plane[:-1, :]
    return np.sqrt(gx * gx + gy * gy)


def gradient_magnitude(img: ImageF) -> GradientField:
    """Forward-difference gradient magnitude of the luminance plane."""
    return GradientField(_forward_diff_mag(luminance(img)))


def disk_structure(radius: float) -> np.ndarray:
    """Boolean disk: offsets within Euclidean distance ``radius``."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    r = int(np.floor(radius))
    dy, dx = np.ogrid[-r : r + 1, -r : r + 1]
    return (dy * dy + dx * dx) <= radius * radius


def erode(mask: PixelMask, radius: float) -> PixelMask:
    """Binary erosion by a disk; out-of-bounds neighbors are ignored."""
    if radius <= 0:
        return PixelMask(mask.bits.copy())
    structure = disk_structure(radius)
    out = ndimage.binary_erosion(mask.bits, structure=structure, border_value=1)
    return PixelMask(out)


def resize_max_side(img: ImageF, max_side: int) -> tuple[ImageF, float]:
    """Downscale so the long side is <= max_side; returns (image, scale).

    Scale is 1.0 when no resampling happened.
    """
    long_side = max(img.width, img.height)
    if long_side <= max_side:
        return img, 1.0
    scale = max_side / long_side
    new_w = max(1, int(round(img.width * scale)))
    new_h = max(1, int(round(img.height * scale)))
    arr = np.round(img.data * 255.0).astype(np.uint8)
    if img.channels == 1:
        pil = PILImage.fromarray(arr[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(arr, mode="RGB")
    pil = pil.resize((new_w, new_h), PILImage.LANCZOS)
    out = np.asarray(pil, dtype=np.float64) / 255.0
    return ImageF(out), scale
