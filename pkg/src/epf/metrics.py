"""Image attributes for smoothing evaluation.

SO is the ratio of summed gradient magnitudes after vs. before filtering
(1 = untouched, 0 = fully flattened); SO_S and SO_E restrict it to the
smooth mask and its complement. Brightness and color change are measured
in CIE Lab, contrast via a multi-resolution global contrast factor, and
inter-output similarity via SSIM on luminance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatchError, UndefinedContrastError
from .image import (
    GradientField,
    ImageF,
    PixelMask,
    erode,
    gradient_magnitude,
    luminance,
    to_lab,
)

EDGE_SALIENCY_THRESHOLD = 0.3
EDGE_MASK_ERODE_RADIUS = 5.0
EDGE_BLUR_SIGMA = 1.0
EDGE_NORM_PERCENTILE = 99.0
BRIGHTNESS_MIN_L = 0.5  # pixels darker than this L are excluded from the ratio mean

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

GCF_LEVELS = 9

ATTRIBUTE_CSV_HEADER = ("so", "so_smooth", "so_edge", "delta_l", "delta_c", "contrast_ratio")


@dataclass(frozen=True)
class EdgeMap:
    """Per-pixel salient-edge likelihood in [0, 1]."""

    saliency: np.ndarray

    @property
    def height(self) -> int:
        return self.saliency.shape[0]

    @property
    def width(self) -> int:
        return self.saliency.shape[1]


@dataclass(frozen=True)
class AttributeReport:
    so: float
    so_smooth: float
    so_edge: float
    delta_l: float
    delta_c: float
    contrast_ratio: float

    def to_dict(self) -> dict:
        return {
            "so": self.so,
            "so_smooth": self.so_smooth,
            "so_edge": self.so_edge,
            "delta_l": self.delta_l,
            "delta_c": self.delta_c,
            "contrast_ratio": self.contrast_ratio,
        }

    def csv_row(self) -> list:
        return [self.so, self.so_smooth, self.so_edge, self.delta_l, self.delta_c, self.contrast_ratio]


def _require_same_shape(i: ImageF, j: ImageF) -> None:
    if (i.height, i.width) != (j.height, j.width):
        raise DimensionMismatchError(
            f"images differ in size: {i.width}x{i.height} vs {j.width}x{j.height}"
        )


def so_ratio(i: ImageF, j: ImageF, mask: PixelMask | None = None,
             grad_i: GradientField | None = None, grad_j: GradientField | None = None) -> float:
    """Sum of |grad J| over sum of |grad I|, optionally restricted to a mask.

    A (near-)constant input is already maximally smooth: a vanishing
    denominator yields 1. Precomputed gradient fields may be passed to avoid
    repeated conversion in sweeps.
    """
    _require_same_shape(i, j)
    gi = (grad_i or gradient_magnitude(i)).mag
    gj = (grad_j or gradient_magnitude(j)).mag
    if mask is not None:
        if mask.bits.shape != gi.shape:
            raise DimensionMismatchError("mask dimensions do not match the images")
        gi = gi[mask.bits]
        gj = gj[mask.bits]
    denom = float(gi.sum())
    if denom < 1e-12:
        return 1.0
    return float(gj.sum()) / denom


def edge_map(i: ImageF) -> EdgeMap:
    """Salient-edge likelihood from blurred-luminance gradient magnitude.

    Gradient magnitudes of the sigma-1 blurred luminance are normalized by
    their 99th percentile and clamped to [0, 1].
    """
    y = ndimage.gaussian_filter(luminance(i), EDGE_BLUR_SIGMA, mode="nearest")
    gx = np.zeros_like(y)
    gy = np.zeros_like(y)
    gx[:, :-1] = y[:, 1:] - y[:, :-1]
    gy[:-1, :] = y[1:, :] - y[:-1, :]
    mag = np.sqrt(gx * gx + gy * gy)
    p99 = float(np.percentile(mag, EDGE_NORM_PERCENTILE))
    if p99 <= 0.0:
        return EdgeMap(np.zeros_like(mag))
    return EdgeMap(np.clip(mag / p99, 0.0, 1.0))


def smooth_mask(i: ImageF) -> PixelMask:
    """Pixels far from salient edges: threshold the edge map, then erode."""
    keep = edge_map(i).saliency <= EDGE_SALIENCY_THRESHOLD
    return erode(PixelMask(keep), EDGE_MASK_ERODE_RADIUS)


def delta_brightness(i: ImageF, j: ImageF) -> float:
    """Mean of L(J)/L(I); near-black source pixels are excluded."""
    _require_same_shape(i, j)
    li = to_lab(i).L
    lj = to_lab(j).L
    keep = li >= BRIGHTNESS_MIN_L
    if not keep.any():
        return 1.0
    return float(np.mean(lj[keep] / li[keep]))


def delta_color(i: ImageF, j: ImageF) -> float:
    """Mean Euclidean distance in the (a, b) chroma plane."""
    _require_same_shape(i, j)
    lab_i = to_lab(i)
    lab_j = to_lab(j)
    da = lab_i.a - lab_j.a
    db = lab_i.b - lab_j.b
    return float(np.mean(np.sqrt(da * da + db * db)))


def _perceptual_luminance(i: ImageF) -> np.ndarray:
    """100 * sqrt(linear luminance), the scale the contrast factor works on."""
    rgb = i.data
    if rgb.shape[2] == 1:
        rgb = np.repeat(rgb, 3, axis=2)
    lin = np.where(rgb <= 0.04045, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)
    y = (
        lin[:, :, 0] * 0.21263900587151036
        + lin[:, :, 1] * 0.7151686787677559
        + lin[:, :, 2] * 0.07219231536073371
    )
    return 100.0 * np.sqrt(y)


def _halve(plane: np.ndarray) -> np.ndarray:
    """Factor-2 superpixel averaging; odd trailing rows/cols form partial blocks."""
    h, w = plane.shape
    oh = (h + 1) // 2
    ow = (w + 1) // 2
    sums = np.zeros((oh, ow))
    counts = np.zeros((oh, ow))
    for dy in range(2):
        for dx in range(2):
            part = plane[dy::2, dx::2]
            sums[: part.shape[0], : part.shape[1]] += part
            counts[: part.shape[0], : part.shape[1]] += 1.0
    return sums / counts


def _local_contrast(plane: np.ndarray) -> float:
    """Mean over pixels of the average absolute difference to existing 4-neighbors."""
    h, w = plane.shape
    diff_sum = np.zeros((h, w))
    nbr_count = np.zeros((h, w))
    if w > 1:
        d = np.abs(np.diff(plane, axis=1))
        diff_sum[:, :-1] += d
        diff_sum[:, 1:] += d
        nbr_count[:, :-1] += 1.0
        nbr_count[:, 1:] += 1.0
    if h > 1:
        d = np.abs(np.diff(plane, axis=0))
        diff_sum[:-1, :] += d
        diff_sum[1:, :] += d
        nbr_count[:-1, :] += 1.0
        nbr_count[1:, :] += 1.0
    if not nbr_count.any():
        return 0.0
    valid = nbr_count > 0
    return float(np.mean(diff_sum[valid] / nbr_count[valid]))


def gcf_weight(level: int) -> float:
    """Resolution-level weight of the global contrast factor, level in 1..9."""
    x = level / 9.0
    return (-0.406385 * x + 0.334573) * x + 0.0877526


def gcf(i: ImageF) -> float:
    """Weighted average of local contrasts over 9 power-of-two resolutions."""
    if i.height < 2 and i.width < 2:
        raise DimensionMismatchError("global contrast needs at least a 2-pixel extent")
    plane = _perceptual_luminance(i)
    total = 0.0
    for level in range(1, GCF_LEVELS + 1):
        total += gcf_weight(level) * _local_contrast(plane)
        plane = _halve(plane)
    return total


def contrast_ratio(i: ImageF, j: ImageF) -> float:
    """GCF of the smoothed image over GCF of the input."""
    _require_same_shape(i, j)
    gi = gcf(i)
    if gi <= 0.0:
        raise UndefinedContrastError("input image has zero global contrast")
    return gcf(j) / gi


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    xs = np.arange(size) - half
    g = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


def _window_filter(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """'valid'-mode windowed weighted means."""
    from scipy.signal import fftconvolve

    return fftconvolve(plane, kernel[::-1, ::-1], mode="valid")


def ssim(i: ImageF, j: ImageF) -> float:
    """Mean structural similarity of the luminance planes.

    11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, dynamic range 1;
    averaged over fully valid window positions.
    """
    _require_same_shape(i, j)
    if i.height < SSIM_WINDOW or i.width < SSIM_WINDOW:
        raise DimensionMismatchError(
            f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM"
        )
    x = luminance(i)
    y = luminance(j)
    kernel = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    mu_x = _window_filter(x, kernel)
    mu_y = _window_filter(y, kernel)
    xx = _window_filter(x * x, kernel) - mu_x * mu_x
    yy = _window_filter(y * y, kernel) - mu_y * mu_y
    xy = _window_filter(x * y, kernel) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * xy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (xx + yy + c2)
    return float(np.mean(num / den))


def full_report(i: ImageF, j: ImageF, mask: PixelMask | None = None) -> AttributeReport:
    """All six attributes for one (input, output) pair.

    Masks are always derived from the original image; a precomputed smooth
    mask may be supplied to amortize repeated reports against one input.
    """
    _require_same_shape(i, j)
    m_s = mask if mask is not None else smooth_mask(i)
    gi = gradient_magnitude(i)
    gj = gradient_magnitude(j)
    return AttributeReport(
        so=so_ratio(i, j, grad_i=gi, grad_j=gj),
        so_smooth=so_ratio(i, j, mask=m_s, grad_i=gi, grad_j=gj),
        so_edge=so_ratio(i, j, mask=m_s.complement(), grad_i=gi, grad_j=gj),
        delta_l=delta_brightness(i, j),
        delta_c=delta_color(i, j),
        contrast_ratio=contrast_ratio(i, j),
    )
