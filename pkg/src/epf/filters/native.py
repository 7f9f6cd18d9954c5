"""Native smoothing filters: Gaussian, bilateral, guided, domain transform, FGS.

Each function maps (ImageF, param) -> float array; range clamping and the
param-0 identity shortcut live in FilterInstance.apply. Filtering is per
channel in sRGB; bilateral and domain-transform range distances use the
luminance plane.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..image import ImageF, luminance

# Frozen secondary parameters.
BLF_SIGMA_D_FACTOR = 20.0   # sigma_d = 20 * sigma_r
BLF_WINDOW_SIGMAS = 2.0     # window radius = ceil(2 * sigma_d)
GIF_EPS = 0.16  # 0.4^2; keeps gradient attenuation monotone in the radius
DOM_SIGMA_S = 60.0
DOM_ITERATIONS = 3
FGS_LAMBDA = 30.0
FGS_PASSES = 3
FGS_LAMBDA_DECAY = 4.0


def gaussian_smooth(img: ImageF, sigma: float) -> np.ndarray:
    out = np.empty_like(img.data)
    for c in range(img.channels):
        out[:, :, c] = ndimage.gaussian_filter(img.data[:, :, c], sigma, mode="nearest")
    return out


def bilateral_smooth(img: ImageF, sigma_r: float) -> np.ndarray:
    """Bilateral filter; spatial sigma is slaved to the range sigma.

    The window is a (2r+1)^2 square with r = ceil(2 * sigma_d); out-of-bounds
    neighbors replicate the nearest edge pixel.
    """
    sigma_d = BLF_SIGMA_D_FACTOR * sigma_r
    r = max(1, int(np.ceil(BLF_WINDOW_SIGMAS * sigma_d)))
    data = img.data
    y = luminance(img)
    yp = np.pad(y, r, mode="edge")
    dp = np.pad(data, ((r, r), (r, r), (0, 0)), mode="edge")
    h, w = y.shape
    inv2sd = 1.0 / (2.0 * sigma_d * sigma_d)
    inv2sr = 1.0 / (2.0 * sigma_r * sigma_r)
    acc = np.zeros_like(data)
    wsum = np.zeros((h, w))
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            ws = np.exp(-(dy * dy + dx * dx) * inv2sd)
            ys = yp[r + dy : r + dy + h, r + dx : r + dx + w]
            diff = ys - y
            wgt = ws * np.exp(-(diff * diff) * inv2sr)
            acc += wgt[:, :, None] * dp[r + dy : r + dy + h, r + dx : r + dx + w, :]
            wsum += wgt
    return acc / wsum[:, :, None]


def _box_mean(plane: np.ndarray, r: int) -> np.ndarray:
    """Mean over the (2r+1)^2 window clipped to image bounds."""
    h, w = plane.shape
    ii = np.zeros((h + 1, w + 1))
    ii[1:, 1:] = plane.cumsum(axis=0).cumsum(axis=1)
    ys = np.arange(h)
    xs = np.arange(w)
    y0 = np.clip(ys - r, 0, h)
    y1 = np.clip(ys + r + 1, 0, h)
    x0 = np.clip(xs - r, 0, w)
    x1 = np.clip(xs + r + 1, 0, w)
    sums = ii[np.ix_(y1, x1)] - ii[np.ix_(y0, x1)] - ii[np.ix_(y1, x0)] + ii[np.ix_(y0, x0)]
    counts = (y1 - y0)[:, None] * (x1 - x0)[None, :]
    return sums / counts


def guided_smooth(img: ImageF, radius: float) -> np.ndarray:
    """Guided filter, self-guided per channel; real radii round to integers."""
    r = int(np.floor(radius + 0.5))
    if r == 0:
        return img.data.copy()
    out = np.empty_like(img.data)
    for c in range(img.channels):
        p = img.data[:, :, c]
        mean_p = _box_mean(p, r)
        var_p = _box_mean(p * p, r) - mean_p * mean_p
        a = var_p / (var_p + GIF_EPS)
        b = (1.0 - a) * mean_p
        out[:, :, c] = _box_mean(a, r) * p + _box_mean(b, r)
    return out


def _recursive_pass(signal: np.ndarray, fb: np.ndarray) -> np.ndarray:
    """Gastal-Oliveira recursive filter along axis 1, forward then backward.

    ``fb`` holds the per-gap feedback coefficients a^d, shape (H, W-1).
    """
    out = signal.copy()
    w = signal.shape[1]
    v = fb[:, :, None]
    for j in range(1, w):
        out[:, j] += v[:, j - 1] * (out[:, j - 1] - out[:, j])
    for j in range(w - 2, -1, -1):
        out[:, j] += v[:, j] * (out[:, j + 1] - out[:, j])
    return out


def domain_transform_smooth(img: ImageF, sigma_r: float) -> np.ndarray:
    """Domain transform, recursive-filter variant, luminance-guided."""
    y = luminance(img)
    ratio = DOM_SIGMA_S / sigma_r
    dx = 1.0 + ratio * np.abs(np.diff(y, axis=1))  # horizontal gap distances
    dy = 1.0 + ratio * np.abs(np.diff(y, axis=0))
    out = img.data.copy()
    n = DOM_ITERATIONS
    for i in range(n):
        sigma_h = DOM_SIGMA_S * np.sqrt(3.0) * 2.0 ** (n - i - 1) / np.sqrt(4.0**n - 1.0)
        a = np.exp(-np.sqrt(2.0) / sigma_h)
        out = _recursive_pass(out, a**dx)
        out = _recursive_pass(out.transpose(1, 0, 2), (a**dy).T).transpose(1, 0, 2)
    return out


def _tridiag_smooth(signal: np.ndarray, wgt: np.ndarray, lam: float) -> np.ndarray:
    """Solve (I + lam * L_w) u = g row-wise along axis 1 via the Thomas algorithm.

    ``wgt`` holds inter-pixel weights along axis 1, shape (H, W-1); L_w is the
    1D inhomogeneous Laplacian built from them.
    """
    h, w, c = signal.shape
    zero = np.zeros((h, 1))
    wl = np.concatenate([zero, wgt], axis=1)  # weight to the left neighbor
    wr = np.concatenate([wgt, zero], axis=1)
    a = -lam * wl
    b = 1.0 + lam * (wl + wr)
    cc = -lam * wr
    cp = np.empty((h, w))
    dp = np.empty((h, w, c))
    cp[:, 0] = cc[:, 0] / b[:, 0]
    dp[:, 0] = signal[:, 0] / b[:, 0, None]
    for j in range(1, w):
        m = b[:, j] - a[:, j] * cp[:, j - 1]
        cp[:, j] = cc[:, j] / m
        dp[:, j] = (signal[:, j] - a[:, j, None] * dp[:, j - 1]) / m[:, None]
    out = np.empty_like(signal)
    out[:, w - 1] = dp[:, w - 1]
    for j in range(w - 2, -1, -1):
        out[:, j] = dp[:, j] - cp[:, j, None] * out[:, j + 1]
    return out


def fast_global_smooth(img: ImageF, sigma: float) -> np.ndarray:
    """Separable global smoother: alternating 1D WLS-style solves.

    Inter-pixel weights come from the original luminance, w = exp(-|dY|/sigma);
    the smoothing weight starts at FGS_LAMBDA and decays by FGS_LAMBDA_DECAY
    each horizontal+vertical pass.
    """
    y = luminance(img)
    wx = np.exp(-np.abs(np.diff(y, axis=1)) / sigma)
    wy = np.exp(-np.abs(np.diff(y, axis=0)) / sigma)
    out = img.data.copy()
    lam = FGS_LAMBDA
    for _ in range(FGS_PASSES):
        out = _tridiag_smooth(out, wx, lam)
        out = _tridiag_smooth(out.transpose(1, 0, 2), wy.T, lam).transpose(1, 0, 2)
        lam /= FGS_LAMBDA_DECAY
    return out
