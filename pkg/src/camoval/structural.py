"""Structural similarity between a generated image and its reference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .corpus import ImageBuffer
from .errors import DimensionMismatch, TooSmall

WINDOW = 11
SIGMA = 1.5
K1 = 0.01
K2 = 0.03
DYNAMIC_RANGE = 255


@dataclass(frozen=True)
class SsimResult:
    mean_ssim: float
    window: int = WINDOW
    sigma: float = SIGMA
    k1: float = K1
    k2: float = K2
    dynamic_range: int = DYNAMIC_RANGE


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2
    coords = np.arange(size) - half
    g = np.exp(-(coords ** 2) / (2 * sigma ** 2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def luminance(image: ImageBuffer) -> np.ndarray:
    """ITU-R BT.601 luma, float64 in [0, 255]."""
    rgb = image.data.astype(np.float64)
    return 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]


def ssim(a: ImageBuffer, b: ImageBuffer) -> SsimResult:
    """Mean SSIM over all valid 11x11 Gaussian window positions.

    Images are reduced to luminance first; local statistics use a sigma=1.5
    Gaussian window and no boundary padding (valid-region convolution only).
    """
    if a.data.shape != b.data.shape:
        raise DimensionMismatch(f"{a.data.shape} vs {b.data.shape}")
    if min(a.width, a.height) < WINDOW:
        raise TooSmall(f"images must be at least {WINDOW}x{WINDOW}")

    x = luminance(a)
    y = luminance(b)
    w = _gaussian_window(WINDOW, SIGMA)

    mu_x = fftconvolve(x, w, mode="valid")
    mu_y = fftconvolve(y, w, mode="valid")
    xx = fftconvolve(x * x, w, mode="valid")
    yy = fftconvolve(y * y, w, mode="valid")
    xy = fftconvolve(x * y, w, mode="valid")

    sigma_xx = xx - mu_x * mu_x
    sigma_yy = yy - mu_y * mu_y
    sigma_xy = xy - mu_x * mu_y

    c1 = (K1 * DYNAMIC_RANGE) ** 2
    c2 = (K2 * DYNAMIC_RANGE) ** 2

    ssim_map = ((2 * mu_x * mu_y + c1) * (2 * sigma_xy + c2)) / (
        (mu_x ** 2 + mu_y ** 2 + c1) * (sigma_xx + sigma_yy + c2)
    )
    return SsimResult(mean_ssim=float(ssim_map.mean()))
