"""Image quality metrics: PSNR, SSIM, MAE, RMSE."""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import convolve2d

from .errors import DimensionMismatchError
from .geometry import Image

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


def _check_pair(x: Image, ref: Image) -> None:
    if x.data.shape != ref.data.shape:
        raise DimensionMismatchError(
            f"image shapes differ: {x.data.shape} vs {ref.data.shape}"
        )


def psnr(x: Image, ref: Image, peak: float) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical images."""
    _check_pair(x, ref)
    if not peak > 0:
        raise ValueError(f"peak must be positive, got {peak}")
    mse = np.mean((x.data - ref.data) ** 2)
    if mse == 0.0:
        return math.inf
    return float(10.0 * np.log10(peak**2 / mse))


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    r = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(r**2) / (2.0 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(x: Image, ref: Image, peak: float) -> float:
    """Mean local structural similarity.

    11x11 Gaussian window (sigma 1.5), stabilizers C1 = (0.01 peak)^2 and
    C2 = (0.03 peak)^2, averaged over fully interior windows.
    """
    _check_pair(x, ref)
    if not peak > 0:
        raise ValueError(f"peak must be positive, got {peak}")
    if min(x.data.shape) < SSIM_WINDOW:
        raise DimensionMismatchError(
            f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM"
        )
    a, b = x.data, ref.data
    w = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    mu_a = convolve2d(a, w, mode="valid")
    mu_b = convolve2d(b, w, mode="valid")
    var_a = convolve2d(a * a, w, mode="valid") - mu_a**2
    var_b = convolve2d(b * b, w, mode="valid") - mu_b**2
    cov = convolve2d(a * b, w, mode="valid") - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def mae_rmse(x: Image, ref: Image) -> tuple[float, float]:
    """Mean absolute error and root mean square error."""
    _check_pair(x, ref)
    diff = x.data - ref.data
    return float(np.mean(np.abs(diff))), float(np.sqrt(np.mean(diff**2)))
