"""Filtered backprojection baseline and solver initializer.

Parallel beams use the textbook pipeline: discrete Ram-Lak filtering of
each view followed by pixel-driven backprojection with angular weight
pi / num_views.  Equiangular fan beams use cosine pre-weighting, the
angle-modified ramp kernel, and inverse-square distance weighting in the
backprojection.
"""

from __future__ import annotations

import numpy as np

from .errors import GeometryError
from .geometry import FAN, PARALLEL, Image, ScanGeometry, Sinogram

WINDOWS = ("ramlak", "hann")


def _pad_length(num_bins: int) -> int:
    # power of two >= 2 * num_bins keeps the circular convolution linear
    # over all bin lags that matter
    return int(2 ** np.ceil(np.log2(max(2 * num_bins, 4))))


def _ramp_kernel(length: int, spacing: float) -> np.ndarray:
    """Discrete Ram-Lak kernel arranged for circular convolution.

    h(0) = 1/(4 ds^2), h(n) = -1/(pi n ds)^2 for odd n, 0 for even n.
    """
    k = np.zeros(length)
    k[0] = 1.0 / (4.0 * spacing**2)
    n = np.arange(1, length // 2 + 1, 2)
    vals = -1.0 / (np.pi * n * spacing) ** 2
    k[n] = vals
    k[length - n] = vals
    return k


def _window_taper(length: int, window: str) -> np.ndarray:
    if window == "ramlak":
        return np.ones(length // 2 + 1)
    if window == "hann":
        f = np.linspace(0.0, 1.0, length // 2 + 1)
        return 0.5 * (1.0 + np.cos(np.pi * f))
    raise ValueError(f"unknown filter window {window!r}; expected one of {WINDOWS}")


def _filter_views(data: np.ndarray, kernel: np.ndarray, window: str) -> np.ndarray:
    length = kernel.shape[0]
    spectrum = np.fft.rfft(kernel) * _window_taper(length, window)
    filtered = np.fft.irfft(np.fft.rfft(data, n=length, axis=1) * spectrum, n=length, axis=1)
    return filtered[:, : data.shape[1]]


def ramp_filter(sino: Sinogram, geom: ScanGeometry, window: str = "ramlak") -> Sinogram:
    """Convolve every view with the discrete Ram-Lak kernel.

    Implemented as zero-padded frequency-domain multiplication at a
    length of at least twice the bin count, which reproduces the spatial
    kernel exactly for all in-range lags.
    """
    geom.check_sinogram(sino)
    kernel = _ramp_kernel(_pad_length(geom.num_bins), geom.detector_spacing)
    return sino.with_data(_filter_views(sino.data, kernel, window))


def _pixel_grid(geom: ScanGeometry) -> tuple[np.ndarray, np.ndarray]:
    ny, nx = geom.image_shape
    h = geom.pixel_size
    x = (np.arange(nx) - (nx - 1) / 2.0) * h
    y = (np.arange(ny) - (ny - 1) / 2.0) * h
    return np.meshgrid(x, y)


def _backproject_parallel(q: np.ndarray, geom: ScanGeometry) -> np.ndarray:
    xx, yy = _pixel_grid(geom)
    ds = geom.detector_spacing
    center = (geom.num_bins - 1) / 2.0
    bins = np.arange(geom.num_bins, dtype=np.float64)
    out = np.zeros(geom.image_shape)
    for v, theta in enumerate(geom.view_angles):
        pos = (xx * np.cos(theta) + yy * np.sin(theta)) / ds + center
        out += np.interp(pos, bins, q[v], left=0.0, right=0.0)
    return out * (np.pi / geom.num_views)


def _backproject_fan(q: np.ndarray, geom: ScanGeometry) -> np.ndarray:
    xx, yy = _pixel_grid(geom)
    r_src = geom.source_to_center
    dgamma = geom.detector_spacing
    center = (geom.num_bins - 1) / 2.0
    bins = np.arange(geom.num_bins, dtype=np.float64)
    out = np.zeros(geom.image_shape)
    for v, beta in enumerate(geom.view_angles):
        sx = -r_src * np.sin(beta)
        sy = r_src * np.cos(beta)
        dx = xx - sx
        dy = yy - sy
        l2 = dx * dx + dy * dy
        # fan angle of each pixel relative to the central ray (sin b, -cos b)
        cdot = dx * np.sin(beta) - dy * np.cos(beta)
        cross = np.sin(beta) * dy + np.cos(beta) * dx
        gamma = np.arctan2(cross, cdot)
        pos = gamma / dgamma + center
        out += np.interp(pos, bins, q[v], left=0.0, right=0.0) / l2
    return out * (2.0 * np.pi / geom.num_views)


def fbp_reconstruct(sino: Sinogram, geom: ScanGeometry, window: str = "ramlak") -> Image:
    """Filtered backprojection of a sinogram onto the geometry's grid.

    Output is the raw linear reconstruction; callers that need a physical
    (nonnegative) starting image clamp it themselves.
    """
    geom.check_sinogram(sino)
    length = _pad_length(geom.num_bins)
    if geom.beam == PARALLEL:
        kernel = _ramp_kernel(length, geom.detector_spacing)
        q = _filter_views(sino.data, kernel, window) * geom.detector_spacing
        return Image(_backproject_parallel(q, geom), geom.pixel_size)
    if geom.beam == FAN:
        dgamma = geom.detector_spacing
        gamma = geom.bin_offsets()
        weighted = sino.data * (geom.source_to_center * np.cos(gamma))[None, :]
        kernel = _ramp_kernel(length, dgamma)
        # equiangular modification: (gamma / sin(gamma))^2 / 2, -> 1/2 at 0
        n = np.arange(length)
        lag = np.minimum(n, length - n) * dgamma
        with np.errstate(invalid="ignore"):
            mod = np.where(lag > 0, (lag / np.sin(lag)) ** 2, 1.0)
        kernel = 0.5 * mod * kernel
        q = _filter_views(weighted, kernel, window) * dgamma
        return Image(_backproject_fan(q, geom), geom.pixel_size)
    raise GeometryError(f"unknown beam type {geom.beam!r}")
