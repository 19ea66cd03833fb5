"""Synthetic ground-truth images and sinogram noise models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Image, Sinogram

# Modified Shepp-Logan ellipses: (intensity, a, b, x0, y0, angle_deg).
# Intensities are additive; values stay within [0, 1].
SHEPP_LOGAN_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)

RNG_ALGORITHM = "numpy PCG64 (np.random.default_rng)"


def shepp_logan(n: int, pixel_size: float | None = None) -> Image:
    """Modified Shepp-Logan phantom on an n x n grid.

    Each pixel takes the algebraic sum of the intensities of the ellipses
    containing its center (cell-centered sampling of [-1, 1]^2).
    ``pixel_size`` defaults to 2/n so the phantom spans 2 physical units.
    """
    if n < 16:
        raise ValueError(f"phantom size must be at least 16, got {n}")
    coords = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
    xx, yy = np.meshgrid(coords, coords)
    data = np.zeros((n, n))
    for value, a, b, x0, y0, deg in SHEPP_LOGAN_ELLIPSES:
        phi = np.deg2rad(deg)
        xr = (xx - x0) * np.cos(phi) + (yy - y0) * np.sin(phi)
        yr = -(xx - x0) * np.sin(phi) + (yy - y0) * np.cos(phi)
        data[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += value
    # intensity sums are exact multiples of 0.1; clear cancellation dust
    np.maximum(data, 0.0, out=data)
    return Image(data, 2.0 / n if pixel_size is None else pixel_size)


@dataclass(frozen=True)
class NoiseSpec:
    """Sinogram degradation: optional Poisson counting stage, then
    additive Gaussian noise of standard deviation ``gaussian_sigma``.

    ``poisson_i0`` is the incident photon count per ray; ``None``
    disables the counting stage.  Identical seeds reproduce identical
    noise (generator: numpy PCG64).
    """

    gaussian_sigma: float = 0.0
    poisson_i0: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.gaussian_sigma < 0:
            raise ValueError(f"gaussian_sigma must be >= 0, got {self.gaussian_sigma}")
        if self.poisson_i0 is not None and not self.poisson_i0 > 0:
            raise ValueError(f"poisson_i0 must be positive, got {self.poisson_i0}")

    @property
    def label(self) -> str:
        parts = []
        if self.poisson_i0 is not None:
            parts.append(f"poisson{self.poisson_i0:g}")
        parts.append(f"sigma{self.gaussian_sigma:g}")
        return "+".join(parts)


def add_noise(sino: Sinogram, spec: NoiseSpec) -> Sinogram:
    """Degrade a sinogram per the noise specification.

    Poisson stage: counts c ~ Poisson(I0 * exp(-s)) per bin, re-logged as
    s' = -ln(max(c, 1) / I0); requires nonnegative line integrals.
    Gaussian stage: adds iid N(0, sigma^2).  With sigma = 0 and no
    Poisson stage the input passes through bit-identically.
    """
    if spec.gaussian_sigma == 0.0 and spec.poisson_i0 is None:
        return sino
    rng = np.random.default_rng(spec.seed)
    data = sino.data
    if spec.poisson_i0 is not None:
        if np.any(data < 0):
            raise ValueError("Poisson noise requires nonnegative line integrals")
        counts = rng.poisson(spec.poisson_i0 * np.exp(-data))
        data = -np.log(np.maximum(counts, 1) / spec.poisson_i0)
    if spec.gaussian_sigma > 0.0:
        data = data + rng.normal(0.0, spec.gaussian_sigma, size=data.shape)
    return sino.with_data(data)
