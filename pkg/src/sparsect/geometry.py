"""Domain types: image grid, sinogram, and scan geometry.

Coordinate conventions used throughout the package:

* Image ``data[i, j]`` holds the pixel whose center sits at physical
  coordinates ``x = (j - (width - 1)/2) * pixel_size``,
  ``y = (i - (height - 1)/2) * pixel_size`` (row index increases with y).
* Sinogram ``data[v, b]`` is the line integral for view ``v`` and
  detector bin ``b`` (view-major).
* Parallel-beam view angle ``theta``: rays travel along
  ``(-sin(theta), cos(theta))``; bin ``b`` offsets the ray by
  ``s_b = (b - (num_bins - 1)/2) * detector_spacing`` along
  ``(cos(theta), sin(theta))``.
* Fan-beam view angle ``beta``: the source sits at
  ``(-R sin(beta), R cos(beta))`` with ``R = source_to_center``; ray ``b``
  leaves the source rotated by the fan angle
  ``gamma_b = (b - (num_bins - 1)/2) * detector_spacing`` (radians) off
  the central ray.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, GeometryError

PARALLEL = "parallel"
FAN = "fan"


@dataclass(frozen=True, eq=False)
class Image:
    """2D real-valued pixel grid, the reconstruction variable.

    ``data`` is a (height, width) float64 array; ``pixel_size`` is the
    physical side length of one pixel.
    """

    data: np.ndarray
    pixel_size: float = 1.0

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        object.__setattr__(self, "data", data)
        if data.ndim != 2:
            raise DimensionMismatchError(f"image data must be 2D, got shape {data.shape}")
        if not self.pixel_size > 0:
            raise ValueError(f"pixel_size must be positive, got {self.pixel_size}")
        if not np.all(np.isfinite(data)):
            raise ValueError("image data contains non-finite values")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def with_data(self, data: np.ndarray) -> "Image":
        """New image on the same grid with different pixel values."""
        return Image(data, self.pixel_size)


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Stack of line integrals, one row per view angle.

    ``data`` is a (num_views, num_bins) float64 array; ``view_angles``
    holds the per-view angles in radians, strictly increasing in
    [0, 2*pi).
    """

    data: np.ndarray
    view_angles: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        angles = np.ascontiguousarray(self.view_angles, dtype=np.float64)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "view_angles", angles)
        if data.ndim != 2:
            raise DimensionMismatchError(f"sinogram data must be 2D, got shape {data.shape}")
        if angles.ndim != 1 or angles.shape[0] != data.shape[0]:
            raise DimensionMismatchError(
                f"view_angles length {angles.shape} does not match {data.shape[0]} views"
            )
        if angles.size and (angles[0] < 0 or angles[-1] >= 2 * np.pi):
            raise ValueError("view angles must lie in [0, 2*pi)")
        if angles.size > 1 and not np.all(np.diff(angles) > 0):
            raise ValueError("view angles must be strictly increasing")

    @property
    def num_views(self) -> int:
        return self.data.shape[0]

    @property
    def num_bins(self) -> int:
        return self.data.shape[1]

    def with_data(self, data: np.ndarray) -> "Sinogram":
        return Sinogram(data, self.view_angles)


@dataclass(frozen=True)
class ScanGeometry:
    """Full description of the measurement operator.

    ``detector_spacing`` is a physical length for parallel beams and an
    angular increment in radians for fan beams.  ``source_to_center`` and
    ``source_to_detector`` apply to fan beams only.
    """

    beam: str
    num_views: int
    num_bins: int
    image_shape: tuple[int, int]  # (height, width) pixels
    pixel_size: float
    detector_spacing: float
    fov_radius: float
    source_to_center: float = 0.0
    source_to_detector: float = 0.0

    def __post_init__(self):
        if self.beam not in (PARALLEL, FAN):
            raise GeometryError(f"unknown beam type {self.beam!r}")
        if self.num_views < 1 or self.num_bins < 1:
            raise GeometryError("num_views and num_bins must be >= 1")
        if self.pixel_size <= 0 or self.detector_spacing <= 0:
            raise GeometryError("pixel_size and detector_spacing must be positive")
        if self.fov_radius <= 0:
            raise GeometryError("fov_radius must be positive")
        if self.beam == FAN:
            if self.source_to_center <= self.fov_radius:
                raise GeometryError(
                    "fan beam requires source_to_center > fov_radius "
                    f"({self.source_to_center} <= {self.fov_radius})"
                )
            if self.source_to_detector <= self.source_to_center:
                raise GeometryError("source_to_detector must exceed source_to_center")

    @property
    def view_angles(self) -> np.ndarray:
        """Uniform view angles: [0, pi) for parallel, [0, 2*pi) for fan."""
        arc = np.pi if self.beam == PARALLEL else 2 * np.pi
        return np.arange(self.num_views) * (arc / self.num_views)

    @property
    def half_width(self) -> float:
        """Physical half-extent of the larger grid dimension."""
        return 0.5 * self.pixel_size * max(self.image_shape)

    def bin_offsets(self) -> np.ndarray:
        """Centered detector coordinates: lengths (parallel) or radians (fan)."""
        return (np.arange(self.num_bins) - (self.num_bins - 1) / 2.0) * self.detector_spacing

    def check_image(self, img: Image) -> None:
        if (img.height, img.width) != self.image_shape:
            raise DimensionMismatchError(
                f"image shape {(img.height, img.width)} does not match geometry {self.image_shape}"
            )

    def check_sinogram(self, sino: Sinogram) -> None:
        if sino.data.shape != (self.num_views, self.num_bins):
            raise DimensionMismatchError(
                f"sinogram shape {sino.data.shape} does not match geometry "
                f"{(self.num_views, self.num_bins)}"
            )

    def empty_sinogram(self) -> Sinogram:
        return Sinogram(np.zeros((self.num_views, self.num_bins)), self.view_angles)


def parallel_geometry(
    image_shape: int | tuple[int, int],
    num_views: int,
    num_bins: int | None = None,
    pixel_size: float = 1.0,
    fov_radius: float | None = None,
) -> ScanGeometry:
    """Parallel-beam geometry with the detector spanning the field of view.

    ``num_bins`` defaults to 1.5x the grid size; ``fov_radius`` to the
    half-width of the grid (inscribed circle).
    """
    shape = (image_shape, image_shape) if isinstance(image_shape, int) else tuple(image_shape)
    half = 0.5 * pixel_size * max(shape)
    fov = half if fov_radius is None else fov_radius
    bins = int(np.ceil(1.5 * max(shape))) if num_bins is None else num_bins
    spacing = 2.0 * fov / bins
    return ScanGeometry(PARALLEL, num_views, bins, shape, pixel_size, spacing, fov)


def fan_geometry(
    image_shape: int | tuple[int, int],
    num_views: int,
    num_bins: int | None = None,
    pixel_size: float = 1.0,
    fov_radius: float | None = None,
    source_to_center: float | None = None,
    source_to_detector: float | None = None,
) -> ScanGeometry:
    """Equiangular fan-beam geometry whose fan covers the field of view.

    Defaults: source at twice the grid half-width, detector at four times,
    and the angular increment chosen so the outermost rays graze the FOV
    circle.
    """
    shape = (image_shape, image_shape) if isinstance(image_shape, int) else tuple(image_shape)
    half = 0.5 * pixel_size * max(shape)
    fov = half if fov_radius is None else fov_radius
    bins = int(np.ceil(1.5 * max(shape))) if num_bins is None else num_bins
    r_sc = 2.0 * half if source_to_center is None else source_to_center
    r_sd = 4.0 * half if source_to_detector is None else source_to_detector
    gamma_half = np.arcsin(min(1.0, fov / r_sc))
    spacing = 2.0 * gamma_half / max(bins - 1, 1)
    return ScanGeometry(FAN, num_views, bins, shape, pixel_size, spacing, fov, r_sc, r_sd)
