"""Piecewise-linear tight wavelet frame transform.

One undecimated decomposition level built from the 1D filter bank
a0 = [1, 2, 1]/4 (averaging), a1 = (sqrt(2)/4)[1, 0, -1] (first
difference), a2 = [-1, 2, -1]/4 (second difference), tensored into nine
2D channels.  Boundaries use half-sample symmetric extension
(x[-1] = x[0]), for which the summed identity sum_i W_i^T W_i = I holds
to machine precision; individual channels are not isometries, so nothing
here relies on a per-channel inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .geometry import Image

_SQRT2 = np.sqrt(2.0)
FILTERS_1D = (
    np.array([1.0, 2.0, 1.0]) / 4.0,
    np.array([1.0, 0.0, -1.0]) * (_SQRT2 / 4.0),
    np.array([-1.0, 2.0, -1.0]) / 4.0,
)
NUM_CHANNELS = 9
CHANNEL_LABELS = tuple(f"a{i}*a{j}" for i in range(3) for j in range(3))
LOWPASS = 0  # channel a0*a0


@dataclass(frozen=True, eq=False)
class FrameCoeffs:
    """Stack of frame coefficient planes, one per filter pair.

    ``channels`` has shape (m, height, width) with m = 9 for the full
    stack (channel 0 = lowpass) or m = 8 for the highpass-only view.
    """

    channels: np.ndarray
    includes_lowpass: bool = True
    channel_labels: tuple[str, ...] = CHANNEL_LABELS
    pixel_size: float = 1.0

    def __post_init__(self):
        ch = np.ascontiguousarray(self.channels, dtype=np.float64)
        object.__setattr__(self, "channels", ch)
        if ch.ndim != 3:
            raise DimensionMismatchError(f"coefficients must be (m, h, w), got {ch.shape}")
        expected = NUM_CHANNELS if self.includes_lowpass else NUM_CHANNELS - 1
        if ch.shape[0] != expected:
            raise DimensionMismatchError(
                f"expected {expected} channels, got {ch.shape[0]}"
            )

    @property
    def num_channels(self) -> int:
        return self.channels.shape[0]

    @property
    def image_shape(self) -> tuple[int, int]:
        return self.channels.shape[1:]

    def highpass(self) -> "FrameCoeffs":
        """The eight highpass planes as a lowpass-free stack."""
        if not self.includes_lowpass:
            return self
        return FrameCoeffs(self.channels[1:], False, self.channel_labels[1:], self.pixel_size)

    def highpass_view(self) -> np.ndarray:
        """Array view of the highpass planes (no copy)."""
        return self.channels[1:] if self.includes_lowpass else self.channels

    def with_channels(self, channels: np.ndarray) -> "FrameCoeffs":
        return FrameCoeffs(channels, self.includes_lowpass, self.channel_labels, self.pixel_size)


def _filt_axis(x: np.ndarray, a: np.ndarray, axis: int) -> np.ndarray:
    """3-tap correlation with half-sample symmetric extension along axis."""
    x = np.moveaxis(x, axis, 0)
    prev = np.concatenate((x[:1], x[:-1]), axis=0)
    nxt = np.concatenate((x[1:], x[-1:]), axis=0)
    return np.moveaxis(a[0] * prev + a[1] * x + a[2] * nxt, 0, axis)


def _filt_axis_adjoint(c: np.ndarray, a: np.ndarray, axis: int) -> np.ndarray:
    """Exact transpose of :func:`_filt_axis` along one axis."""
    c = np.moveaxis(c, axis, 0)
    out = a[1] * c
    out[:-1] += a[0] * c[1:]
    out[1:] += a[2] * c[:-1]
    out[0] += a[0] * c[0]
    out[-1] += a[2] * c[-1]
    return np.moveaxis(out, 0, axis)


def frame_decompose(img: Image) -> FrameCoeffs:
    """One-level separable frame transform: all nine channel planes.

    Channel 3*i + j filters rows with a_j (x direction) and columns with
    a_i (y direction); channel 0 is the lowpass plane.
    """
    if img.height < 3 or img.width < 3:
        raise DimensionMismatchError(
            f"image must be at least 3x3 for the frame transform, got "
            f"{img.height}x{img.width}"
        )
    rows = [_filt_axis(img.data, a, axis=1) for a in FILTERS_1D]
    out = np.empty((NUM_CHANNELS, img.height, img.width))
    for i, a in enumerate(FILTERS_1D):
        for j in range(3):
            out[3 * i + j] = _filt_axis(rows[j], a, axis=0)
    return FrameCoeffs(out, pixel_size=img.pixel_size)


def frame_adjoint(coeffs: FrameCoeffs) -> Image:
    """Exact adjoint of :func:`frame_decompose`, summed over channels.

    Accepts the full nine-channel stack or a highpass-only stack (the
    missing lowpass plane is treated as zero).
    """
    ch = coeffs.channels
    offset = 0 if coeffs.includes_lowpass else 1
    acc = np.zeros(coeffs.image_shape)
    for c in range(ch.shape[0]):
        i, j = divmod(c + offset, 3)
        plane = _filt_axis_adjoint(ch[c], FILTERS_1D[i], axis=0)
        acc += _filt_axis_adjoint(plane, FILTERS_1D[j], axis=1)
    return Image(acc, coeffs.pixel_size)


def frame_adjoint_weighted(coeffs: FrameCoeffs, weights: np.ndarray) -> np.ndarray:
    """sum_i w_i * W_i^T c_i as a bare array; weights align with channels."""
    ch = coeffs.channels
    offset = 0 if coeffs.includes_lowpass else 1
    acc = np.zeros(coeffs.image_shape)
    for c in range(ch.shape[0]):
        i, j = divmod(c + offset, 3)
        plane = _filt_axis_adjoint(ch[c], FILTERS_1D[i], axis=0)
        acc += weights[c] * _filt_axis_adjoint(plane, FILTERS_1D[j], axis=1)
    return acc
