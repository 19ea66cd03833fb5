"""On-disk formats: raw float arrays, PGM previews, initializer files.

Raw format: a 32-byte ASCII header ``"CTRAW <width> <height>\n"`` padded
with spaces, followed by width*height little-endian float64 values in
row-major order.  Sinograms use width = num_bins and height = num_views.

Initializer format: ASCII ``"CTINIT <k>\n"`` followed by k*k stencil
values and one bias value, whitespace-separated decimals.
"""

from __future__ import annotations

import numpy as np

from .errors import RawFormatError
from .linsolve import CORRECTION_FIELD, Initializer

RAW_HEADER_SIZE = 32
RAW_MAGIC = "CTRAW"
INIT_MAGIC = "CTINIT"
PGM_MAXVAL = 65535


def write_raw(path, data: np.ndarray) -> None:
    """Write a 2D float array; width is the fast (column) dimension."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError(f"raw format stores 2D arrays, got shape {data.shape}")
    height, width = data.shape
    header = f"{RAW_MAGIC} {width} {height}\n".encode("ascii")
    if len(header) > RAW_HEADER_SIZE:
        raise ValueError(f"dimensions too large for the {RAW_HEADER_SIZE}-byte header")
    header = header[:-1].ljust(RAW_HEADER_SIZE - 1) + b"\n"
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.astype("<f8").tobytes())


def read_raw(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(RAW_HEADER_SIZE)
        if len(header) < RAW_HEADER_SIZE:
            raise RawFormatError("truncated raw header", len(header))
        try:
            text = header.decode("ascii")
        except UnicodeDecodeError as exc:
            raise RawFormatError("raw header is not ASCII", exc.start) from None
        if not text.startswith(RAW_MAGIC + " "):
            raise RawFormatError(f"missing {RAW_MAGIC} magic", 0)
        if text[-1] != "\n":
            raise RawFormatError("raw header must end with newline", RAW_HEADER_SIZE - 1)
        parts = text[len(RAW_MAGIC) :].split()
        if len(parts) != 2:
            raise RawFormatError("raw header must carry width and height", len(RAW_MAGIC) + 1)
        try:
            width, height = int(parts[0]), int(parts[1])
        except ValueError:
            raise RawFormatError("raw header dimensions are not integers", len(RAW_MAGIC) + 1) from None
        if width < 1 or height < 1:
            raise RawFormatError("raw header dimensions must be positive", len(RAW_MAGIC) + 1)
        payload = fh.read(8 * width * height + 8)
    expected = 8 * width * height
    if len(payload) != expected:
        raise RawFormatError(
            f"expected {expected} payload bytes for {width}x{height}, got {len(payload)}",
            RAW_HEADER_SIZE + min(len(payload), expected),
        )
    return np.frombuffer(payload, dtype="<f8").reshape(height, width).copy()


def write_pgm(path, data: np.ndarray, peak: float) -> None:
    """16-bit binary PGM preview, linearly windowed to [0, peak]."""
    if not peak > 0:
        raise ValueError(f"peak must be positive, got {peak}")
    data = np.asarray(data, dtype=np.float64)
    scaled = np.clip(data / peak, 0.0, 1.0) * PGM_MAXVAL
    # flip so row 0 renders at the top with y increasing upward in the data
    pixels = np.flipud(np.round(scaled).astype(">u2"))
    height, width = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n{PGM_MAXVAL}\n".encode("ascii"))
        fh.write(pixels.tobytes())


def write_initializer(path, init: Initializer) -> None:
    if init.kind != CORRECTION_FIELD:
        raise ValueError("only correction-field initializers have a file form")
    k = init.stencil.shape[0]
    lines = [f"{INIT_MAGIC} {k}"]
    for row in init.stencil:
        lines.append(" ".join(repr(float(v)) for v in row))
    lines.append(repr(float(init.bias)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_initializer(path) -> Initializer:
    with open(path, "rb") as fh:
        blob = fh.read()
    try:
        text = blob.decode("ascii")
    except UnicodeDecodeError as exc:
        raise RawFormatError("initializer file is not ASCII", exc.start) from None
    tokens = text.split()
    if not tokens or tokens[0] != INIT_MAGIC:
        raise RawFormatError(f"missing {INIT_MAGIC} magic", 0)
    if len(tokens) < 2:
        raise RawFormatError("initializer header lacks the stencil size", len(blob))
    try:
        k = int(tokens[1])
    except ValueError:
        raise RawFormatError("stencil size is not an integer", text.find(tokens[1])) from None
    if k < 1:
        raise RawFormatError("stencil size must be positive", text.find(tokens[1]))
    need = 2 + k * k + 1
    if len(tokens) != need:
        # locate the first missing/extra token for the diagnostic
        offset = len(blob) if len(tokens) < need else text.find(tokens[need])
        raise RawFormatError(
            f"expected {k}x{k} stencil values plus bias ({need - 2} numbers), got {len(tokens) - 2}",
            offset,
        )
    try:
        values = [float(tok) for tok in tokens[2:]]
    except ValueError:
        raise RawFormatError("non-numeric stencil data", 0) from None
    stencil = np.array(values[:-1]).reshape(k, k)
    return Initializer(CORRECTION_FIELD, stencil, values[-1])
