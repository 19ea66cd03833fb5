import numpy as np
import pytest

from sparsect.errors import RawFormatError
from sparsect.linsolve import Initializer
from sparsect.rawio import (
    RAW_HEADER_SIZE,
    read_initializer,
    read_raw,
    write_initializer,
    write_pgm,
    write_raw,
)


def test_raw_round_trip(tmp_path, rng):
    data = rng.standard_normal((7, 13))
    path = tmp_path / "img.raw"
    write_raw(path, data)
    back = read_raw(path)
    assert back.dtype == np.float64
    assert np.array_equal(back, data)


def test_raw_header_layout(tmp_path):
    path = tmp_path / "img.raw"
    write_raw(path, np.zeros((3, 5)))
    blob = path.read_bytes()
    header = blob[:RAW_HEADER_SIZE]
    assert header.startswith(b"CTRAW 5 3")
    assert header.endswith(b"\n")
    assert len(header) == 32
    assert len(blob) == 32 + 8 * 15
    # payload is little-endian float64
    assert np.frombuffer(blob[32:], dtype="<f8").shape == (15,)


def test_raw_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.raw"
    path.write_bytes(b"XXRAW 2 2".ljust(31) + b"\n" + b"\0" * 32)
    with pytest.raises(RawFormatError) as err:
        read_raw(path)
    assert err.value.byte_offset == 0


def test_raw_rejects_truncated_payload(tmp_path):
    path = tmp_path / "short.raw"
    write_raw(path, np.zeros((4, 4)))
    blob = path.read_bytes()
    path.write_bytes(blob[:-8])
    with pytest.raises(RawFormatError) as err:
        read_raw(path)
    assert err.value.byte_offset > 0


def test_raw_rejects_bad_dimensions(tmp_path):
    path = tmp_path / "dims.raw"
    path.write_bytes(b"CTRAW x y".ljust(31) + b"\n")
    with pytest.raises(RawFormatError):
        read_raw(path)


def test_pgm_layout(tmp_path):
    data = np.array([[0.0, 0.5], [1.0, 2.0]])
    path = tmp_path / "img.pgm"
    write_pgm(path, data, peak=1.0)
    blob = path.read_bytes()
    assert blob.startswith(b"P5\n2 2\n65535\n")
    pixels = np.frombuffer(blob[len(b"P5\n2 2\n65535\n") :], dtype=">u2").reshape(2, 2)
    # rows flip so the top of the file is the top of the scene; values
    # window to [0, peak]
    assert pixels[0, 0] == 65535  # data[1,0] = 1.0
    assert pixels[0, 1] == 65535  # data[1,1] clipped
    assert pixels[1, 0] == 0
    assert pixels[1, 1] == round(0.5 * 65535)


def test_initializer_round_trip(tmp_path, rng):
    stencil = rng.standard_normal((3, 3))
    init = Initializer("correction-field", stencil, bias=-0.125)
    path = tmp_path / "net.init"
    write_initializer(path, init)
    text = path.read_text()
    assert text.startswith("CTINIT 3\n")
    back = read_initializer(path)
    assert back.kind == "correction-field"
    assert np.array_equal(back.stencil, stencil)
    assert back.bias == -0.125


def test_initializer_rejects_malformed(tmp_path):
    path = tmp_path / "bad.init"
    path.write_text("CTINIT 2\n1 2 3\n")  # needs 4 stencil values + bias
    with pytest.raises(RawFormatError):
        read_initializer(path)
    path.write_text("NOPE 2\n1 2 3 4 5\n")
    with pytest.raises(RawFormatError) as err:
        read_initializer(path)
    assert err.value.byte_offset == 0
