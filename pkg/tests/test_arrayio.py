import numpy as np
import pytest

from chiralcl.arrayio import ArrayFormatError, read_array, write_array


@pytest.mark.parametrize("dtype", ["f4", "f8", "c8", "c16", "i4", "i8", "u1"])
def test_round_trip_lossless(tmp_path, dtype):
    rng = np.random.default_rng(7)
    arr = rng.standard_normal((3, 5, 2))
    if dtype.startswith("c"):
        arr = arr + 1j * rng.standard_normal(arr.shape)
    arr = arr.astype(np.dtype(dtype))
    path = tmp_path / "a.arr"
    write_array(path, arr)
    back = read_array(path)
    assert back.dtype == arr.dtype
    assert back.shape == arr.shape
    assert np.array_equal(back, arr)


def test_round_trip_1d(tmp_path):
    arr = np.arange(7.0)
    write_array(tmp_path / "b.arr", arr)
    back = read_array(tmp_path / "b.arr")
    assert np.array_equal(back, arr) and back.shape == arr.shape


def test_byte_determinism(tmp_path):
    arr = np.linspace(0, 1, 24).reshape(4, 6)
    write_array(tmp_path / "x.arr", arr)
    write_array(tmp_path / "y.arr", arr)
    assert (tmp_path / "x.arr").read_bytes() == (tmp_path / "y.arr").read_bytes()


def test_fortran_order_normalized(tmp_path):
    arr = np.asfortranarray(np.arange(12.0).reshape(3, 4))
    write_array(tmp_path / "f.arr", arr)
    assert np.array_equal(read_array(tmp_path / "f.arr"), arr)


def test_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.arr"
    path.write_bytes(b"NOTMYFMT" + b"\x00" * 32)
    with pytest.raises(ArrayFormatError):
        read_array(path)


def test_rejects_truncated_payload(tmp_path):
    path = tmp_path / "t.arr"
    write_array(path, np.arange(100.0))
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(ArrayFormatError):
        read_array(path)


def test_rejects_unsupported_dtype(tmp_path):
    with pytest.raises(ArrayFormatError):
        write_array(tmp_path / "s.arr", np.array(["a", "b"]))
