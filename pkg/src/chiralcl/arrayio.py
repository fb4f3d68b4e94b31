"""Self-describing binary array files.

Layout (all header integers little-endian uint32 unless noted):

    offset 0   8 bytes   magic  b"CCLARR\\x00\\x01"  (format version 1)
    offset 8   1 byte    endianness of the payload: b"<" or b">"
    offset 9   7 bytes   dtype code, ASCII, NUL-padded (e.g. "f8", "c16")
    offset 16  uint32    ndim
    offset 20  uint32*ndim  shape
    then       payload, C (row-major) order

The header carries everything a reader in another language needs; there
is no side channel.
"""

from __future__ import annotations

import sys

import numpy as np

MAGIC = b"CCLARR\x00\x01"
_CODES = {"f4", "f8", "c8", "c16", "i4", "i8", "u1"}


class ArrayFormatError(ValueError):
    pass


def write_array(path, array) -> None:
    a = np.ascontiguousarray(array)
    code = a.dtype.str[1:]
    if code not in _CODES:
        raise ArrayFormatError(f"unsupported dtype {a.dtype}")
    endian = a.dtype.str[0]
    if endian == "=" or endian == "|":
        endian = "<" if sys.byteorder == "little" else ">"
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(endian.encode())
        fh.write(code.encode().ljust(7, b"\x00"))
        fh.write(np.uint32(a.ndim).tobytes())
        fh.write(np.asarray(a.shape, dtype="<u4").tobytes())
        fh.write(a.tobytes())


def read_array(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ArrayFormatError(f"{path}: not an array file (bad magic)")
        endian = fh.read(1).decode()
        if endian not in "<>":
            raise ArrayFormatError(f"{path}: bad endianness byte {endian!r}")
        code = fh.read(7).rstrip(b"\x00").decode()
        if code not in _CODES:
            raise ArrayFormatError(f"{path}: unknown dtype code {code!r}")
        ndim = int(np.frombuffer(fh.read(4), dtype="<u4")[0])
        if not 0 < ndim <= 8:
            raise ArrayFormatError(f"{path}: implausible ndim {ndim}")
        shape = tuple(np.frombuffer(fh.read(4 * ndim), dtype="<u4"))
        data = fh.read()
    expected = int(np.prod(shape)) * np.dtype(code).itemsize
    if len(data) != expected:
        raise ArrayFormatError(
            f"{path}: payload is {len(data)} bytes, header promises {expected}")
    return np.frombuffer(data, dtype=endian + code).reshape(shape)
