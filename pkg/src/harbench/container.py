"""Versioned binary container used for dataset and model files.

Layout (all integers little-endian):

    offset 0   8 bytes   magic
    offset 8   4 bytes   u32 format version
    offset 12  4 bytes   u32 header length H
    offset 16  H bytes   UTF-8 JSON header
    ...                  raw array payloads, in header order, C-contiguous
    last 4 bytes         CRC32 of everything before it

The header carries caller metadata plus an "arrays" manifest:
[{"name": ..., "dtype": ..., "shape": [...]}, ...]. Dtypes are written
in explicit byte order (e.g. "<f8") so files are portable.
"""
from __future__ import annotations

import json
import zlib

import numpy as np

from .errors import ChecksumError, FileFormatError, TruncatedFileError, VersionError

FORMAT_VERSION = 1

_HEADER_FIXED = 16
_CRC_BYTES = 4


def _wire_dtype(arr: np.ndarray) -> str:
    dt = arr.dtype.newbyteorder("<")
    return dt.str


def write_container(path, magic: bytes, header: dict, arrays: dict[str, np.ndarray],
                    version: int = FORMAT_VERSION) -> None:
    if len(magic) != 8:
        raise ValueError("magic must be exactly 8 bytes")
    manifest = []
    payloads = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        arr = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        manifest.append({"name": name, "dtype": _wire_dtype(arr), "shape": list(arr.shape)})
        payloads.append(arr.tobytes())
    full_header = dict(header)
    full_header["arrays"] = manifest
    header_bytes = json.dumps(full_header, sort_keys=True, ensure_ascii=False).encode("utf-8")

    crc = 0
    with open(path, "wb") as fh:
        def emit(chunk: bytes):
            nonlocal crc
            crc = zlib.crc32(chunk, crc)
            fh.write(chunk)

        emit(magic)
        emit(version.to_bytes(4, "little"))
        emit(len(header_bytes).to_bytes(4, "little"))
        emit(header_bytes)
        for blob in payloads:
            emit(blob)
        fh.write((crc & 0xFFFFFFFF).to_bytes(4, "little"))


def read_container(path, magic: bytes) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a container, verifying magic, version, length, and checksum.

    Each failure mode raises a distinct error type so callers (and users)
    can tell a stale format from a damaged file.
    """
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < len(magic):
        raise TruncatedFileError(f"{path}: file shorter than magic header")
    if buf[: len(magic)] != magic:
        raise FileFormatError(
            f"{path}: bad magic {buf[:len(magic)]!r}, expected {magic!r}"
        )
    if len(buf) < _HEADER_FIXED:
        raise TruncatedFileError(f"{path}: truncated fixed header")
    version = int.from_bytes(buf[8:12], "little")
    if version != FORMAT_VERSION:
        raise VersionError(
            f"{path}: format version {version} not supported (expected {FORMAT_VERSION})"
        )
    header_len = int.from_bytes(buf[12:16], "little")
    if len(buf) < _HEADER_FIXED + header_len:
        raise TruncatedFileError(f"{path}: truncated header block")
    try:
        header = json.loads(buf[_HEADER_FIXED:_HEADER_FIXED + header_len].decode("utf-8"))
        manifest = header["arrays"]
    except (ValueError, KeyError, UnicodeDecodeError) as exc:
        raise FileFormatError(f"{path}: malformed header: {exc}") from exc

    offset = _HEADER_FIXED + header_len
    expected = offset
    for entry in manifest:
        expected += int(np.prod(entry["shape"], dtype=np.int64)) * np.dtype(entry["dtype"]).itemsize
    expected += _CRC_BYTES
    if len(buf) < expected:
        raise TruncatedFileError(
            f"{path}: declared payload needs {expected} bytes, file has {len(buf)}"
        )
    if len(buf) > expected:
        raise FileFormatError(f"{path}: {len(buf) - expected} trailing bytes after payload")

    stored_crc = int.from_bytes(buf[-_CRC_BYTES:], "little")
    actual_crc = zlib.crc32(buf[:-_CRC_BYTES]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise ChecksumError(
            f"{path}: checksum mismatch (stored {stored_crc:#010x}, computed {actual_crc:#010x})"
        )

    arrays = {}
    for entry in manifest:
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        arr = np.frombuffer(buf, dtype=dtype, count=count, offset=offset).reshape(shape)
        arrays[entry["name"]] = arr.copy()
        offset += count * dtype.itemsize
    header.pop("arrays", None)
    return header, arrays
