"""Shared helpers for the binary container formats."""

from __future__ import annotations

import struct

__all__ = ["FileFormatError", "read_exact", "expect_magic"]


class FileFormatError(ValueError):
    """Raised when a binary file does not match its declared layout."""


def read_exact(f, n: int) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise FileFormatError(f"truncated file: wanted {n} bytes, got {len(data)}")
    return data


def expect_magic(f, magic: bytes):
    found = f.read(len(magic))
    if found != magic:
        raise FileFormatError(f"bad magic: expected {magic!r}, found {found!r}")


def read_struct(f, fmt: str):
    size = struct.calcsize(fmt)
    return struct.unpack(fmt, read_exact(f, size))
