"""Binary dump format for complex grids.

Layout: 16-byte header (8-byte magic ``b"OTFSGRID"``, rows and columns as
little-endian uint32) followed by row-major ``(re, im)`` float64 pairs,
little-endian.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"OTFSGRID"
_HEADER = struct.Struct("<8sII")


def encode_grid(grid: np.ndarray) -> bytes:
    grid = np.asarray(grid, dtype=complex)
    if grid.ndim != 2:
        raise ValueError(f"expected a 2-D grid, got shape {grid.shape}")
    rows, cols = grid.shape
    body = np.ascontiguousarray(grid).astype("<c16").tobytes()
    return _HEADER.pack(MAGIC, rows, cols) + body


def decode_grid(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise ValueError("truncated grid header")
    magic, rows, cols = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    expected = _HEADER.size + 16 * rows * cols
    if len(data) != expected:
        raise ValueError(f"expected {expected} bytes for a {rows}x{cols} grid, got {len(data)}")
    return np.frombuffer(data, dtype="<c16", offset=_HEADER.size).reshape(rows, cols).astype(complex)


def write_grid(path: str | Path, grid: np.ndarray) -> None:
    path = Path(path)
    try:
        path.write_bytes(encode_grid(grid))
    except OSError as exc:
        raise OSError(f"cannot write grid to {path}: {exc}") from exc


def read_grid(path: str | Path) -> np.ndarray:
    return decode_grid(Path(path).read_bytes())
