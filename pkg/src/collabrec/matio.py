"""Flat binary matrix files.

Layout: a 16-byte header of two unsigned 64-bit little-endian dimensions
(rows, cols), followed by the row-major float64 little-endian entries.
Used for payload exchange between the party and analyzer CLI stages and
for model snapshots.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<QQ")


def write_matrix(path, matrix) -> None:
    """Write a 2-D float array to ``path`` in the flat binary layout."""
    arr = np.ascontiguousarray(matrix, dtype="<f8")
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(arr.shape[0], arr.shape[1]))
        fh.write(arr.tobytes())


def read_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`write_matrix`."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    rows, cols = _HEADER.unpack_from(raw)
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != rows * cols:
        raise ValueError(
            f"{path}: expected {rows}x{cols} entries, found {body.size}"
        )
    return body.reshape(rows, cols).astype(np.float64)
