"""Binary field snapshots (``.sgf``).

Little-endian layout::

    b"SGF1" | u32 version=1 | u32 rank | u32 ncomp
    rank x (u64 dim, f64 length, f64 origin)
    ncomp x row-major f64 (re, im) pairs
    u32 CRC32 of everything above
"""
from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .grid import Grid, make_grid

MAGIC = b"SGF1"
VERSION = 1
_HEAD = struct.Struct("<4sIII")
_AXIS = struct.Struct("<Qdd")


class SnapshotError(ValueError):
    """Malformed, truncated or corrupted snapshot."""


def encode(grid: Grid, field) -> bytes:
    f = np.asarray(field, dtype=np.complex128)
    if f.shape == grid.shape:
        f = f[None]
    if f.shape[1:] != grid.shape:
        raise ValueError(f"field shape {f.shape} does not match grid {grid.shape}")
    parts = [_HEAD.pack(MAGIC, VERSION, grid.rank, f.shape[0])]
    for n, L, o in zip(grid.dims, grid.lengths, grid.origins):
        parts.append(_AXIS.pack(int(n), float(L), float(o)))
    parts.append(np.ascontiguousarray(f).astype("<c16", copy=False).tobytes())
    payload = b"".join(parts)
    return payload + struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF)


def decode(blob: bytes):
    """Return ``(grid, field)``; ``field`` has a leading component axis only when ncomp > 1."""
    if len(blob) < _HEAD.size + 4:
        raise SnapshotError("truncated snapshot")
    payload, (crc,) = blob[:-4], struct.unpack("<I", blob[-4:])
    magic, version, rank, ncomp = _HEAD.unpack_from(payload)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise SnapshotError("CRC mismatch: snapshot corrupted")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    off = _HEAD.size
    dims, lengths, origins = [], [], []
    for _ in range(rank):
        n, L, o = _AXIS.unpack_from(payload, off)
        off += _AXIS.size
        dims.append(n)
        lengths.append(L)
        origins.append(o)
    grid = make_grid(dims, lengths, origins)
    count = ncomp * grid.size
    if len(payload) - off != 16 * count:
        raise SnapshotError("payload size does not match header")
    data = np.frombuffer(payload, dtype="<c16", count=count, offset=off).astype(np.complex128)
    field = data.reshape((ncomp,) + grid.shape)
    return grid, field[0] if ncomp == 1 else field


def write(path, grid: Grid, field) -> None:
    Path(path).write_bytes(encode(grid, field))


def read(path):
    return decode(Path(path).read_bytes())
