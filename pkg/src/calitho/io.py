"""Sinogram files: the binary CALS container and a CSV dump for debugging.

CALS layout (little-endian): b"CALS", u32 n_x, u32 count, f32 start_deg,
f32 range_deg, u8 domain tag (0 real, 1 quantized), then count*n_x f32 values
row by row.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import DOMAIN_QUANTIZED, DOMAIN_REAL, AngleGrid, Sinogram

MAGIC = b"CALS"
_HEADER = struct.Struct("<4sIIffB")
_TAGS = {DOMAIN_REAL: 0, DOMAIN_QUANTIZED: 1}


class FormatError(ValueError):
    """Malformed sinogram file."""


def write_cals(path, sino: Sinogram) -> None:
    g = sino.grid
    header = _HEADER.pack(MAGIC, sino.n_x, sino.count, g.start, g.range, _TAGS[sino.domain])
    with open(Path(path), "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(sino.data, dtype="<f4").tobytes())


def read_cals(path) -> Sinogram:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, n_x, count, start, rng, tag = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if tag not in (0, 1):
        raise FormatError(f"{path}: unknown domain tag {tag}")
    body = raw[_HEADER.size:]
    if len(body) != 4 * n_x * count:
        raise FormatError(f"{path}: expected {n_x * count} samples, found {len(body) // 4}")
    data = np.frombuffer(body, dtype="<f4").astype(float).reshape(count, n_x)
    try:
        grid = AngleGrid(int(count), float(rng), float(start))
        return Sinogram(data, grid, DOMAIN_QUANTIZED if tag else DOMAIN_REAL)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_sinogram_csv(path, sino: Sinogram) -> None:
    """One row per angle: angle_deg followed by the detector samples."""
    table = np.column_stack([sino.grid.angles, sino.data])
    header = "angle_deg," + ",".join(f"x{i}" for i in range(sino.n_x))
    np.savetxt(Path(path), table, delimiter=",", header=header, comments="", fmt="%.9g")
