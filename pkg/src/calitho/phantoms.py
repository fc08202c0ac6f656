"""Test targets on an N x N grid centered at ((N-1)/2, (N-1)/2)."""
from __future__ import annotations

import numpy as np


def _offsets(n: int):
    c = (n - 1) / 2.0
    yy, xx = np.mgrid[0:n, 0:n]
    return xx - c, yy - c


def disk(n: int, radius: float) -> np.ndarray:
    x, y = _offsets(n)
    return (x**2 + y**2 <= radius**2).astype(float)


def annulus(n: int, r_in: float, r_out: float) -> np.ndarray:
    x, y = _offsets(n)
    r2 = x**2 + y**2
    return ((r2 <= r_out**2) & (r2 >= r_in**2)).astype(float)


def rectangle(n: int, half_width: float, half_height: float) -> np.ndarray:
    x, y = _offsets(n)
    return ((np.abs(x) <= half_width) & (np.abs(y) <= half_height)).astype(float)


def siemens_star(n: int, spokes: int = 16, radius: float | None = None) -> np.ndarray:
    x, y = _offsets(n)
    if radius is None:
        radius = 0.4 * n
    phi = np.arctan2(y, x)
    on = np.cos(spokes * phi) > 0
    return (on & (x**2 + y**2 <= radius**2)).astype(float)


def gaussian_blob(n: int, sigma: float, center=(0.0, 0.0)) -> np.ndarray:
    """Gaussian with peak 1 at ``center`` (x, y offset from the grid center)."""
    x, y = _offsets(n)
    return np.exp(-((x - center[0]) ** 2 + (y - center[1]) ** 2) / (2 * sigma**2))


def inscribed_mask(n: int, margin: float = 1.0) -> np.ndarray:
    """Pixels whose projection stays on the detector at every angle."""
    return disk(n, (n - 1) / 2.0 - margin)
