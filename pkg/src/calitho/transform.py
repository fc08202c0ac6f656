"""Parallel-beam Radon transform, its adjoint, ramp filtering and FBP.

Discretization: each pixel is a unit square of constant value. The image is
rotated by -theta about its center ((N-1)/2, (N-1)/2) and the rotated squares
are summed into N detector columns of unit width, each square contributing the
fraction of its area that falls inside the column. A pixel's footprint on the
detector is the trapezoid box(|cos|) * box(|sin|), so every pixel whose
footprint stays on the detector deposits exactly its value (mass is conserved)
and at 0/90 degrees the transform reduces to plain column/row sums.
``backproject`` is the exact transpose of this matrix.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import AngleGrid, Sinogram, check_square, cos_sin_deg

RAMP_EXP = "ramp-exponential"
PURE_RAMP = "pure-ramp"
NO_FILTER = "none"
_FILTER_KINDS = (RAMP_EXP, PURE_RAMP, NO_FILTER)

# Angles per work unit. Fixed so accumulation order never depends on thread count.
_CHUNK = 8
_threads = 1


def set_threads(n: int | None) -> int:
    """Set the worker count for projector loops; ``None`` means all cores."""
    global _threads
    _threads = max(1, int(n if n is not None else (os.cpu_count() or 1)))
    return _threads


def get_threads() -> int:
    return _threads


@lru_cache(maxsize=8)
def _pixel_offsets(n: int) -> tuple[np.ndarray, np.ndarray]:
    c = (n - 1) / 2.0
    yy, xx = np.mgrid[0:n, 0:n]
    x = (xx - c).ravel().astype(float)
    y = (yy - c).ravel().astype(float)
    x.setflags(write=False)
    y.setflags(write=False)
    return x, y


def _left_cdf(t: np.ndarray, a: float, b: float) -> np.ndarray:
    """CDF at t <= 0 of the unit-mass trapezoid box(a) * box(b), a >= b >= 0."""
    half = 0.5 * (a + b)
    out = np.maximum(t + 0.5 * (a - b), 0.0) / a
    if b > 0.0:
        u = np.clip(t + half, 0.0, b)
        out += u * u / (2.0 * a * b)
    return out


def _footprint(n: int, cos_t: float, sin_t: float):
    """Shifted bin indices (valid bins 1..n; 0 and n+1 collect spill) and area weights.

    The trapezoid is at most sqrt(2) wide, so it covers the nearest bin and at
    most one neighbour on each side.
    """
    x, y = _pixel_offsets(n)
    s = x * cos_t + y * sin_t + (n - 1) / 2.0
    j0 = np.floor(s + 0.5)
    d = j0 - s
    a, b = max(abs(cos_t), abs(sin_t)), min(abs(cos_t), abs(sin_t))
    w_prev = _left_cdf(d - 0.5, a, b)
    w_next = _left_cdf(-d - 0.5, a, b)
    w_mid = 1.0 - w_prev - w_next
    j = j0.astype(np.int64) + 1
    return (
        (np.clip(j - 1, 0, n + 1), w_prev),
        (np.clip(j, 0, n + 1), w_mid),
        (np.clip(j + 1, 0, n + 1), w_next),
    )


# Precompute footprints only while N*N*count stays under this (~36 bytes each).
_CACHE_PIXEL_ANGLES = 4_000_000


class _Footprints:
    """Per-angle footprints of an N x N grid; cached when small enough."""

    def __init__(self, n: int, grid: AngleGrid):
        self.n = n
        self.cos, self.sin = cos_sin_deg(grid.angles)
        self._table = None
        if n * n * grid.count <= _CACHE_PIXEL_ANGLES:
            self._table = [self._compute(a) for a in range(grid.count)]

    def _compute(self, a: int):
        return tuple((idx.astype(np.int32), w)
                     for idx, w in _footprint(self.n, self.cos[a], self.sin[a]))

    def __getitem__(self, a: int):
        if self._table is not None:
            return self._table[a]
        return self._compute(a)


@lru_cache(maxsize=2)
def _footprints(n: int, grid: AngleGrid) -> _Footprints:
    return _Footprints(n, grid)


def _chunks(count: int):
    return [(a, min(a + _CHUNK, count)) for a in range(0, count, _CHUNK)]


def _run(fn, jobs):
    if _threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=_threads) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def radon(img, grid: AngleGrid) -> Sinogram:
    """Line-integral projections of a square image at every angle of ``grid``."""
    img = check_square(img)
    n = img.shape[0]
    flat = img.ravel()
    fps = _footprints(n, grid)
    out = np.zeros((grid.count, n))

    def work(span):
        for a in range(*span):
            row = np.zeros(n + 2)
            for idx, w in fps[a]:
                row += np.bincount(idx, flat * w, minlength=n + 2)
            out[a] = row[1:n + 1]

    _run(work, _chunks(grid.count))
    return Sinogram(out, grid)


def backproject(sino: Sinogram, size: int, pixel_weight=None) -> np.ndarray:
    """Smear every row back along its rays and sum over angles (adjoint of ``radon``).

    ``pixel_weight(a)``, if given, returns a flat (size*size,) factor applied to
    angle ``a``'s contribution (used for attenuation).
    """
    if sino.n_x != size:
        raise ValueError(f"sinogram has {sino.n_x} detector samples, image size is {size}")
    n = size
    fps = _footprints(n, sino.grid)
    data = sino.data

    def work(span):
        acc = np.zeros(n * n)
        padded = np.zeros(n + 2)
        for a in range(*span):
            padded[1:n + 1] = data[a]
            if pixel_weight is None:
                for idx, w in fps[a]:
                    acc += padded[idx] * w
            else:
                part = sum(padded[idx] * w for idx, w in fps[a])
                acc += part * pixel_weight(a)
        return acc

    total = np.zeros(n * n)
    for part in _run(work, _chunks(sino.count)):
        total += part
    return total.reshape(n, n)


def fbp_scale(grid: AngleGrid) -> float:
    """Riemann weight turning a sum over angles into the inversion integral."""
    return math.pi / grid.count


def default_k0(n: int, grid: AngleGrid) -> float:
    """Window scale: Nyquist when angular sampling meets pi*N/2 over 180 deg, tighter below."""
    per_half_turn = grid.count * 180.0 / grid.range
    return 0.5 * min(1.0, 2.0 * per_half_turn / (math.pi * n))


@dataclass(frozen=True)
class FilterSpec:
    """Projection filter. ``k0`` is in cycles/pixel; ``pad_factor`` >= 1 sets zero padding."""

    kind: str = RAMP_EXP
    k0: float | None = None
    pad_factor: int = 4

    def __post_init__(self):
        if self.kind not in _FILTER_KINDS:
            raise ValueError(f"unknown filter kind {self.kind!r}")
        if self.kind == RAMP_EXP and self.k0 is not None and not (0 < self.k0 <= 0.5):
            raise ValueError(f"k0 must lie in (0, 0.5] cycles/pixel, got {self.k0}")
        if self.pad_factor < 1:
            raise ValueError("pad_factor must be >= 1")

    def resolved_k0(self, n: int, grid: AngleGrid) -> float:
        return default_k0(n, grid) if self.k0 is None else float(self.k0)


def filter_response(k, kind: str = RAMP_EXP, k0: float = 0.5) -> np.ndarray:
    """H(k) = |k| exp(-(k/k0)^4) for the windowed ramp, |k| for the pure ramp."""
    k = np.abs(np.asarray(k, dtype=float))
    if kind == RAMP_EXP:
        return k * np.exp(-((k / k0) ** 4))
    if kind == PURE_RAMP:
        return k
    if kind == NO_FILTER:
        return np.ones_like(k)
    raise ValueError(f"unknown filter kind {kind!r}")


def apply_filter(sino: Sinogram, spec: FilterSpec = FilterSpec()) -> Sinogram:
    if spec.kind == NO_FILTER:
        return sino.with_data(sino.data, "real")
    n = sino.n_x
    m = spec.pad_factor * n
    k = np.fft.rfftfreq(m)
    h = filter_response(k, spec.kind, spec.resolved_k0(n, sino.grid))
    spectrum = np.fft.rfft(sino.data, n=m, axis=1)
    out = np.fft.irfft(spectrum * h, n=m, axis=1)[:, :n]
    return sino.with_data(out, "real")


def fbp_reconstruct(sino: Sinogram, spec: FilterSpec = FilterSpec()) -> np.ndarray:
    """Filtered backprojection; the result can carry negative ripples."""
    return backproject(apply_filter(sino, spec), sino.n_x) * fbp_scale(sino.grid)


def _bilinear_periodic(arr: np.ndarray, py: np.ndarray, px: np.ndarray) -> np.ndarray:
    m0, m1 = arr.shape
    y0 = np.floor(py)
    x0 = np.floor(px)
    wy = py - y0
    wx = px - x0
    y0 = y0.astype(np.int64) % m0
    x0 = x0.astype(np.int64) % m1
    y1 = (y0 + 1) % m0
    x1 = (x0 + 1) % m1
    return ((1 - wy) * (1 - wx) * arr[y0, x0] + (1 - wy) * wx * arr[y0, x1]
            + wy * (1 - wx) * arr[y1, x0] + wy * wx * arr[y1, x1])


def fourier_slice_check(img, theta: float, pad: int = 4) -> float:
    """Relative L2 gap between a projection's spectrum and the matching 2D central slice.

    Both spectra are taken about the image center and zero-padded by ``pad``;
    the 2D spectrum is sampled along (k cos theta, k sin theta) bilinearly. The
    Nyquist bin is left out.
    """
    img = check_square(img)
    n = img.shape[0]
    m = pad * n
    c = (n - 1) / 2.0
    row = radon(img, AngleGrid(1, 360.0, theta)).data[0]
    idx = np.fft.fftfreq(m) * m  # integer frequency indices
    k = idx / m
    proj_spec = np.fft.fft(row, n=m) * np.exp(2j * np.pi * k * c)

    kx = np.fft.fftfreq(m)
    shift = np.exp(2j * np.pi * kx * c)
    img_spec = np.fft.fft2(img, s=(m, m)) * shift[:, None] * shift[None, :]
    cos_t, sin_t = cos_sin_deg(theta)
    slice_spec = _bilinear_periodic(img_spec, idx * sin_t, idx * cos_t)
    # the Nyquist bin of an even-length FFT has no sign, so it cannot be matched
    keep = idx != -m // 2
    proj_spec, slice_spec = proj_spec[keep], slice_spec[keep]

    denom = np.linalg.norm(proj_spec)
    if denom == 0:
        return float(np.linalg.norm(slice_spec))
    return float(np.linalg.norm(proj_spec - slice_spec) / denom)
