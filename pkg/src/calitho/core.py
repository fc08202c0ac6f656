"""Shared containers: angle grids, sinograms, calibration curves and image helpers.

Images are plain 2D float arrays indexed ``[row, col]`` = ``[y, x]``. Targets are
{0, 1} masks, dose maps are non-negative reals, cure maps live in [0, 1].
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DOMAIN_REAL = "real"
DOMAIN_QUANTIZED = "quantized-8bit"
_DOMAINS = (DOMAIN_REAL, DOMAIN_QUANTIZED)


@dataclass(frozen=True)
class AngleGrid:
    """Evenly spaced, end-exclusive projection angles in degrees."""

    count: int
    range: float = 180.0
    start: float = 0.0

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"angle count must be a positive integer, got {self.count}")
        if self.range <= 0:
            raise ValueError(f"angular range must be positive, got {self.range}")
        object.__setattr__(self, "count", int(self.count))
        object.__setattr__(self, "range", float(self.range))
        object.__setattr__(self, "start", float(self.start))

    @property
    def spacing(self) -> float:
        return self.range / self.count

    @property
    def angles(self) -> np.ndarray:
        return self.start + np.arange(self.count) * self.range / self.count

    @property
    def radians(self) -> np.ndarray:
        return np.deg2rad(self.angles)


def recommended_angle_count(n_spatial: int) -> int:
    """Angles over 180 degrees so adjacent Fourier slices are one radial sample apart."""
    if n_spatial < 1:
        raise ValueError("n_spatial must be >= 1")
    return int(round(math.pi * n_spatial / 2))


def angular_spacing(grid: AngleGrid) -> float:
    return grid.spacing


def cos_sin_deg(angles_deg) -> tuple[np.ndarray, np.ndarray]:
    """cos/sin of angles in degrees, exact at multiples of 90 degrees."""
    a = np.asarray(angles_deg, dtype=float)
    c = np.cos(np.deg2rad(a))
    s = np.sin(np.deg2rad(a))
    quarter = np.mod(a, 360.0) / 90.0
    exact = np.isclose(quarter, np.round(quarter), rtol=0, atol=1e-12)
    q = np.mod(np.round(quarter).astype(int), 4)
    c = np.where(exact, np.choose(q, [1.0, 0.0, -1.0, 0.0]), c)
    s = np.where(exact, np.choose(q, [0.0, 1.0, 0.0, -1.0]), s)
    return c, s


@dataclass(frozen=True)
class Sinogram:
    """Projections, one row per angle of ``grid``, ``n_x`` detector samples per row."""

    data: np.ndarray
    grid: AngleGrid
    domain: str = DOMAIN_REAL

    def __post_init__(self):
        if self.domain not in _DOMAINS:
            raise ValueError(f"unknown sinogram domain {self.domain!r}")
        data = np.array(self.data, dtype=float)
        if data.ndim != 2 or data.shape[0] != self.grid.count:
            raise ValueError(
                f"sinogram data must be (count={self.grid.count}, n_x), got {data.shape}"
            )
        if self.domain == DOMAIN_QUANTIZED:
            if np.any(data < 0) or np.any(data > 255) or np.any(data != np.round(data)):
                raise ValueError("quantized sinogram must hold integers in [0, 255]")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_x(self) -> int:
        return self.data.shape[1]

    @property
    def count(self) -> int:
        return self.grid.count

    def with_data(self, data, domain: str | None = None) -> "Sinogram":
        return Sinogram(data, self.grid, self.domain if domain is None else domain)


def quantize(data) -> np.ndarray:
    """Nearest point of {0, ..., 255}: clamp then round (half to even)."""
    return np.round(np.clip(np.asarray(data, dtype=float), 0.0, 255.0))


def quantize_sinogram(sino: Sinogram) -> Sinogram:
    return sino.with_data(quantize(sino.data), DOMAIN_QUANTIZED)


@dataclass(frozen=True)
class CalibrationCurve:
    """Piecewise-linear map from 8-bit projector value to intensity (W/cm^2)."""

    values: tuple = (0.0, 255.0)
    intensities: tuple = (0.0, 1.0)
    _v: np.ndarray = field(init=False, repr=False, compare=False)
    _i: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        i = np.asarray(self.intensities, dtype=float)
        if v.shape != i.shape or v.ndim != 1 or v.size < 2:
            raise ValueError("calibration needs matching 1D value/intensity lists (>= 2 points)")
        if np.any(np.diff(v) <= 0):
            raise ValueError("calibration values must be strictly increasing")
        if np.any(i < 0) or np.any(np.diff(i) < 0):
            raise ValueError("calibration intensities must be non-negative and non-decreasing")
        if v[0] != 0 or i[0] != 0:
            raise ValueError("calibration must map 0 -> 0")
        object.__setattr__(self, "values", tuple(v.tolist()))
        object.__setattr__(self, "intensities", tuple(i.tolist()))
        object.__setattr__(self, "_v", v)
        object.__setattr__(self, "_i", i)

    @classmethod
    def linear(cls, i_max: float = 1.0) -> "CalibrationCurve":
        return cls((0.0, 255.0), (0.0, float(i_max)))

    @property
    def i_max(self) -> float:
        return float(self(255.0))

    def __call__(self, value):
        v = np.asarray(value, dtype=float)
        out = np.interp(v, self._v, self._i)
        # linear extrapolation past the last sample keeps real-valued iterates monotone
        slope = (self._i[-1] - self._i[-2]) / (self._v[-1] - self._v[-2])
        return np.where(v > self._v[-1], self._i[-1] + slope * (v - self._v[-1]), out)

    @classmethod
    def from_csv(cls, path) -> "CalibrationCurve":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or set(reader.fieldnames) != {"dlp_value", "intensity_w_cm2"}:
                raise ValueError("calibration CSV header must be dlp_value,intensity_w_cm2")
            rows = [(float(r["dlp_value"]), float(r["intensity_w_cm2"])) for r in reader]
        rows.sort()
        return cls(tuple(r[0] for r in rows), tuple(r[1] for r in rows))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["dlp_value", "intensity_w_cm2"])
            for v, i in zip(self.values, self.intensities):
                w.writerow([repr(v), repr(i)])


def binarize(img, cut: float) -> np.ndarray:
    return (np.asarray(img, dtype=float) > cut).astype(float)


def pad_to_square(img) -> np.ndarray:
    """Zero-pad the short axis (centered) so the image is square."""
    img = np.asarray(img, dtype=float)
    h, w = img.shape
    n = max(h, w)
    out = np.zeros((n, n))
    r0, c0 = (n - h) // 2, (n - w) // 2
    out[r0:r0 + h, c0:c0 + w] = img
    return out


def check_square(img) -> np.ndarray:
    img = np.asarray(img, dtype=float)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise ValueError(f"expected a square 2D image, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    return img


def load_image(path) -> np.ndarray:
    """Load an 8-bit grayscale PGM/PNG as values/255, padded to square."""
    from PIL import Image

    with Image.open(Path(path)) as im:
        arr = np.asarray(im.convert("L"), dtype=float) / 255.0
    return pad_to_square(arr)


def save_image(path, img, scale: str = "unit") -> None:
    """Write an 8-bit grayscale image; format follows the suffix (.png / .pgm).

    ``scale`` is "unit" for data in [0, 1], "byte" for data already in 0..255 and
    "max" to normalize by the image maximum.
    """
    from PIL import Image

    a = np.asarray(img, dtype=float)
    if scale == "max":
        m = a.max() if a.size else 0.0
        a = a / m * 255.0 if m > 0 else np.zeros_like(a)
    elif scale == "unit":
        a = a * 255.0
    elif scale != "byte":
        raise ValueError(f"unknown scale {scale!r}")
    Image.fromarray(np.clip(np.round(a), 0, 255).astype(np.uint8)).save(Path(path))
