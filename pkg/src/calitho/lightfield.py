"""Sizing a microlens-over-subpixel lightfield projector around a cylindrical target.

Geometry: target radius ``r``, lens-array radius ``R``, ``n`` spatial samples
per transverse dimension, subpixel (emitter) size ``subpixel``. Lengths in meters.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .core import recommended_angle_count


@dataclass(frozen=True)
class LightfieldDesign:
    r: float
    R: float
    n: int
    n_angular: int
    angular_spacing_rad: float
    angular_spacing_deg: float
    subpixels_per_lens: int
    subpixels_exact: float
    lens_pitch: float
    subpixel_size: float
    half_angle_deg: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check(r: float, n: int) -> None:
    if r <= 0:
        raise ValueError("target radius must be positive")
    if int(n) != n or n < 1:
        raise ValueError("N must be a positive integer")


def design_from_radii(r: float, R: float, n: int) -> LightfieldDesign:
    _check(r, n)
    if r >= R:
        raise ValueError(f"target radius {r} must be smaller than outer radius {R}")
    half = math.atan(r / R)
    exact = n * half
    # a lens only holds whole emitters
    per_lens = math.floor(exact)
    if per_lens == 0:
        raise ValueError("geometry provides no angular resolution (0 subpixels per lens)")
    spacing = 2.0 / n
    return LightfieldDesign(
        r=r, R=R, n=int(n),
        n_angular=recommended_angle_count(n),
        angular_spacing_rad=spacing,
        angular_spacing_deg=math.degrees(spacing),
        subpixels_per_lens=per_lens,
        subpixels_exact=exact,
        lens_pitch=r / n,
        subpixel_size=r / (n * n * half),
        half_angle_deg=math.degrees(half),
    )


def solve_outer_radius(r: float, n: int, subpixel: float) -> float:
    """Outer radius that makes the emitter size equal ``subpixel``."""
    _check(r, n)
    if subpixel <= 0:
        raise ValueError("subpixel size must be positive")
    half = r / (n * n * subpixel)
    if half >= math.pi / 2:
        raise ValueError("infeasible: r / (N^2 * lambda) must be below pi/2")
    return r / math.tan(half)


def sweep_n(r: float, R: float, ns) -> list[LightfieldDesign]:
    return [design_from_radii(r, R, n) for n in ns]
