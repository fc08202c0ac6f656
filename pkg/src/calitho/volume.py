"""Stacks of z-slices: per-slice optimization, projector frames and attenuated dose."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import AngleGrid, CalibrationCurve, Sinogram, cos_sin_deg, load_image, save_image
from .optimize import OptimizeConfig, OptimizeResult, forward_dose, optimize
from .transform import backproject, fbp_scale

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class VolumeTarget:
    slices: tuple
    z_pitch: float = 1.0

    def __post_init__(self):
        slices = tuple(np.asarray(s, dtype=float) for s in self.slices)
        if not slices:
            raise ValueError("volume needs at least one slice")
        shape = slices[0].shape
        for i, s in enumerate(slices):
            if s.shape != shape or s.ndim != 2 or shape[0] != shape[1]:
                raise ValueError(f"slice {i} has shape {s.shape}, expected square {shape}")
        object.__setattr__(self, "slices", slices)

    @property
    def size(self) -> int:
        return self.slices[0].shape[0]

    @classmethod
    def from_dir(cls, path, z_pitch: float = 1.0, cut: float = 0.5) -> "VolumeTarget":
        """Slice images (PNG/PGM) from a directory in lexicographic order, binarized."""
        files = sorted(p for p in Path(path).iterdir()
                       if p.suffix.lower() in (".png", ".pgm"))
        if not files:
            raise ValueError(f"no slice images in {path}")
        return cls(tuple((load_image(f) > cut).astype(float) for f in files), z_pitch)


class SliceError(RuntimeError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"slice {index}: {cause}")
        self.index = index


def optimize_volume(vol: VolumeTarget, cfg: OptimizeConfig) -> list[OptimizeResult]:
    out = []
    for z, target in enumerate(vol.slices):
        try:
            out.append(optimize(target, cfg))
        except Exception as exc:
            raise SliceError(z, exc) from exc
        log.info("slice %d: error %.6f", z, out[-1].error)
    return out


@dataclass(frozen=True)
class FrameSet:
    """``frames[a]`` is the projector image at angle ``a``: rows are z, columns detector."""

    frames: np.ndarray
    grid: AngleGrid
    manifest: dict = field(default_factory=dict)

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for a, frame in enumerate(self.frames):
            p = out / f"frame_{a:05d}.pgm"
            save_image(p, frame, scale="byte")
            paths.append(p)
        m = out / "manifest.json"
        m.write_text(json.dumps(self.manifest, indent=2, sort_keys=True) + "\n")
        return paths + [m]


def frame_manifest(grid: AngleGrid, rotation_speed: float) -> dict:
    if rotation_speed <= 0:
        raise ValueError("rotation speed must be positive")
    per_rev = 360.0 / grid.spacing
    return {
        "rotation_speed_deg_per_s": float(rotation_speed),
        "frame_rate_hz": rotation_speed / grid.spacing,
        "frames_per_revolution": int(round(per_rev)) if abs(per_rev - round(per_rev)) < 1e-9 else per_rev,
        "angle_start_deg": grid.start,
        "angle_range_deg": grid.range,
        "frame_count": grid.count,
    }


def assemble_frames(projections, grid: AngleGrid, rotation_speed: float) -> FrameSet:
    """Gather per-slice sinograms (or OptimizeResults) into one frame per angle."""
    sinos = [p.projections if isinstance(p, OptimizeResult) else p for p in projections]
    if not sinos:
        raise ValueError("no slices to assemble")
    for z, s in enumerate(sinos):
        if s.grid != grid:
            raise ValueError(f"slice {z} uses {s.grid}, expected {grid}")
        if s.n_x != sinos[0].n_x:
            raise ValueError(f"slice {z} has {s.n_x} detector samples, expected {sinos[0].n_x}")
    stack = np.stack([np.clip(np.round(s.data), 0, 255) for s in sinos], axis=1)
    frames = stack.astype(np.uint8)
    frames.setflags(write=False)
    return FrameSet(frames, grid, frame_manifest(grid, rotation_speed))


def entry_distance(n: int, angle_deg: float) -> np.ndarray:
    """Path length from the square's entry edge to each pixel center (flat, row-major).

    Light travels along (-sin, cos) in (x, y) = (col, row) coordinates, i.e.
    along the rays of the projection at ``angle_deg``. The square spans
    [-0.5, n - 0.5] on both axes.
    """
    cos_t, sin_t = cos_sin_deg(angle_deg)
    yy, xx = np.mgrid[0:n, 0:n]
    # walk back towards the source: direction (sin, -cos)
    dist = np.full((n, n), np.inf)
    for pos, comp in ((xx, float(sin_t)), (yy, float(-cos_t))):
        if comp > 0:
            dist = np.minimum(dist, (n - 0.5 - pos) / comp)
        elif comp < 0:
            dist = np.minimum(dist, (-0.5 - pos) / comp)
    return dist.ravel()


def attenuated_dose(proj: Sinogram, alpha: float, size: int,
                    cal: CalibrationCurve = CalibrationCurve.linear()) -> np.ndarray:
    """Dose with Beer-Lambert decay exp(-alpha * d) along each ray (alpha per pixel)."""
    if alpha < 0:
        raise ValueError("attenuation coefficient must be non-negative")
    if alpha == 0:
        return forward_dose(proj, cal, size)
    angles = proj.grid.angles
    intensity = proj.with_data(cal(proj.data), "real")

    def weight(a):
        return np.exp(-alpha * entry_distance(size, angles[a]))

    return np.maximum(backproject(intensity, size, weight), 0.0) * fbp_scale(proj.grid)
