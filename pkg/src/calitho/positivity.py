"""Making filtered projections physically realizable (non-negative)."""
from __future__ import annotations

import numpy as np

from .core import Sinogram


def offset_positive(sino: Sinogram) -> Sinogram:
    """Shift the whole set up by its (negative) global minimum; shape is preserved."""
    m = float(sino.data.min())
    if m >= 0:
        return sino
    return sino.with_data(sino.data - m)


def clamp_negatives(sino: Sinogram) -> Sinogram:
    return sino.with_data(np.maximum(sino.data, 0.0))


def dose_contrast(dose, mask) -> float:
    """(mean_in - mean_out) / (mean_in + mean_out) over mask=1 and mask=0 pixels."""
    dose = np.asarray(dose, dtype=float)
    mask = np.asarray(mask) > 0.5
    if dose.shape != mask.shape:
        raise ValueError(f"dose {dose.shape} and mask {mask.shape} differ in shape")
    if mask.all() or not mask.any():
        raise ValueError("mask needs at least one pixel inside and one outside")
    mean_in = dose[mask].mean()
    mean_out = dose[~mask].mean()
    total = mean_in + mean_out
    if total == 0:
        return 0.0
    return float((mean_in - mean_out) / total)


HEURISTICS = {"offset": offset_positive, "clamp": clamp_negatives}
